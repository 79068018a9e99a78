//! Supervisory control for process-algebraic plant models: terms, event- and
//! state-based semantics, partial bisimulation and the controllability checks
//! built on it.

pub mod action;
pub mod effect;
pub mod event;
pub mod formula;
pub mod grammar;
pub mod lts;
pub mod renaming;
pub mod state;
pub mod term;
pub mod pbisim;
pub mod requirements;
pub mod supervisory;
pub mod dsl;
pub mod model;
pub mod examples;
pub mod cli;
