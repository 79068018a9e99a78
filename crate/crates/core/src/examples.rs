//! Bundled example models.

use crate::model::{parse_model, Model, ModelError};

/// Automated guided vehicle between two workstations.
pub const AGV: &str = include_str!("../models/agv.pact");

/// Maintenance procedures of a printing process.
pub const PRINTER: &str = include_str!("../models/printer.pact");

pub const NAMES: &[&str] = &["agv", "printer"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "agv" => Some(AGV),
        "printer" => Some(PRINTER),
        _ => None,
    }
}

pub fn load_example(name: &str) -> Result<Model, ModelError> {
    let text = source(name).ok_or_else(|| ModelError::UnknownName { kind: "example", name: name.to_string() })?;
    parse_model(text)
}
