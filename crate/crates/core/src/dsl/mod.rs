//! Concrete syntax for model files.

pub mod lexer;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use parser::{parse_action, parse_decls, parse_formula, parse_term, Decl, DeclKind, SupervisorMode};
pub use printer::print_model;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}
