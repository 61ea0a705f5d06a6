//! VQL: tokenizer, parser, canonical assembler and clause algebra.

mod analysis;
mod ast;
mod lexer;
mod parser;
pub(crate) mod visit;

use alloc::string::String;
use core::fmt;

pub use analysis::{
    bound_columns, components, optional_clauses, prerequisites, referenced_columns,
    referenced_tables, resolve_column, AnalysisError, Binding, Resolution, Scope, VqlComponents,
};
pub use ast::*;
pub use parser::parse;

/// Canonical text of a clause set.
pub fn assemble(c: &ClauseSet) -> String {
    c.assemble()
}

/// Rejection by the grammar: the negative verdict of the syntax validator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

impl SyntaxError {
    pub(crate) fn new(
        position: usize,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        SyntaxError {
            position,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at position {}: expected {}, found {}",
            self.position, self.expected, self.found
        )
    }
}

impl core::error::Error for SyntaxError {}
