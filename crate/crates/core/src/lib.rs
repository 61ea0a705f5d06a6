//! Core algorithms for progressive multi-turn text-to-visualization.
//!
//! The crate is `no_std` (with `alloc`) and free of IO. It contains:
//!
//! * [`store`]: typed relational databases and the schema catalog,
//! * [`vql`]: the VQL lexer, parser, canonical assembler and clause algebra,
//! * [`exec`]: the in-memory query executor, renderability check and chart document,
//! * [`trajectory`]: rule-constrained reverse masking and NLQ templates,
//! * [`agent`]: the user, system and validation agents with the tool permission gate,
//! * [`metrics`]: component and execution accuracies plus cost reports.
//!
//! File formats, the HTTP client and the command-line tool live in the `pmvis` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agent;
pub mod exec;
pub mod llm;
pub mod metrics;
pub mod store;
#[cfg(test)]
mod testutil;
pub mod text;
pub mod trajectory;
pub mod value;
pub mod vql;

pub use exec::{execute, ChartDocument, ExecError, ResultTable};
pub use store::{Column, ColumnType, Database, ForeignKey, StoreError, Table};
pub use value::Value;
pub use vql::{assemble, parse, ClauseSet, SyntaxError};
