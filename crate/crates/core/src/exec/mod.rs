//! In-memory execution of the SQL part of a VQL query, the renderability
//! check for its chart, and the declarative chart document.

mod chart;
mod dates;
mod engine;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::Serialize;

use crate::store::{ColumnType, Database};
use crate::value::Value;
use crate::vql::ClauseSet;

pub use chart::{
    emit_chart_spec, is_renderable, renderability, Channel, ChartDocument, Encoding, FieldType,
    InlineData, NotRenderable, Record, RenderIssue,
};

/// The query references something the database does not have. Raised when
/// a caller skips syntax and schema validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingError {
    #[error("no such table: {0}")]
    UnknownTable(String),
    #[error("no such column: {0}")]
    UnknownColumn(String),
    #[error("ambiguous column: {0}")]
    AmbiguousColumn(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecErrorKind {
    #[error("{func} over text column `{column}`")]
    AggregateOverText { func: &'static str, column: String },
    #[error("column `{0}` is neither grouped nor aggregated")]
    NonGroupedColumn(String),
    #[error("aggregate in WHERE")]
    AggregateInWhere,
    #[error("integer overflow in SUM")]
    IntegerOverflow,
    #[error("BIN BY {interval} needs a date column, `{column}` is {ty}")]
    BinNeedsDate {
        column: String,
        interval: &'static str,
        ty: ColumnType,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("contract violation: {0}")]
    ContractViolation(GroundingError),
    #[error("execution error: {0}")]
    Execution(ExecErrorKind),
}

impl From<ExecErrorKind> for ExecError {
    fn from(k: ExecErrorKind) -> Self {
        ExecError::Execution(k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultColumn {
    pub label: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

/// Output of [`execute`].
#[derive(Debug, Clone, Serialize)]
pub struct ResultTable {
    pub columns: Vec<ResultColumn>,
    pub rows: Vec<Vec<Value>>,
    /// Whether row order is significant (ORDER BY or LIMIT present).
    pub ordered: bool,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row equivalence: sequence equality if either side is ordered,
    /// multiset equality otherwise. Values compare after numeric widening.
    pub fn same_rows(&self, other: &ResultTable) -> bool {
        same_rows(&self.rows, &other.rows, self.ordered || other.ordered)
    }
}

impl PartialEq for ResultTable {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns && self.ordered == other.ordered && self.same_rows(other)
    }
}

pub(crate) fn row_cmp(a: &[Value], b: &[Value]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn same_rows(a: &[Vec<Value>], b: &[Vec<Value>], ordered: bool) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if ordered {
        return a
            .iter()
            .zip(b)
            .all(|(x, y)| row_cmp(x, y) == Ordering::Equal);
    }
    let mut a: Vec<&Vec<Value>> = a.iter().collect();
    let mut b: Vec<&Vec<Value>> = b.iter().collect();
    a.sort_by(|x, y| row_cmp(x, y));
    b.sort_by(|x, y| row_cmp(x, y));
    a.iter()
        .zip(&b)
        .all(|(x, y)| row_cmp(x, y) == Ordering::Equal)
}

/// Runs the SQL part of `c` over `db`.
///
/// The query must be schema-grounded; anything else is a
/// [`ExecError::ContractViolation`].
pub fn execute(c: &ClauseSet, db: &Database) -> Result<ResultTable, ExecError> {
    engine::run(c, db)
}

/// Whether executing `c` yields at least one row.
pub fn non_empty(c: &ClauseSet, db: &Database) -> Result<bool, ExecError> {
    execute(c, db).map(|r| !r.is_empty())
}
