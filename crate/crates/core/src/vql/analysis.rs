//! Clause algebra over a [`ClauseSet`]: optional clauses, prerequisites,
//! column and table extraction, and the vis/axis/data decomposition.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use super::ast::*;
use super::visit;
use crate::store::{Database, Table};
use crate::text::ident_key;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("ambiguous column `{0}`")]
    AmbiguousColumn(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
}

/// Clauses that may be masked: everything but SELECT and FROM, and
/// VISUALIZE unless `maskable_visualize` is set.
pub fn optional_clauses(c: &ClauseSet, maskable_visualize: bool) -> Vec<Clause> {
    c.clauses()
        .into_iter()
        .filter(|cl| match cl.kind() {
            ClauseKind::Select | ClauseKind::From => false,
            ClauseKind::Visualize => maskable_visualize,
            _ => true,
        })
        .collect()
}

/// P(c): clause kinds that must be present for `clause` to be meaningful.
pub fn prerequisites(clause: &Clause) -> BTreeSet<ClauseKind> {
    let mut out = BTreeSet::new();
    match clause {
        Clause::Having(_) => {
            out.insert(ClauseKind::GroupBy);
        }
        Clause::OrderBy(keys)
            if keys
                .iter()
                .any(|k| matches!(k.expr, SortExpr::Aggregate(_))) =>
        {
            out.insert(ClauseKind::GroupBy);
        }
        _ => {}
    }
    out
}

/// One FROM/JOIN table binding.
#[derive(Debug, Clone)]
pub struct Binding<'a> {
    pub table_ref: &'a TableRef,
    pub table: Option<&'a Table>,
}

impl Binding<'_> {
    fn matches_qualifier(&self, q: &str) -> bool {
        let q = ident_key(q);
        match &self.table_ref.alias {
            Some(a) if ident_key(a) == q => true,
            _ => ident_key(&self.table_ref.name) == q,
        }
    }
}

/// The tables introduced by FROM and JOIN, in order.
#[derive(Debug, Clone)]
pub struct Scope<'a> {
    pub bindings: Vec<Binding<'a>>,
}

impl<'a> Scope<'a> {
    pub fn new(c: &'a ClauseSet, db: &'a Database) -> Self {
        let bindings = core::iter::once(c.from())
            .chain(c.joins().iter().map(|j| &j.table))
            .map(|table_ref| Binding {
                table_ref,
                table: db.table(&table_ref.name),
            })
            .collect();
        Scope { bindings }
    }
}

/// Outcome of resolving a column reference inside a [`Scope`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    /// Found in binding `binding` at column index `column`.
    Bound {
        binding: usize,
        column: usize,
        key: String,
    },
    /// Not provided by any bound table; `key` is the best qualified guess.
    Unbound {
        key: String,
    },
    Ambiguous {
        name: String,
    },
}

impl Resolution {
    pub fn key(&self) -> Option<&str> {
        match self {
            Resolution::Bound { key, .. } | Resolution::Unbound { key } => Some(key),
            Resolution::Ambiguous { .. } => None,
        }
    }
}

pub fn resolve_column(scope: &Scope<'_>, col: &ColumnRef) -> Resolution {
    let name = ident_key(&col.name);
    let bound_key = |b: &Binding<'_>| format!("{}.{}", ident_key(&b.table_ref.name), name);
    if let Some(q) = &col.qualifier {
        let Some((i, b)) = scope
            .bindings
            .iter()
            .enumerate()
            .find(|(_, b)| b.matches_qualifier(q))
        else {
            return Resolution::Unbound {
                key: format!("{}.{}", ident_key(q), name),
            };
        };
        return match b.table.and_then(|t| t.column_index(&col.name)) {
            Some(ci) => Resolution::Bound {
                binding: i,
                column: ci,
                key: bound_key(b),
            },
            None => Resolution::Unbound { key: bound_key(b) },
        };
    }
    let hits: Vec<(usize, usize)> = scope
        .bindings
        .iter()
        .enumerate()
        .filter_map(|(i, b)| {
            b.table
                .and_then(|t| t.column_index(&col.name))
                .map(|ci| (i, ci))
        })
        .collect();
    match hits.as_slice() {
        [(i, ci)] => Resolution::Bound {
            binding: *i,
            column: *ci,
            key: bound_key(&scope.bindings[*i]),
        },
        [] => Resolution::Unbound {
            key: match scope.bindings.first() {
                Some(b) => bound_key(b),
                None => format!("?.{name}"),
            },
        },
        _ => Resolution::Ambiguous {
            name: col.name.clone(),
        },
    }
}

/// Cols(C): every referenced column, qualified against the FROM/JOIN
/// bindings. `*` contributes nothing.
pub fn referenced_columns(c: &ClauseSet, db: &Database) -> Result<BTreeSet<String>, AnalysisError> {
    let scope = Scope::new(c, db);
    let mut out = BTreeSet::new();
    for clause in c.clauses() {
        for col in visit::columns(&clause) {
            match resolve_column(&scope, col) {
                Resolution::Ambiguous { name } => return Err(AnalysisError::AmbiguousColumn(name)),
                r => {
                    out.insert(r.key().unwrap_or_default().into());
                }
            }
        }
    }
    Ok(out)
}

/// B(C): columns introduced by the FROM/JOIN tables.
pub fn bound_columns(c: &ClauseSet, db: &Database) -> Result<BTreeSet<String>, AnalysisError> {
    let mut out = BTreeSet::new();
    for t in core::iter::once(c.from()).chain(c.joins().iter().map(|j| &j.table)) {
        let table = db
            .table(&t.name)
            .ok_or_else(|| AnalysisError::UnknownTable(t.name.clone()))?;
        for col in &table.columns {
            out.insert(format!(
                "{}.{}",
                ident_key(&table.name),
                ident_key(&col.name)
            ));
        }
    }
    Ok(out)
}

/// Tabs(C): lowercase names of the FROM/JOIN tables.
pub fn referenced_tables(c: &ClauseSet) -> BTreeSet<String> {
    core::iter::once(c.from())
        .chain(c.joins().iter().map(|j| &j.table))
        .map(|t| ident_key(&t.name))
        .collect()
}

/// Chart type, axis items and residual data clauses of a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VqlComponents {
    pub vis: Option<ChartType>,
    pub axis: Vec<SelectItem>,
    pub data: Vec<Clause>,
}

impl VqlComponents {
    /// Reassembles the original clause set.
    pub fn recombine(&self) -> Result<ClauseSet, ClauseSetError> {
        let head = self
            .vis
            .map(Clause::Visualize)
            .into_iter()
            .chain(core::iter::once(Clause::Select(self.axis.clone())));
        ClauseSet::from_clauses(head.chain(self.data.iter().cloned()))
    }
}

pub fn components(c: &ClauseSet) -> VqlComponents {
    VqlComponents {
        vis: c.visualize(),
        axis: c.select().to_vec(),
        data: c
            .clauses()
            .into_iter()
            .filter(|cl| !matches!(cl.kind(), ClauseKind::Visualize | ClauseKind::Select))
            .collect(),
    }
}
