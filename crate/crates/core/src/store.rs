//! Immutable relational databases and their schema catalog.
//!
//! A [`Database`] is built once (the `pmvis` crate loads it from
//! `schema.json` plus one CSV per table) and never mutated afterwards.
//! Identifiers compare case-insensitively; display casing is preserved.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::text::ident_key;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Real,
    Text,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Integer | ColumnType::Real)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "integer" => Some(ColumnType::Integer),
            "real" => Some(ColumnType::Real),
            "text" => Some(ColumnType::Text),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Real => "real",
            ColumnType::Text => "text",
        }
    }

    /// Whether a value may be stored in a column of this type.
    pub fn admits(self, v: &Value) -> bool {
        matches!(
            (self, v),
            (_, Value::Null)
                | (ColumnType::Integer, Value::Integer(_))
                | (ColumnType::Real, Value::Real(_))
                | (ColumnType::Text, Value::Text(_))
        )
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub declared_type: ColumnType,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        let key = ident_key(name);
        self.columns.iter().position(|c| ident_key(&c.name) == key)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }
}

/// Qualified column reference `table.column` as written in the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnPath {
    pub table: String,
    pub column: String,
}

impl ColumnPath {
    /// Parses `t.c`.
    pub fn parse(s: &str) -> Option<Self> {
        let (t, c) = s.split_once('.')?;
        if t.is_empty() || c.is_empty() || c.contains('.') {
            return None;
        }
        Some(ColumnPath {
            table: t.into(),
            column: c.into(),
        })
    }

    pub fn key(&self) -> String {
        format!("{}.{}", ident_key(&self.table), ident_key(&self.column))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForeignKey {
    pub from: ColumnPath,
    pub to: ColumnPath,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoreError {
    #[error("duplicate table name `{0}`")]
    DuplicateTableName(String),
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumnName { table: String, column: String },
    #[error("table `{table}` row {row} has {found} cells, expected {expected}")]
    RowArity {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("type mismatch in table `{table}` row {row} column `{column}`")]
    TypeMismatch {
        table: String,
        row: usize,
        column: String,
    },
    #[error("foreign key endpoint `{0}` is not in the catalog")]
    DanglingForeignKey(String),
}

/// Table schema used to build a [`Database`]: `(name, [(column, type)])`.
#[derive(Debug, Clone)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<(String, ColumnType)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Database {
    pub id: String,
    tables: Vec<Table>,
    foreign_keys: Vec<ForeignKey>,
}

impl Database {
    /// Builds a database, checking every catalog and row invariant.
    pub fn new(
        id: impl Into<String>,
        tables: Vec<(TableSchema, Vec<Vec<Value>>)>,
        foreign_keys: Vec<ForeignKey>,
    ) -> Result<Self, StoreError> {
        let mut seen = BTreeSet::new();
        let mut built = Vec::with_capacity(tables.len());
        for (schema, rows) in tables {
            if !seen.insert(ident_key(&schema.name)) {
                return Err(StoreError::DuplicateTableName(schema.name));
            }
            let mut cols = BTreeSet::new();
            for (c, _) in &schema.columns {
                if !cols.insert(ident_key(c)) {
                    return Err(StoreError::DuplicateColumnName {
                        table: schema.name.clone(),
                        column: c.clone(),
                    });
                }
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != schema.columns.len() {
                    return Err(StoreError::RowArity {
                        table: schema.name.clone(),
                        row: i,
                        expected: schema.columns.len(),
                        found: row.len(),
                    });
                }
                for ((name, ty), v) in schema.columns.iter().zip(row) {
                    if !ty.admits(v) {
                        return Err(StoreError::TypeMismatch {
                            table: schema.name.clone(),
                            row: i,
                            column: name.clone(),
                        });
                    }
                }
            }
            let columns = schema
                .columns
                .into_iter()
                .map(|(name, declared_type)| Column {
                    name,
                    declared_type,
                    table: schema.name.clone(),
                })
                .collect();
            built.push(Table {
                name: schema.name,
                columns,
                rows,
            });
        }
        let db = Database {
            id: id.into(),
            tables: built,
            foreign_keys,
        };
        let known = db.column_names();
        for fk in &db.foreign_keys {
            for end in [&fk.from, &fk.to] {
                if !known.contains(&end.key()) {
                    return Err(StoreError::DanglingForeignKey(format!(
                        "{}.{}",
                        end.table, end.column
                    )));
                }
            }
        }
        Ok(db)
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        let key = ident_key(name);
        self.tables.iter().find(|t| ident_key(&t.name) == key)
    }

    /// R(D): lowercase table names.
    pub fn table_names(&self) -> BTreeSet<String> {
        self.tables.iter().map(|t| ident_key(&t.name)).collect()
    }

    /// C(D): lowercase `table.column` names.
    pub fn column_names(&self) -> BTreeSet<String> {
        self.tables
            .iter()
            .flat_map(|t| {
                t.columns
                    .iter()
                    .map(move |c| format!("{}.{}", ident_key(&t.name), ident_key(&c.name)))
            })
            .collect()
    }

    /// Every column in catalog order.
    pub fn all_columns(&self) -> impl Iterator<Item = &Column> {
        self.tables.iter().flat_map(|t| t.columns.iter())
    }
}
