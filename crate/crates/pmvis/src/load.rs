//! Database directories: `schema.json` plus one CSV file per table.

use std::path::{Path, PathBuf};

use pmvis_core::store::{ColumnPath, ColumnType, Database, ForeignKey, StoreError, TableSchema};
use pmvis_core::Value;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("no schema.json in {0}")]
    MissingSchema(PathBuf),
    #[error("table `{table}` has no data file at {path}")]
    MissingTableFile { table: String, path: PathBuf },
    #[error("table `{table}` row {row} column `{column}`: cannot read {cell:?} as {ty}")]
    TypeCoercion {
        table: String,
        row: usize,
        column: String,
        cell: String,
        ty: &'static str,
    },
    #[error("duplicate table name `{0}`")]
    DuplicateTableName(String),
    #[error("table `{table}` header {found:?} does not match schema columns {expected:?}")]
    HeaderMismatch {
        table: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("unknown column type `{ty}` for `{table}.{column}`")]
    UnknownType {
        table: String,
        column: String,
        ty: String,
    },
    #[error("malformed foreign key endpoint `{0}`")]
    BadForeignKey(String),
    #[error("invalid schema.json: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("csv error in table `{table}`: {source}")]
    Csv {
        table: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Store(StoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    db_id: String,
    tables: Vec<TableDecl>,
    #[serde(default)]
    foreign_keys: Vec<ForeignKeyDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDecl {
    name: String,
    columns: Vec<ColumnDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDecl {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForeignKeyDecl {
    from: String,
    to: String,
}

/// Reads one cell under its declared type. Empty cells are Null.
pub fn coerce_cell(cell: &str, ty: ColumnType) -> Option<Value> {
    if cell.is_empty() {
        return Some(Value::Null);
    }
    match ty {
        ColumnType::Integer => cell.parse::<i64>().ok().map(Value::Integer),
        ColumnType::Real => cell
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Real),
        ColumnType::Text => Some(Value::Text(cell.to_string())),
    }
}

fn read_table(
    dir: &Path,
    decl: &TableDecl,
    columns: &[(String, ColumnType)],
) -> Result<Vec<Vec<Value>>, LoadError> {
    let path = dir.join(format!("{}.csv", decl.name));
    if !path.is_file() {
        return Err(LoadError::MissingTableFile {
            table: decl.name.clone(),
            path,
        });
    }
    let csv_err = |source| LoadError::Csv {
        table: decl.name.clone(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let expected: Vec<String> = columns.iter().map(|(c, _)| c.clone()).collect();
    if header != expected {
        return Err(LoadError::HeaderMismatch {
            table: decl.name.clone(),
            expected,
            found: header,
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .zip(columns)
            .map(|(cell, (column, ty))| {
                coerce_cell(cell, *ty).ok_or_else(|| LoadError::TypeCoercion {
                    table: decl.name.clone(),
                    row: i + 1,
                    column: column.clone(),
                    cell: cell.to_string(),
                    ty: ty.name(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Loads a database directory. Column types come from `schema.json`; the
/// CSV header must list the columns in schema order.
pub fn load_database(dir: &Path) -> Result<Database, LoadError> {
    let schema_path = dir.join("schema.json");
    if !schema_path.is_file() {
        return Err(LoadError::MissingSchema(dir.to_path_buf()));
    }
    let text = std::fs::read_to_string(&schema_path).map_err(|source| LoadError::Io {
        path: schema_path.clone(),
        source,
    })?;
    let schema: SchemaFile = serde_json::from_str(&text)?;

    let mut seen = std::collections::BTreeSet::new();
    let mut tables = Vec::with_capacity(schema.tables.len());
    for decl in &schema.tables {
        if !seen.insert(decl.name.to_ascii_lowercase()) {
            return Err(LoadError::DuplicateTableName(decl.name.clone()));
        }
        let columns = decl
            .columns
            .iter()
            .map(|c| {
                ColumnType::parse(&c.ty)
                    .map(|ty| (c.name.clone(), ty))
                    .ok_or_else(|| LoadError::UnknownType {
                        table: decl.name.clone(),
                        column: c.name.clone(),
                        ty: c.ty.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = read_table(dir, decl, &columns)?;
        tables.push((
            TableSchema {
                name: decl.name.clone(),
                columns,
            },
            rows,
        ));
    }
    let foreign_keys = schema
        .foreign_keys
        .iter()
        .map(|fk| {
            let end =
                |s: &str| ColumnPath::parse(s).ok_or_else(|| LoadError::BadForeignKey(s.into()));
            Ok(ForeignKey {
                from: end(&fk.from)?,
                to: end(&fk.to)?,
            })
        })
        .collect::<Result<Vec<_>, LoadError>>()?;
    Database::new(schema.db_id, tables, foreign_keys).map_err(|e| match e {
        StoreError::DuplicateTableName(t) => LoadError::DuplicateTableName(t),
        other => LoadError::Store(other),
    })
}

/// Loads `<root>/<db_id>`.
pub fn load_from_root(root: &Path, db_id: &str) -> Result<Database, LoadError> {
    load_database(&root.join(db_id))
}
