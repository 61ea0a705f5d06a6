use alloc::string::String;
use alloc::vec::Vec;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::ResultTable;
use crate::store::ColumnType;
use crate::text::ident_key;
use crate::value::Value;
use crate::vql::{ChartType, ClauseSet, SelectItem};

/// Why a result cannot be drawn as the requested chart.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderIssue {
    #[error("a chart needs exactly 2 columns, got {0}")]
    ColumnCount(usize),
    #[error("y column is {0}, not numeric")]
    NonNumericY(ColumnType),
    #[error("x column is {0}, not discrete")]
    XNotDiscrete(ColumnType),
    #[error("x column is {0}, not numeric")]
    NonNumericX(ColumnType),
    #[error("negative slice")]
    NegativeSlice,
    #[error("duplicate slice label")]
    DuplicateSlice,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NotRenderable {
    #[error("query has no VISUALIZE clause")]
    NoChart,
    #[error(transparent)]
    Issue(#[from] RenderIssue),
}

/// Renderability verdict for `c` given its result `r`. Queries without
/// VISUALIZE are vacuously renderable.
pub fn renderability(c: &ClauseSet, r: &ResultTable) -> Result<(), RenderIssue> {
    let Some(chart) = c.visualize() else {
        return Ok(());
    };
    let [x, y] = r.columns.as_slice() else {
        return Err(RenderIssue::ColumnCount(r.columns.len()));
    };
    if !y.ty.is_numeric() {
        return Err(RenderIssue::NonNumericY(y.ty));
    }
    match chart {
        ChartType::Bar | ChartType::Pie => {
            if x.ty == ColumnType::Real {
                return Err(RenderIssue::XNotDiscrete(x.ty));
            }
        }
        ChartType::Line => {}
        ChartType::Scatter => {
            if !x.ty.is_numeric() {
                return Err(RenderIssue::NonNumericX(x.ty));
            }
        }
    }
    if chart == ChartType::Pie {
        if r.rows
            .iter()
            .any(|row| row[1].as_f64().is_some_and(|v| v < 0.0))
        {
            return Err(RenderIssue::NegativeSlice);
        }
        let mut labels: Vec<&Value> = r.rows.iter().map(|row| &row[0]).collect();
        labels.sort_by(|a, b| a.total_cmp(b));
        if labels.windows(2).any(|w| w[0].loose_eq(w[1])) {
            return Err(RenderIssue::DuplicateSlice);
        }
    }
    Ok(())
}

pub fn is_renderable(c: &ClauseSet, r: &ResultTable) -> bool {
    renderability(c, r).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldType {
    Nominal,
    Quantitative,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub field: String,
    #[serde(rename = "type")]
    pub ty: FieldType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Encoding {
    pub x: Channel,
    pub y: Channel,
}

/// One data row keyed by field label, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InlineData {
    pub values: Vec<Record>,
}

/// Declarative chart specification with inline data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartDocument {
    pub mark: ChartType,
    pub encoding: Encoding,
    pub data: InlineData,
}

fn is_bin_target(c: &ClauseSet, item: &SelectItem) -> bool {
    match (c.bin(), item) {
        (Some(b), SelectItem::Column(col)) => ident_key(&b.column.name) == ident_key(&col.name),
        _ => false,
    }
}

pub fn emit_chart_spec(c: &ClauseSet, r: &ResultTable) -> Result<ChartDocument, NotRenderable> {
    let mark = c.visualize().ok_or(NotRenderable::NoChart)?;
    renderability(c, r)?;
    let (x, y) = (&r.columns[0], &r.columns[1]);
    let x_type = match mark {
        ChartType::Bar | ChartType::Pie => FieldType::Nominal,
        ChartType::Line | ChartType::Scatter => {
            if c.select().first().is_some_and(|i| is_bin_target(c, i)) {
                FieldType::Temporal
            } else if x.ty.is_numeric() {
                FieldType::Quantitative
            } else {
                FieldType::Nominal
            }
        }
    };
    let values = r
        .rows
        .iter()
        .map(|row| {
            Record(alloc::vec![
                (x.label.clone(), row[0].clone()),
                (y.label.clone(), row[1].clone()),
            ])
        })
        .collect();
    Ok(ChartDocument {
        mark,
        encoding: Encoding {
            x: Channel {
                field: x.label.clone(),
                ty: x_type,
            },
            y: Channel {
                field: y.label.clone(),
                ty: FieldType::Quantitative,
            },
        },
        data: InlineData { values },
    })
}
