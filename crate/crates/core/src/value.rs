//! Cell values and their comparison rules.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use serde::{Serialize, Serializer};

/// A single cell of a table or result row.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Integer(_) | Value::Real(_) => 1,
            Value::Text(_) => 2,
        }
    }

    /// Total order used for sorting and grouping.
    ///
    /// Null sorts first, numbers compare numerically (Integer is widened to
    /// Real), text compares by code point, and numbers sort before text.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (a, b) if a.rank() == 1 && b.rank() == 1 => {
                let (x, y) = (a.as_f64().unwrap_or(0.0), b.as_f64().unwrap_or(0.0));
                x.total_cmp(&y)
            }
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }

    /// Equality after numeric normalization (`Integer(5) == Real(5.0)`).
    pub fn loose_eq(&self, other: &Value) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }

    /// SQL comparison: `None` when either side is Null or the types are
    /// not comparable (number against text).
    pub fn sql_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Null, _) | (_, Value::Null) => None,
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Text(_), _) | (_, Value::Text(_)) => None,
            (a, b) => Some(a.total_cmp(b)),
        }
    }

    /// Text rendering used for CSV output and chart data.
    pub fn render(&self) -> String {
        match self {
            Value::Null => String::new(),
            other => other.to_string(),
        }
    }
}

/// Formats a float so that it re-lexes as a real literal.
pub(crate) fn format_real(r: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_finite() && r == (r as i64) as f64 && !(r == 0.0 && r.is_sign_negative()) {
        write!(f, "{}.0", r as i64)
    } else {
        let s = r.to_string();
        if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
            f.write_str(&s)
        } else {
            write!(f, "{s}.0")
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(r) => format_real(*r, f),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Null => serializer.serialize_none(),
            Value::Integer(i) => serializer.serialize_i64(*i),
            Value::Real(r) => serializer.serialize_f64(*r),
            Value::Text(s) => serializer.serialize_str(s),
        }
    }
}
