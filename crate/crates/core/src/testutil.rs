//! Small in-memory fixtures for unit tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::store::{ColumnPath, ColumnType, Database, ForeignKey, TableSchema};
use crate::value::Value;

fn schema(name: &str, cols: &[(&str, ColumnType)]) -> TableSchema {
    TableSchema {
        name: name.into(),
        columns: cols.iter().map(|(c, t)| ((*c).into(), *t)).collect(),
    }
}

fn t(s: &str) -> Value {
    Value::Text(String::from(s))
}

fn i(n: i64) -> Value {
    Value::Integer(n)
}

pub fn building_rows() -> Vec<(&'static str, i64)> {
    vec![
        ("701 North Franklin Street", 22),
        ("315 John F. Kennedy Boulevard", 10),
        ("905 Franklin Street", 17),
        ("655 North Franklin Street", 12),
        ("400 North Tampa Street", 36),
    ]
}

/// `building(Street_address text, Floors integer)` with five rows.
pub fn building_db() -> Database {
    let rows = building_rows()
        .into_iter()
        .map(|(a, f)| vec![t(a), i(f)])
        .collect();
    Database::new(
        "protein_institute",
        vec![(
            schema(
                "building",
                &[
                    ("Street_address", ColumnType::Text),
                    ("Floors", ColumnType::Integer),
                ],
            ),
            rows,
        )],
        vec![],
    )
    .unwrap()
}

/// Two tables sharing an `id` column, plus a third for multi-joins.
pub fn school_db() -> Database {
    let students = vec![
        vec![i(1), t("Ann"), i(20), i(10), Value::Real(3.5)],
        vec![i(2), t("Bob"), i(22), i(20), Value::Real(2.9)],
        vec![i(3), t("Cid"), i(20), i(10), Value::Null],
        vec![i(4), t("Dee"), Value::Null, i(30), Value::Real(3.9)],
    ];
    let depts = vec![
        vec![i(10), t("Math"), i(100)],
        vec![i(20), t("Art"), i(50)],
        vec![i(30), t("Law"), i(-20)],
    ];
    let clubs = vec![vec![i(1), i(1), t("chess")], vec![i(2), i(3), t("go")]];
    Database::new(
        "school",
        vec![
            (
                schema(
                    "student",
                    &[
                        ("id", ColumnType::Integer),
                        ("name", ColumnType::Text),
                        ("age", ColumnType::Integer),
                        ("dept_id", ColumnType::Integer),
                        ("gpa", ColumnType::Real),
                    ],
                ),
                students,
            ),
            (
                schema(
                    "dept",
                    &[
                        ("id", ColumnType::Integer),
                        ("dept_name", ColumnType::Text),
                        ("budget", ColumnType::Integer),
                    ],
                ),
                depts,
            ),
            (
                schema(
                    "club",
                    &[
                        ("id", ColumnType::Integer),
                        ("student_id", ColumnType::Integer),
                        ("club_name", ColumnType::Text),
                    ],
                ),
                clubs,
            ),
            (schema("empty_t", &[("x", ColumnType::Integer)]), vec![]),
        ],
        vec![ForeignKey {
            from: ColumnPath::parse("student.dept_id").unwrap(),
            to: ColumnPath::parse("dept.id").unwrap(),
        }],
    )
    .unwrap()
}

pub const TARGET: &str =
    "Visualize BAR SELECT Street_address , Floors FROM building ORDER BY floors";
pub const TARGET_CANONICAL: &str =
    "VISUALIZE BAR SELECT Street_address, Floors FROM building ORDER BY Floors ASC";
