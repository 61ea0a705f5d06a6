//! ISO date parsing for BIN BY.

use crate::value::Value;
use crate::vql::BinInterval;

const WEEKDAYS: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

fn is_leap(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i64, m: u32) -> u32 {
    match m {
        2 if is_leap(y) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

/// Parses the `YYYY-MM-DD` prefix of a string; trailing time is ignored.
pub(crate) fn parse_date(s: &str) -> Option<(i64, u32, u32)> {
    let b = s.as_bytes();
    if b.len() < 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    if b.len() > 10 && !matches!(b[10], b' ' | b'T') {
        return None;
    }
    let digits = |r: core::ops::Range<usize>| -> Option<u32> {
        let part = s.get(r)?;
        if !part.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        part.parse().ok()
    };
    let y = i64::from(digits(0..4)?);
    let m = digits(5..7)?;
    let d = digits(8..10)?;
    if !(1..=12).contains(&m) || d == 0 || d > days_in_month(y, m) {
        return None;
    }
    Some((y, m, d))
}

/// Days since 1970-01-01 (proleptic Gregorian).
fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = i64::from(m);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn weekday(y: i64, m: u32, d: u32) -> &'static str {
    // 1970-01-01 was a Thursday.
    WEEKDAYS[(days_from_civil(y, m, d) + 3).rem_euclid(7) as usize]
}

/// Bucket of one value; unparseable dates and Null map to Null.
pub(crate) fn bin_value(v: &Value, interval: BinInterval) -> Value {
    match v {
        Value::Integer(y) if interval == BinInterval::Year => Value::Integer(*y),
        Value::Text(s) => match parse_date(s) {
            Some((y, m, d)) => match interval {
                BinInterval::Year => Value::Integer(y),
                BinInterval::Month => Value::Integer(i64::from(m)),
                BinInterval::Day => Value::Integer(i64::from(d)),
                BinInterval::Weekday => Value::Text(weekday(y, m, d).into()),
            },
            None => Value::Null,
        },
        _ => Value::Null,
    }
}
