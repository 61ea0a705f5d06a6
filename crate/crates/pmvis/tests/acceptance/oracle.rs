//! Brute-force reference evaluator. It reads the parsed clause set and the
//! raw tables and shares no evaluation code with the engine: joins are a
//! full cross product filtered afterwards, groups are found by linear scan,
//! sorting is an insertion sort, and dates go through chrono.

use std::cmp::Ordering;

use chrono::{Datelike, NaiveDate, Weekday};
use pmvis_core::store::ColumnType;
use pmvis_core::vql::{
    AggArg, AggFunc, Aggregate, BinInterval, CmpOp, ColumnRef, Direction, Operand, Predicate,
    SelectItem, SortExpr,
};
use pmvis_core::{ClauseSet, Database, Table, Value};

#[derive(Debug, Clone)]
pub struct OracleTable {
    pub types: Vec<ColumnType>,
    pub rows: Vec<Vec<Value>>,
    pub ordered: bool,
}

struct Binding<'a> {
    name: String,
    alias: Option<String>,
    table: &'a Table,
}

struct Query<'a> {
    bindings: Vec<Binding<'a>>,
    offsets: Vec<usize>,
    /// Flat index of the binned column and its interval.
    bin: Option<(usize, BinInterval)>,
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

impl<'a> Query<'a> {
    fn new(cs: &'a ClauseSet, db: &'a Database) -> Result<Self, String> {
        let mut refs = vec![cs.from().clone()];
        refs.extend(cs.joins().iter().map(|j| j.table.clone()));
        let mut bindings = Vec::new();
        let mut offsets = Vec::new();
        let mut width = 0;
        for r in refs {
            let table = db
                .tables()
                .iter()
                .find(|t| lower(&t.name) == lower(&r.name))
                .ok_or_else(|| format!("unknown table {}", r.name))?;
            offsets.push(width);
            width += table.columns.len();
            bindings.push(Binding {
                name: r.name,
                alias: r.alias,
                table,
            });
        }
        let mut q = Query {
            bindings,
            offsets,
            bin: None,
        };
        if let Some(b) = cs.bin() {
            q.bin = Some((q.index(&b.column)?, b.interval));
        }
        Ok(q)
    }

    /// Flat row index of a column reference.
    fn index(&self, col: &ColumnRef) -> Result<usize, String> {
        let name = lower(&col.name);
        let mut hits = Vec::new();
        for (b, binding) in self.bindings.iter().enumerate() {
            if let Some(q) = &col.qualifier {
                let q = lower(q);
                let by_alias = binding.alias.as_ref().is_some_and(|a| lower(a) == q);
                if !by_alias && lower(&binding.name) != q {
                    continue;
                }
            }
            if let Some(i) = binding
                .table
                .columns
                .iter()
                .position(|c| lower(&c.name) == name)
            {
                hits.push(self.offsets[b] + i);
                if col.qualifier.is_some() {
                    break;
                }
            }
        }
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(format!("unbound column {col}")),
            _ => Err(format!("ambiguous column {col}")),
        }
    }

    fn declared_type(&self, idx: usize) -> ColumnType {
        let b = self.offsets.iter().rposition(|o| *o <= idx).unwrap_or(0);
        let base = self.bindings[b].table.columns[idx - self.offsets[b]].declared_type;
        match self.bin {
            Some((i, BinInterval::Weekday)) if i == idx => ColumnType::Text,
            Some((i, _)) if i == idx => ColumnType::Integer,
            _ => base,
        }
    }

    fn width(&self) -> usize {
        self.bindings.iter().map(|b| b.table.columns.len()).sum()
    }
}

fn is_num(v: &Value) -> bool {
    matches!(v, Value::Integer(_) | Value::Real(_))
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Integer(i) => *i as f64,
        Value::Real(r) => *r,
        _ => f64::NAN,
    }
}

/// SQL comparison: unknown for Null or mixed text/number operands.
fn sql_order(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Integer(x), Value::Integer(y)) => Some(x.cmp(y)),
        (Value::Text(x), Value::Text(y)) => Some(x.as_str().cmp(y.as_str())),
        (x, y) if is_num(x) && is_num(y) => num(x).partial_cmp(&num(y)),
        _ => None,
    }
}

/// Sort order: Null, then numbers, then text.
pub fn sort_order(a: &Value, b: &Value) -> Ordering {
    let class = |v: &Value| match v {
        Value::Null => 0,
        Value::Integer(_) | Value::Real(_) => 1,
        Value::Text(_) => 2,
    };
    match class(a).cmp(&class(b)) {
        Ordering::Equal => sql_order(a, b).unwrap_or(Ordering::Equal),
        o => o,
    }
}

pub fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (x, y) if is_num(x) && is_num(y) => num(x) == num(y),
        (Value::Text(x), Value::Text(y)) => x == y,
        _ => false,
    }
}

fn bin(v: &Value, interval: BinInterval) -> Value {
    let date = match v {
        Value::Integer(y) if interval == BinInterval::Year => return Value::Integer(*y),
        Value::Text(s) => {
            let head = match s.as_bytes().get(10) {
                None => s.as_str(),
                Some(b' ' | b'T') => &s[..10],
                Some(_) => return Value::Null,
            };
            if head.len() != 10 {
                return Value::Null;
            }
            match NaiveDate::parse_from_str(head, "%Y-%m-%d") {
                Ok(d) => d,
                Err(_) => return Value::Null,
            }
        }
        _ => return Value::Null,
    };
    match interval {
        BinInterval::Year => Value::Integer(i64::from(date.year())),
        BinInterval::Month => Value::Integer(i64::from(date.month())),
        BinInterval::Day => Value::Integer(i64::from(date.day())),
        BinInterval::Weekday => Value::Text(
            match date.weekday() {
                Weekday::Mon => "Monday",
                Weekday::Tue => "Tuesday",
                Weekday::Wed => "Wednesday",
                Weekday::Thu => "Thursday",
                Weekday::Fri => "Friday",
                Weekday::Sat => "Saturday",
                Weekday::Sun => "Sunday",
            }
            .into(),
        ),
    }
}

fn like(s: &str, pattern: &str) -> bool {
    fn go(s: &[char], p: &[char]) -> bool {
        match p.split_first() {
            None => s.is_empty(),
            Some(('%', rest)) => (0..=s.len()).any(|k| go(&s[k..], rest)),
            Some(('_', rest)) => !s.is_empty() && go(&s[1..], rest),
            Some((c, rest)) => s.first() == Some(c) && go(&s[1..], rest),
        }
    }
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    go(&s, &p)
}

enum Scope<'r> {
    Row(&'r [Value]),
    Group(&'r [&'r Vec<Value>]),
}

struct Eval<'q, 'a> {
    q: &'q Query<'a>,
}

impl Eval<'_, '_> {
    fn column(&self, scope: &Scope<'_>, col: &ColumnRef, binned: bool) -> Result<Value, String> {
        let i = self.q.index(col)?;
        let row: &[Value] = match scope {
            Scope::Row(r) => r,
            Scope::Group(rows) => match rows.first() {
                Some(r) => r,
                None => return Ok(Value::Null),
            },
        };
        Ok(match self.q.bin {
            Some((b, interval)) if binned && b == i => bin(&row[i], interval),
            _ => row[i].clone(),
        })
    }

    fn aggregate(&self, scope: &Scope<'_>, a: &Aggregate) -> Result<Value, String> {
        let Scope::Group(rows) = scope else {
            return Err("aggregate outside a group".into());
        };
        let col = match &a.arg {
            AggArg::Star => return Ok(Value::Integer(rows.len() as i64)),
            AggArg::Column(c) => c,
        };
        let mut values = Vec::new();
        for r in rows.iter() {
            let v = self.column(&Scope::Row(r), col, true)?;
            if !matches!(v, Value::Null) {
                values.push(v);
            }
        }
        if a.distinct {
            let mut unique: Vec<Value> = Vec::new();
            for v in values {
                if !unique.iter().any(|u| same_value(u, &v)) {
                    unique.push(v);
                }
            }
            unique.sort_by(sort_order);
            values = unique;
        }
        if values.is_empty() {
            return Ok(match a.func {
                AggFunc::Count => Value::Integer(0),
                _ => Value::Null,
            });
        }
        Ok(match a.func {
            AggFunc::Count => Value::Integer(values.len() as i64),
            AggFunc::Sum => {
                if values.iter().all(|v| matches!(v, Value::Integer(_))) {
                    let mut total = 0i64;
                    for v in &values {
                        if let Value::Integer(i) = v {
                            total = total.checked_add(*i).ok_or("overflow")?;
                        }
                    }
                    Value::Integer(total)
                } else {
                    let mut total = 0.0;
                    for v in &values {
                        total += num(v);
                    }
                    Value::Real(total)
                }
            }
            AggFunc::Avg => {
                let mut total = 0.0;
                for v in &values {
                    total += num(v);
                }
                Value::Real(total / values.len() as f64)
            }
            AggFunc::Min | AggFunc::Max => {
                let mut best = values[0].clone();
                for v in &values[1..] {
                    let o = sort_order(v, &best);
                    let better = if a.func == AggFunc::Min {
                        o == Ordering::Less
                    } else {
                        o == Ordering::Greater
                    };
                    if better {
                        best = v.clone();
                    }
                }
                best
            }
        })
    }

    fn operand(&self, scope: &Scope<'_>, o: &Operand, binned: bool) -> Result<Value, String> {
        match o {
            Operand::Column(c) => self.column(scope, c, binned),
            Operand::Literal(l) => Ok(l.0.clone()),
            Operand::Aggregate(a) => self.aggregate(scope, a),
        }
    }

    /// Three-valued truth: Some(true), Some(false) or None for unknown.
    fn truth(
        &self,
        scope: &Scope<'_>,
        p: &Predicate,
        binned: bool,
    ) -> Result<Option<bool>, String> {
        let flip = |neg: bool, v: Option<bool>| if neg { v.map(|b| !b) } else { v };
        Ok(match p {
            Predicate::Compare { left, op, right } => {
                let l = self.operand(scope, left, binned)?;
                let r = self.operand(scope, right, binned)?;
                sql_order(&l, &r).map(|o| match op {
                    CmpOp::Eq => o.is_eq(),
                    CmpOp::Ne => o.is_ne(),
                    CmpOp::Lt => o.is_lt(),
                    CmpOp::Le => o.is_le(),
                    CmpOp::Gt => o.is_gt(),
                    CmpOp::Ge => o.is_ge(),
                })
            }
            Predicate::InList {
                operand,
                negated,
                list,
            } => {
                let v = self.operand(scope, operand, binned)?;
                let outcomes: Vec<Option<Ordering>> =
                    list.iter().map(|l| sql_order(&v, &l.0)).collect();
                let r = if outcomes.contains(&Some(Ordering::Equal)) {
                    Some(true)
                } else if outcomes.contains(&None) {
                    None
                } else {
                    Some(false)
                };
                flip(*negated, r)
            }
            Predicate::Like {
                operand,
                negated,
                pattern,
            } => {
                let r = match self.operand(scope, operand, binned)? {
                    Value::Text(s) => Some(like(&s, pattern)),
                    _ => None,
                };
                flip(*negated, r)
            }
            Predicate::Between {
                operand,
                negated,
                low,
                high,
            } => {
                let v = self.operand(scope, operand, binned)?;
                let lo = sql_order(&v, &low.0).map(Ordering::is_ge);
                let hi = sql_order(&v, &high.0).map(Ordering::is_le);
                let r = match (lo, hi) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                };
                flip(*negated, r)
            }
            Predicate::Not(inner) => self.truth(scope, inner, binned)?.map(|b| !b),
            Predicate::And(ps) => {
                let mut acc = Some(true);
                for p in ps {
                    acc = match (acc, self.truth(scope, p, binned)?) {
                        (Some(false), _) | (_, Some(false)) => Some(false),
                        (Some(true), Some(true)) => Some(true),
                        _ => None,
                    };
                }
                acc
            }
            Predicate::Or(ps) => {
                let mut acc = Some(false);
                for p in ps {
                    acc = match (acc, self.truth(scope, p, binned)?) {
                        (Some(true), _) | (_, Some(true)) => Some(true),
                        (Some(false), Some(false)) => Some(false),
                        _ => None,
                    };
                }
                acc
            }
        })
    }
}

fn insertion_sort(items: &mut [(Vec<Value>, Vec<Value>)], directions: &[Direction]) {
    let before = |a: &[Value], b: &[Value]| -> bool {
        for ((x, y), d) in a.iter().zip(b).zip(directions) {
            let o = sort_order(x, y);
            let o = if *d == Direction::Desc {
                o.reverse()
            } else {
                o
            };
            if o != Ordering::Equal {
                return o == Ordering::Less;
            }
        }
        false
    };
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && before(&items[j].1, &items[j - 1].1) {
            items.swap(j, j - 1);
            j -= 1;
        }
    }
}

fn uses_aggregate(cs: &ClauseSet) -> bool {
    cs.select()
        .iter()
        .any(|i| matches!(i, SelectItem::Aggregate(_)))
        || cs.having().is_some()
        || cs
            .order_by()
            .unwrap_or_default()
            .iter()
            .any(|k| matches!(k.expr, SortExpr::Aggregate(_)))
}

/// Evaluates the query part of `cs` against `db`.
pub fn evaluate(cs: &ClauseSet, db: &Database) -> Result<OracleTable, String> {
    let q = Query::new(cs, db)?;
    let ev = Eval { q: &q };

    // Full cross product in binding order, then every ON condition.
    let mut product: Vec<Vec<Value>> = vec![Vec::with_capacity(q.width())];
    for b in &q.bindings {
        let mut next = Vec::new();
        for prefix in &product {
            for row in &b.table.rows {
                let mut r = prefix.clone();
                r.extend(row.iter().cloned());
                next.push(r);
            }
        }
        product = next;
    }
    let mut rows = Vec::new();
    for r in product {
        let mut keep = true;
        for j in cs.joins() {
            let (l, rt) = (q.index(&j.left)?, q.index(&j.right)?);
            keep &= sql_order(&r[l], &r[rt]) == Some(Ordering::Equal);
        }
        if keep {
            rows.push(r);
        }
    }
    if let Some(p) = cs.where_clause() {
        let mut kept = Vec::new();
        for r in rows {
            if ev.truth(&Scope::Row(&r), p, false)? == Some(true) {
                kept.push(r);
            }
        }
        rows = kept;
    }

    let mut types = Vec::new();
    for item in cs.select() {
        match item {
            SelectItem::Star => types.extend((0..q.width()).map(|i| q.declared_type(i))),
            SelectItem::Column(c) => types.push(q.declared_type(q.index(c)?)),
            SelectItem::Aggregate(a) => types.push(match (a.func, &a.arg) {
                (AggFunc::Count, _) | (_, AggArg::Star) => ColumnType::Integer,
                (AggFunc::Avg, _) => ColumnType::Real,
                (_, AggArg::Column(c)) => q.declared_type(q.index(c)?),
            }),
        }
    }
    let directions: Vec<Direction> = cs
        .order_by()
        .unwrap_or_default()
        .iter()
        .map(|k| k.direction)
        .collect();

    let mut out: Vec<(Vec<Value>, Vec<Value>)> = Vec::new();
    if cs.group_by().is_some() || uses_aggregate(cs) {
        let mut keys: Vec<usize> = Vec::new();
        for c in cs.group_by().unwrap_or_default() {
            keys.push(q.index(c)?);
        }
        if let Some((b, _)) = q.bin {
            if !keys.contains(&b) {
                keys.push(b);
            }
        }
        let key_of = |r: &Vec<Value>| -> Vec<Value> {
            keys.iter()
                .map(|i| match q.bin {
                    Some((b, interval)) if b == *i => bin(&r[*i], interval),
                    _ => r[*i].clone(),
                })
                .collect()
        };
        let mut groups: Vec<(Vec<Value>, Vec<&Vec<Value>>)> = Vec::new();
        if keys.is_empty() {
            groups.push((Vec::new(), rows.iter().collect()));
        } else {
            for r in &rows {
                let k = key_of(r);
                match groups
                    .iter_mut()
                    .find(|(gk, _)| gk.iter().zip(&k).all(|(x, y)| same_value(x, y)))
                {
                    Some((_, members)) => members.push(r),
                    None => groups.push((k, vec![r])),
                }
            }
        }
        let grouped = |c: &ColumnRef| -> Result<(), String> {
            if keys.contains(&q.index(c)?) {
                Ok(())
            } else {
                Err(format!("{c} is not grouped"))
            }
        };
        for (_, members) in &groups {
            let scope = Scope::Group(members);
            if let Some(h) = cs.having() {
                if ev.truth(&scope, h, true)? != Some(true) {
                    continue;
                }
            }
            let mut proj = Vec::new();
            for item in cs.select() {
                proj.push(match item {
                    SelectItem::Star => return Err("* in a grouped query".into()),
                    SelectItem::Column(c) => {
                        grouped(c)?;
                        ev.column(&scope, c, true)?
                    }
                    SelectItem::Aggregate(a) => ev.aggregate(&scope, a)?,
                });
            }
            let mut sort = Vec::new();
            for k in cs.order_by().unwrap_or_default() {
                sort.push(match &k.expr {
                    SortExpr::Column(c) => {
                        grouped(c)?;
                        ev.column(&scope, c, true)?
                    }
                    SortExpr::Aggregate(a) => ev.aggregate(&scope, a)?,
                });
            }
            out.push((proj, sort));
        }
    } else {
        for r in &rows {
            let scope = Scope::Row(r);
            let mut proj = Vec::new();
            for item in cs.select() {
                match item {
                    SelectItem::Star => {
                        for (i, v) in r.iter().enumerate() {
                            proj.push(match q.bin {
                                Some((b, interval)) if b == i => bin(v, interval),
                                _ => v.clone(),
                            });
                        }
                    }
                    SelectItem::Column(c) => proj.push(ev.column(&scope, c, true)?),
                    SelectItem::Aggregate(_) => unreachable!("handled by the grouped branch"),
                }
            }
            let mut sort = Vec::new();
            for k in cs.order_by().unwrap_or_default() {
                match &k.expr {
                    SortExpr::Column(c) => sort.push(ev.column(&scope, c, true)?),
                    SortExpr::Aggregate(_) => unreachable!("handled by the grouped branch"),
                }
            }
            out.push((proj, sort));
        }
    }
    if cs.order_by().is_some() {
        insertion_sort(&mut out, &directions);
    }
    if let Some(n) = cs.limit() {
        out.truncate(n as usize);
    }
    Ok(OracleTable {
        types,
        rows: out.into_iter().map(|(p, _)| p).collect(),
        ordered: cs.order_by().is_some() || cs.limit().is_some(),
    })
}

/// Row-set agreement: sequences when ordered, multisets otherwise.
pub fn same_rows(a: &[Vec<Value>], b: &[Vec<Value>], ordered: bool) -> bool {
    let row_eq = |x: &Vec<Value>, y: &Vec<Value>| {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_value(p, q))
    };
    if a.len() != b.len() {
        return false;
    }
    if ordered {
        return a.iter().zip(b).all(|(x, y)| row_eq(x, y));
    }
    let mut used = vec![false; b.len()];
    a.iter().all(
        |x| match (0..b.len()).find(|&j| !used[j] && row_eq(x, &b[j])) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        },
    )
}

fn predicate_columns<'p>(p: &'p Predicate, out: &mut Vec<&'p ColumnRef>) {
    let operand = |o: &'p Operand, out: &mut Vec<&'p ColumnRef>| match o {
        Operand::Column(c) => out.push(c),
        Operand::Aggregate(Aggregate {
            arg: AggArg::Column(c),
            ..
        }) => out.push(c),
        _ => {}
    };
    match p {
        Predicate::Compare { left, right, .. } => {
            operand(left, out);
            operand(right, out);
        }
        Predicate::InList { operand: o, .. }
        | Predicate::Like { operand: o, .. }
        | Predicate::Between { operand: o, .. } => operand(o, out),
        Predicate::Not(inner) => predicate_columns(inner, out),
        Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|q| predicate_columns(q, out)),
    }
}

/// Every column reference in every clause.
pub fn column_refs(cs: &ClauseSet) -> Vec<&ColumnRef> {
    let mut out = Vec::new();
    for item in cs.select() {
        match item {
            SelectItem::Column(c) => out.push(c),
            SelectItem::Aggregate(Aggregate {
                arg: AggArg::Column(c),
                ..
            }) => out.push(c),
            _ => {}
        }
    }
    for j in cs.joins() {
        out.push(&j.left);
        out.push(&j.right);
    }
    if let Some(p) = cs.where_clause() {
        predicate_columns(p, &mut out);
    }
    out.extend(cs.group_by().unwrap_or_default());
    if let Some(p) = cs.having() {
        predicate_columns(p, &mut out);
    }
    for k in cs.order_by().unwrap_or_default() {
        match &k.expr {
            SortExpr::Column(c) => out.push(c),
            SortExpr::Aggregate(Aggregate {
                arg: AggArg::Column(c),
                ..
            }) => out.push(c),
            _ => {}
        }
    }
    if let Some(b) = cs.bin() {
        out.push(&b.column);
    }
    out
}

/// Every referenced column resolves to exactly one FROM/JOIN binding.
pub fn check_bound(cs: &ClauseSet, db: &Database) -> Result<(), String> {
    let q = Query::new(cs, db)?;
    for c in column_refs(cs) {
        q.index(c)?;
    }
    Ok(())
}
