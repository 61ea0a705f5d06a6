use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::dates::bin_value;
use super::{row_cmp, ExecError, ExecErrorKind, GroundingError, ResultColumn, ResultTable};
use crate::store::{ColumnType, Database, Table};
use crate::value::Value;
use crate::vql::{
    resolve_column, AggArg, AggFunc, Aggregate, BinInterval, ClauseSet, CmpOp, ColumnRef,
    Direction, Operand, OrderKey, Predicate, Resolution, Scope, SelectItem, SortExpr,
};

#[derive(Debug, Clone, Copy)]
struct Slot {
    /// Index into the flattened joined row.
    idx: usize,
    ty: ColumnType,
}

type Row = Vec<Value>;

struct Plan<'a> {
    c: &'a ClauseSet,
    tables: Vec<&'a Table>,
    offsets: Vec<usize>,
    slots: BTreeMap<&'a ColumnRef, (usize, Slot)>,
    bin: Option<(Slot, BinInterval)>,
}

impl<'a> Plan<'a> {
    fn build(c: &'a ClauseSet, db: &'a Database) -> Result<Self, ExecError> {
        let scope = Scope::new(c, db);
        let mut tables = Vec::with_capacity(scope.bindings.len());
        let mut offsets = Vec::with_capacity(scope.bindings.len());
        let mut width = 0;
        for b in &scope.bindings {
            let t = b.table.ok_or_else(|| {
                ExecError::ContractViolation(GroundingError::UnknownTable(b.table_ref.name.clone()))
            })?;
            offsets.push(width);
            width += t.columns.len();
            tables.push(t);
        }
        let mut slots = BTreeMap::new();
        let refs = c.select().iter().filter_map(|i| match i {
            SelectItem::Column(col) => Some(col),
            SelectItem::Aggregate(a) => agg_column(a),
            SelectItem::Star => None,
        });
        let mut all: Vec<&'a ColumnRef> = refs.collect();
        for j in c.joins() {
            all.push(&j.left);
            all.push(&j.right);
        }
        for p in [c.where_clause(), c.having()].into_iter().flatten() {
            all.extend(predicate_columns(p));
        }
        all.extend(c.group_by().unwrap_or_default());
        for k in c.order_by().unwrap_or_default() {
            match &k.expr {
                SortExpr::Column(col) => all.push(col),
                SortExpr::Aggregate(a) => all.extend(agg_column(a)),
            }
        }
        if let Some(b) = c.bin() {
            all.push(&b.column);
        }
        for col in all {
            if slots.contains_key(col) {
                continue;
            }
            match resolve_column(&scope, col) {
                Resolution::Bound {
                    binding, column, ..
                } => {
                    let ty = tables[binding].columns[column].declared_type;
                    slots.insert(
                        col,
                        (
                            binding,
                            Slot {
                                idx: offsets[binding] + column,
                                ty,
                            },
                        ),
                    );
                }
                Resolution::Unbound { key } => {
                    return Err(ExecError::ContractViolation(GroundingError::UnknownColumn(
                        key,
                    )))
                }
                Resolution::Ambiguous { name } => {
                    return Err(ExecError::ContractViolation(
                        GroundingError::AmbiguousColumn(name),
                    ))
                }
            }
        }
        let mut plan = Plan {
            c,
            tables,
            offsets,
            slots,
            bin: None,
        };
        if let Some(b) = c.bin() {
            let raw = plan.slot(&b.column);
            let ok = match raw.ty {
                ColumnType::Text => true,
                ColumnType::Integer => b.interval == BinInterval::Year,
                ColumnType::Real => false,
            };
            if !ok {
                return Err(ExecErrorKind::BinNeedsDate {
                    column: b.column.to_string(),
                    interval: b.interval.keyword(),
                    ty: raw.ty,
                }
                .into());
            }
            let ty = match b.interval {
                BinInterval::Weekday => ColumnType::Text,
                _ => ColumnType::Integer,
            };
            plan.bin = Some((Slot { idx: raw.idx, ty }, b.interval));
        }
        Ok(plan)
    }

    fn slot(&self, col: &ColumnRef) -> Slot {
        let (_, s) = self.slots[col];
        match self.bin {
            Some((b, _)) if b.idx == s.idx => b,
            _ => s,
        }
    }

    fn binding_of(&self, col: &ColumnRef) -> usize {
        self.slots[col].0
    }
}

fn agg_column(a: &Aggregate) -> Option<&ColumnRef> {
    match &a.arg {
        AggArg::Column(c) => Some(c),
        AggArg::Star => None,
    }
}

fn predicate_columns(p: &Predicate) -> Vec<&ColumnRef> {
    p.operands()
        .into_iter()
        .filter_map(|o| match o {
            Operand::Column(c) => Some(c),
            Operand::Aggregate(a) => agg_column(a),
            Operand::Literal(_) => None,
        })
        .collect()
}

fn aggregates_in(c: &ClauseSet) -> Vec<&Aggregate> {
    let mut out: Vec<&Aggregate> = c
        .select()
        .iter()
        .filter_map(|i| match i {
            SelectItem::Aggregate(a) => Some(a),
            _ => None,
        })
        .collect();
    if let Some(h) = c.having() {
        out.extend(h.operands().into_iter().filter_map(|o| match o {
            Operand::Aggregate(a) => Some(a),
            _ => None,
        }));
    }
    for k in c.order_by().unwrap_or_default() {
        if let SortExpr::Aggregate(a) = &k.expr {
            out.push(a);
        }
    }
    out
}

pub(super) fn run(c: &ClauseSet, db: &Database) -> Result<ResultTable, ExecError> {
    let plan = Plan::build(c, db)?;

    if c.where_clause().is_some_and(Predicate::has_aggregate) {
        return Err(ExecErrorKind::AggregateInWhere.into());
    }
    let aggregates = aggregates_in(c);
    for a in &aggregates {
        if let (AggFunc::Sum | AggFunc::Avg, Some(col)) = (a.func, agg_column(a)) {
            if plan.slot(col).ty == ColumnType::Text {
                return Err(ExecErrorKind::AggregateOverText {
                    func: a.func.keyword(),
                    column: col.to_string(),
                }
                .into());
            }
        }
    }

    let mut rows = join_rows(&plan);
    if let Some(p) = c.where_clause() {
        let mut kept = Vec::with_capacity(rows.len());
        for row in rows {
            let ctx = RowCtx {
                plan: &plan,
                row: &row,
            };
            if eval(p, &ctx)? == Some(true) {
                kept.push(row);
            }
        }
        rows = kept;
    }
    if let Some((slot, interval)) = plan.bin {
        for row in &mut rows {
            row[slot.idx] = bin_value(&row[slot.idx], interval);
        }
    }

    let aggregated = c.group_by().is_some() || !aggregates.is_empty();
    let mut columns = Vec::new();
    for item in c.select() {
        match item {
            SelectItem::Star => {
                for (t, table) in plan.tables.iter().enumerate() {
                    for (i, col) in table.columns.iter().enumerate() {
                        let idx = plan.offsets[t] + i;
                        let ty = match plan.bin {
                            Some((b, _)) if b.idx == idx => b.ty,
                            _ => col.declared_type,
                        };
                        columns.push(ResultColumn {
                            label: col.name.clone(),
                            ty,
                        });
                    }
                }
            }
            SelectItem::Column(col) => columns.push(ResultColumn {
                label: col.to_string(),
                ty: plan.slot(col).ty,
            }),
            SelectItem::Aggregate(a) => columns.push(ResultColumn {
                label: a.to_string(),
                ty: aggregate_type(&plan, a),
            }),
        }
    }

    let mut out: Vec<(Row, Row)> = if aggregated {
        grouped_output(&plan, &rows)?
    } else {
        rows.iter()
            .map(|row| {
                let proj = c
                    .select()
                    .iter()
                    .flat_map(|item| match item {
                        SelectItem::Star => row.clone(),
                        SelectItem::Column(col) => alloc::vec![row[plan.slot(col).idx].clone()],
                        SelectItem::Aggregate(_) => unreachable!("aggregates imply grouping"),
                    })
                    .collect();
                let keys = c
                    .order_by()
                    .unwrap_or_default()
                    .iter()
                    .map(|k| match &k.expr {
                        SortExpr::Column(col) => row[plan.slot(col).idx].clone(),
                        SortExpr::Aggregate(_) => unreachable!("aggregates imply grouping"),
                    })
                    .collect();
                (proj, keys)
            })
            .collect()
    };

    if let Some(keys) = c.order_by() {
        out.sort_by(|(_, a), (_, b)| compare_keys(keys, a, b));
    }
    if let Some(n) = c.limit() {
        out.truncate(usize::try_from(n).unwrap_or(usize::MAX));
    }
    Ok(ResultTable {
        columns,
        rows: out.into_iter().map(|(p, _)| p).collect(),
        ordered: c.order_by().is_some() || c.limit().is_some(),
    })
}

fn compare_keys(keys: &[OrderKey], a: &[Value], b: &[Value]) -> Ordering {
    for ((k, x), y) in keys.iter().zip(a).zip(b) {
        let o = x.total_cmp(y);
        let o = match k.direction {
            Direction::Asc => o,
            Direction::Desc => o.reverse(),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Inner joins as nested loops. Each ON condition is applied as soon as
/// both of its sides are in scope.
fn join_rows(plan: &Plan<'_>) -> Vec<Row> {
    let mut rows: Vec<Row> = plan.tables[0].rows.clone();
    let conds: Vec<(usize, Slot, Slot)> = plan
        .c
        .joins()
        .iter()
        .map(|j| {
            let stage = plan.binding_of(&j.left).max(plan.binding_of(&j.right));
            (stage, plan.slots[&j.left].1, plan.slots[&j.right].1)
        })
        .collect();
    let apply = |rows: Vec<Row>, stage: usize| -> Vec<Row> {
        rows.into_iter()
            .filter(|r| {
                conds
                    .iter()
                    .filter(|(s, _, _)| *s == stage)
                    .all(|(_, l, rt)| r[l.idx].sql_cmp(&r[rt.idx]) == Some(Ordering::Equal))
            })
            .collect()
    };
    rows = apply(rows, 0);
    for (stage, table) in plan.tables.iter().enumerate().skip(1) {
        let mut next = Vec::with_capacity(rows.len() * table.rows.len().max(1));
        for left in &rows {
            for right in &table.rows {
                let mut r = left.clone();
                r.extend(right.iter().cloned());
                next.push(r);
            }
        }
        rows = apply(next, stage);
    }
    rows
}

/// Grouping key with the total value order.
#[derive(Debug, Clone)]
struct Key(Row);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        row_cmp(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        row_cmp(&self.0, &other.0)
    }
}

fn grouped_output(plan: &Plan<'_>, rows: &[Row]) -> Result<Vec<(Row, Row)>, ExecError> {
    let c = plan.c;
    let mut key_slots: Vec<Slot> = c
        .group_by()
        .unwrap_or_default()
        .iter()
        .map(|col| plan.slot(col))
        .collect();
    if let Some((b, _)) = plan.bin {
        if !key_slots.iter().any(|s| s.idx == b.idx) {
            key_slots.push(b);
        }
    }
    let grouped: BTreeSet<usize> = key_slots.iter().map(|s| s.idx).collect();
    let check = |col: &ColumnRef| -> Result<(), ExecError> {
        if grouped.contains(&plan.slot(col).idx) {
            Ok(())
        } else {
            Err(ExecErrorKind::NonGroupedColumn(col.to_string()).into())
        }
    };
    for item in c.select() {
        match item {
            SelectItem::Star => return Err(ExecErrorKind::NonGroupedColumn("*".into()).into()),
            SelectItem::Column(col) => check(col)?,
            SelectItem::Aggregate(_) => {}
        }
    }
    if let Some(h) = c.having() {
        for o in h.operands() {
            if let Operand::Column(col) = o {
                check(col)?;
            }
        }
    }
    for k in c.order_by().unwrap_or_default() {
        if let SortExpr::Column(col) = &k.expr {
            check(col)?;
        }
    }

    let mut groups: Vec<Vec<&Row>> = Vec::new();
    if key_slots.is_empty() {
        groups.push(rows.iter().collect());
    } else {
        let mut index: BTreeMap<Key, usize> = BTreeMap::new();
        for row in rows {
            let key = Key(key_slots.iter().map(|s| row[s.idx].clone()).collect());
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(row);
        }
    }

    let mut out = Vec::with_capacity(groups.len());
    for members in &groups {
        let ctx = GroupCtx {
            plan,
            rows: members,
        };
        if let Some(h) = c.having() {
            if eval(h, &ctx)? != Some(true) {
                continue;
            }
        }
        let mut proj = Vec::with_capacity(c.select().len());
        for item in c.select() {
            proj.push(match item {
                SelectItem::Column(col) => ctx.column(col),
                SelectItem::Aggregate(a) => fold(plan, a, members)?,
                SelectItem::Star => unreachable!("rejected above"),
            });
        }
        let mut keys = Vec::new();
        for k in c.order_by().unwrap_or_default() {
            keys.push(match &k.expr {
                SortExpr::Column(col) => ctx.column(col),
                SortExpr::Aggregate(a) => fold(plan, a, members)?,
            });
        }
        out.push((proj, keys));
    }
    Ok(out)
}

fn aggregate_type(plan: &Plan<'_>, a: &Aggregate) -> ColumnType {
    match (a.func, agg_column(a)) {
        (AggFunc::Count, _) => ColumnType::Integer,
        (AggFunc::Avg, _) => ColumnType::Real,
        (_, Some(col)) => plan.slot(col).ty,
        (_, None) => ColumnType::Integer,
    }
}

/// Folds one aggregate over the rows of a group.
fn fold(plan: &Plan<'_>, a: &Aggregate, rows: &[&Row]) -> Result<Value, ExecError> {
    let Some(col) = agg_column(a) else {
        return Ok(Value::Integer(rows.len() as i64));
    };
    let slot = plan.slot(col);
    let mut vals: Vec<&Value> = rows
        .iter()
        .map(|r| &r[slot.idx])
        .filter(|v| !v.is_null())
        .collect();
    if a.distinct {
        vals.sort_by(|x, y| x.total_cmp(y));
        vals.dedup_by(|x, y| x.loose_eq(y));
    }
    if vals.is_empty() {
        return Ok(match a.func {
            AggFunc::Count => Value::Integer(0),
            _ => Value::Null,
        });
    }
    Ok(match a.func {
        AggFunc::Count => Value::Integer(vals.len() as i64),
        AggFunc::Sum => match slot.ty {
            ColumnType::Integer => {
                let mut total: i64 = 0;
                for v in &vals {
                    if let Value::Integer(i) = v {
                        total = total
                            .checked_add(*i)
                            .ok_or(ExecError::Execution(ExecErrorKind::IntegerOverflow))?;
                    }
                }
                Value::Integer(total)
            }
            _ => Value::Real(vals.iter().filter_map(|v| v.as_f64()).sum()),
        },
        AggFunc::Avg => {
            let sum: f64 = vals.iter().filter_map(|v| v.as_f64()).sum();
            Value::Real(sum / vals.len() as f64)
        }
        AggFunc::Min => vals
            .iter()
            .copied()
            .min_by(|x, y| x.total_cmp(y))
            .cloned()
            .unwrap_or(Value::Null),
        AggFunc::Max => vals
            .iter()
            .copied()
            .max_by(|x, y| x.total_cmp(y))
            .cloned()
            .unwrap_or(Value::Null),
    })
}

/// Supplies operand values to the predicate evaluator.
trait Ctx {
    fn operand(&self, o: &Operand) -> Result<Value, ExecError>;
}

struct RowCtx<'p, 'a> {
    plan: &'p Plan<'a>,
    row: &'p Row,
}

impl Ctx for RowCtx<'_, '_> {
    fn operand(&self, o: &Operand) -> Result<Value, ExecError> {
        match o {
            Operand::Column(col) => Ok(self.row[self.plan.slots[col].1.idx].clone()),
            Operand::Literal(l) => Ok(l.0.clone()),
            Operand::Aggregate(_) => Err(ExecErrorKind::AggregateInWhere.into()),
        }
    }
}

struct GroupCtx<'p, 'a> {
    plan: &'p Plan<'a>,
    rows: &'p [&'p Row],
}

impl GroupCtx<'_, '_> {
    /// Value of a grouped column: shared by every row of the group.
    fn column(&self, col: &ColumnRef) -> Value {
        self.rows
            .first()
            .map(|r| r[self.plan.slot(col).idx].clone())
            .unwrap_or(Value::Null)
    }
}

impl Ctx for GroupCtx<'_, '_> {
    fn operand(&self, o: &Operand) -> Result<Value, ExecError> {
        match o {
            Operand::Column(col) => Ok(self.column(col)),
            Operand::Literal(l) => Ok(l.0.clone()),
            Operand::Aggregate(a) => fold(self.plan, a, self.rows),
        }
    }
}

fn compare(op: CmpOp, o: Ordering) -> bool {
    match op {
        CmpOp::Eq => o == Ordering::Equal,
        CmpOp::Ne => o != Ordering::Equal,
        CmpOp::Lt => o == Ordering::Less,
        CmpOp::Le => o != Ordering::Greater,
        CmpOp::Gt => o == Ordering::Greater,
        CmpOp::Ge => o != Ordering::Less,
    }
}

fn negate_if(negated: bool, v: Option<bool>) -> Option<bool> {
    if negated {
        v.map(|b| !b)
    } else {
        v
    }
}

/// Three-valued predicate evaluation; `None` is unknown.
fn eval(p: &Predicate, ctx: &dyn Ctx) -> Result<Option<bool>, ExecError> {
    Ok(match p {
        Predicate::Compare { left, op, right } => {
            let (l, r) = (ctx.operand(left)?, ctx.operand(right)?);
            l.sql_cmp(&r).map(|o| compare(*op, o))
        }
        Predicate::InList {
            operand,
            negated,
            list,
        } => {
            let v = ctx.operand(operand)?;
            let mut unknown = false;
            let mut found = false;
            for lit in list {
                match v.sql_cmp(&lit.0) {
                    Some(Ordering::Equal) => found = true,
                    Some(_) => {}
                    None => unknown = true,
                }
            }
            let r = if found {
                Some(true)
            } else if unknown {
                None
            } else {
                Some(false)
            };
            negate_if(*negated, r)
        }
        Predicate::Like {
            operand,
            negated,
            pattern,
        } => {
            let r = match ctx.operand(operand)? {
                Value::Text(s) => Some(like(&s, pattern)),
                _ => None,
            };
            negate_if(*negated, r)
        }
        Predicate::Between {
            operand,
            negated,
            low,
            high,
        } => {
            let v = ctx.operand(operand)?;
            let ge = v.sql_cmp(&low.0).map(|o| o != Ordering::Less);
            let le = v.sql_cmp(&high.0).map(|o| o != Ordering::Greater);
            negate_if(*negated, and3([ge, le]))
        }
        Predicate::Not(inner) => eval(inner, ctx)?.map(|b| !b),
        Predicate::And(ps) => {
            let mut vs = Vec::with_capacity(ps.len());
            for p in ps {
                vs.push(eval(p, ctx)?);
            }
            and3(vs)
        }
        Predicate::Or(ps) => {
            let mut vs = Vec::with_capacity(ps.len());
            for p in ps {
                vs.push(eval(p, ctx)?);
            }
            if vs.contains(&Some(true)) {
                Some(true)
            } else if vs.contains(&None) {
                None
            } else {
                Some(false)
            }
        }
    })
}

fn and3(vs: impl IntoIterator<Item = Option<bool>>) -> Option<bool> {
    let mut unknown = false;
    for v in vs {
        match v {
            Some(false) => return Some(false),
            None => unknown = true,
            Some(true) => {}
        }
    }
    if unknown {
        None
    } else {
        Some(true)
    }
}

/// Case-sensitive LIKE: `%` matches any run, `_` one character.
pub(crate) fn like(s: &str, pattern: &str) -> bool {
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut si, mut pi) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while si < s.len() {
        if pi < p.len() && (p[pi] == '_' || (p[pi] != '%' && p[pi] == s[si])) {
            si += 1;
            pi += 1;
        } else if pi < p.len() && p[pi] == '%' {
            star = Some((pi, si));
            pi += 1;
        } else if let Some((sp, ss)) = star {
            pi = sp + 1;
            si = ss + 1;
            star = Some((sp, ss + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '%')
}
