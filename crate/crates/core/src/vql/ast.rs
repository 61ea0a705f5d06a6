//! Clause-level syntax tree and its canonical text form.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Display};

use serde::Serialize;

use crate::text::ident_key;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChartType {
    Bar,
    Pie,
    Line,
    Scatter,
}

impl ChartType {
    pub const ALL: [ChartType; 4] = [
        ChartType::Bar,
        ChartType::Pie,
        ChartType::Line,
        ChartType::Scatter,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ChartType::Bar => "BAR",
            ChartType::Pie => "PIE",
            ChartType::Line => "LINE",
            ChartType::Scatter => "SCATTER",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        ChartType::ALL
            .into_iter()
            .find(|c| c.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClauseKind {
    Visualize,
    Select,
    From,
    Join,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    BinBy,
}

impl ClauseKind {
    pub fn label(self) -> &'static str {
        match self {
            ClauseKind::Visualize => "VISUALIZE",
            ClauseKind::Select => "SELECT",
            ClauseKind::From => "FROM",
            ClauseKind::Join => "JOIN",
            ClauseKind::Where => "WHERE",
            ClauseKind::GroupBy => "GROUP BY",
            ClauseKind::Having => "HAVING",
            ClauseKind::OrderBy => "ORDER BY",
            ClauseKind::Limit => "LIMIT",
            ClauseKind::BinBy => "BIN BY",
        }
    }
}

/// A column reference with an optional table or alias qualifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
}

impl ColumnRef {
    pub fn new(name: impl Into<String>) -> Self {
        ColumnRef {
            qualifier: None,
            name: name.into(),
        }
    }

    pub fn qualified(qualifier: impl Into<String>, name: impl Into<String>) -> Self {
        ColumnRef {
            qualifier: Some(qualifier.into()),
            name: name.into(),
        }
    }

    /// Case-insensitive identity of the reference.
    pub fn key(&self) -> (Option<String>, String) {
        (
            self.qualifier.as_deref().map(ident_key),
            ident_key(&self.name),
        )
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn keyword(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            AggFunc::Count,
            AggFunc::Sum,
            AggFunc::Avg,
            AggFunc::Min,
            AggFunc::Max,
        ]
        .into_iter()
        .find(|a| a.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AggArg {
    Star,
    Column(ColumnRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Aggregate {
    pub func: AggFunc,
    pub distinct: bool,
    pub arg: AggArg,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.func.keyword())?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.arg {
            AggArg::Star => f.write_str("*")?,
            AggArg::Column(c) => write!(f, "{c}")?,
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SelectItem {
    Star,
    Column(ColumnRef),
    Aggregate(Aggregate),
}

impl SelectItem {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, SelectItem::Aggregate(_))
    }
}

impl fmt::Display for SelectItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectItem::Star => f.write_str("*"),
            SelectItem::Column(c) => c.fmt(f),
            SelectItem::Aggregate(a) => a.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TableRef {
    pub name: String,
    pub alias: Option<String>,
}

impl TableRef {
    pub fn new(name: impl Into<String>) -> Self {
        TableRef {
            name: name.into(),
            alias: None,
        }
    }
}

impl fmt::Display for TableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(a) = &self.alias {
            write!(f, " AS {a}")?;
        }
        Ok(())
    }
}

/// `JOIN table [AS alias] ON left = right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct JoinClause {
    pub table: TableRef,
    pub left: ColumnRef,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Literal wrapper giving [`Value`] a total equality so trees can be
/// compared and hashed structurally.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Literal(pub Value);

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        }
    }
}

impl Eq for Literal {}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        let tag = |v: &Value| match v {
            Value::Null => 0u8,
            Value::Integer(_) => 1,
            Value::Real(_) => 2,
            Value::Text(_) => 3,
        };
        self.0
            .total_cmp(&other.0)
            .then_with(|| tag(&self.0).cmp(&tag(&other.0)))
    }
}

impl core::hash::Hash for Literal {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        match &self.0 {
            Value::Null => 0u8.hash(state),
            Value::Integer(i) => (1u8, i).hash(state),
            Value::Real(r) => (2u8, r.to_bits()).hash(state),
            Value::Text(s) => (3u8, s).hash(state),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Value::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Value::Null => f.write_str("NULL"),
            v => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Operand {
    Column(ColumnRef),
    Aggregate(Aggregate),
    Literal(Literal),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Column(c) => c.fmt(f),
            Operand::Aggregate(a) => a.fmt(f),
            Operand::Literal(l) => l.fmt(f),
        }
    }
}

/// Boolean predicate tree for WHERE and HAVING.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Predicate {
    Compare {
        left: Operand,
        op: CmpOp,
        right: Operand,
    },
    InList {
        operand: Operand,
        negated: bool,
        list: Vec<Literal>,
    },
    Like {
        operand: Operand,
        negated: bool,
        pattern: String,
    },
    Between {
        operand: Operand,
        negated: bool,
        low: Literal,
        high: Literal,
    },
    Not(Box<Predicate>),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
}

impl Predicate {
    fn is_compound(&self) -> bool {
        matches!(self, Predicate::And(_) | Predicate::Or(_))
    }

    /// Every operand in the tree, depth first.
    pub fn operands(&self) -> Vec<&Operand> {
        let mut out = Vec::new();
        self.collect_operands(&mut out);
        out
    }

    fn collect_operands<'a>(&'a self, out: &mut Vec<&'a Operand>) {
        match self {
            Predicate::Compare { left, right, .. } => {
                out.push(left);
                out.push(right);
            }
            Predicate::InList { operand, .. }
            | Predicate::Like { operand, .. }
            | Predicate::Between { operand, .. } => out.push(operand),
            Predicate::Not(p) => p.collect_operands(out),
            Predicate::And(ps) | Predicate::Or(ps) => {
                for p in ps {
                    p.collect_operands(out);
                }
            }
        }
    }

    pub fn has_aggregate(&self) -> bool {
        self.operands()
            .iter()
            .any(|o| matches!(o, Operand::Aggregate(_)))
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, p: &Predicate) -> fmt::Result {
    if p.is_compound() {
        write!(f, "({p})")
    } else {
        p.fmt(f)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let not = |n: bool| if n { "NOT " } else { "" };
        match self {
            Predicate::Compare { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            Predicate::InList {
                operand,
                negated,
                list,
            } => {
                write!(f, "{operand} {}IN (", not(*negated))?;
                for (i, l) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    l.fmt(f)?;
                }
                f.write_str(")")
            }
            Predicate::Like {
                operand,
                negated,
                pattern,
            } => write!(
                f,
                "{operand} {}LIKE {}",
                not(*negated),
                Literal(Value::Text(pattern.clone()))
            ),
            Predicate::Between {
                operand,
                negated,
                low,
                high,
            } => write!(f, "{operand} {}BETWEEN {low} AND {high}", not(*negated)),
            Predicate::Not(p) => {
                f.write_str("NOT ")?;
                write_child(f, p)
            }
            Predicate::And(ps) | Predicate::Or(ps) => {
                let sep = if matches!(self, Predicate::And(_)) {
                    " AND "
                } else {
                    " OR "
                };
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_child(f, p)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    Asc,
    Desc,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Asc => "ASC",
            Direction::Desc => "DESC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SortExpr {
    Column(ColumnRef),
    Aggregate(Aggregate),
}

impl fmt::Display for SortExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortExpr::Column(c) => c.fmt(f),
            SortExpr::Aggregate(a) => a.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrderKey {
    pub expr: SortExpr,
    pub direction: Direction,
}

impl fmt::Display for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.expr, self.direction.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BinInterval {
    Year,
    Month,
    Day,
    Weekday,
}

impl BinInterval {
    pub fn keyword(self) -> &'static str {
        match self {
            BinInterval::Year => "YEAR",
            BinInterval::Month => "MONTH",
            BinInterval::Day => "DAY",
            BinInterval::Weekday => "WEEKDAY",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            BinInterval::Year,
            BinInterval::Month,
            BinInterval::Day,
            BinInterval::Weekday,
        ]
        .into_iter()
        .find(|b| b.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BinClause {
    pub column: ColumnRef,
    pub interval: BinInterval,
}

/// One keyword-headed clause of a VQL query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Clause {
    Visualize(ChartType),
    Select(Vec<SelectItem>),
    From(TableRef),
    Join(JoinClause),
    Where(Predicate),
    GroupBy(Vec<ColumnRef>),
    Having(Predicate),
    OrderBy(Vec<OrderKey>),
    Limit(u64),
    BinBy(BinClause),
}

impl Clause {
    pub fn kind(&self) -> ClauseKind {
        match self {
            Clause::Visualize(_) => ClauseKind::Visualize,
            Clause::Select(_) => ClauseKind::Select,
            Clause::From(_) => ClauseKind::From,
            Clause::Join(_) => ClauseKind::Join,
            Clause::Where(_) => ClauseKind::Where,
            Clause::GroupBy(_) => ClauseKind::GroupBy,
            Clause::Having(_) => ClauseKind::Having,
            Clause::OrderBy(_) => ClauseKind::OrderBy,
            Clause::Limit(_) => ClauseKind::Limit,
            Clause::BinBy(_) => ClauseKind::BinBy,
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        it.fmt(f)?;
    }
    Ok(())
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Visualize(c) => write!(f, "VISUALIZE {}", c.keyword()),
            Clause::Select(items) => {
                f.write_str("SELECT ")?;
                write_list(f, items)
            }
            Clause::From(t) => write!(f, "FROM {t}"),
            Clause::Join(j) => write!(f, "JOIN {} ON {} = {}", j.table, j.left, j.right),
            Clause::Where(p) => write!(f, "WHERE {p}"),
            Clause::GroupBy(cols) => {
                f.write_str("GROUP BY ")?;
                write_list(f, cols)
            }
            Clause::Having(p) => write!(f, "HAVING {p}"),
            Clause::OrderBy(keys) => {
                f.write_str("ORDER BY ")?;
                write_list(f, keys)
            }
            Clause::Limit(n) => write!(f, "LIMIT {n}"),
            Clause::BinBy(b) => write!(f, "BIN {} BY {}", b.column, b.interval.keyword()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClauseSetError {
    #[error("missing {0} clause")]
    Missing(&'static str),
    #[error("duplicate {0} clause")]
    Duplicate(&'static str),
    #[error("HAVING requires GROUP BY")]
    HavingWithoutGroupBy,
    #[error("empty {0} list")]
    EmptyList(&'static str),
}

/// A decomposed VQL query.
///
/// Always holds SELECT and FROM; every other kind appears at most once
/// except JOIN, and HAVING implies GROUP BY.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ClauseSet {
    visualize: Option<ChartType>,
    select: Vec<SelectItem>,
    from: TableRef,
    joins: Vec<JoinClause>,
    where_clause: Option<Predicate>,
    group_by: Option<Vec<ColumnRef>>,
    having: Option<Predicate>,
    order_by: Option<Vec<OrderKey>>,
    limit: Option<u64>,
    bin: Option<BinClause>,
}

impl ClauseSet {
    /// Builds a clause set from clauses in any order; JOINs keep their
    /// relative order.
    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Result<Self, ClauseSetError> {
        let mut visualize = None;
        let mut select = None;
        let mut from = None;
        let mut joins = Vec::new();
        let mut where_clause = None;
        let mut group_by = None;
        let mut having = None;
        let mut order_by = None;
        let mut limit = None;
        let mut bin = None;

        fn put<T>(slot: &mut Option<T>, v: T, kind: ClauseKind) -> Result<(), ClauseSetError> {
            if slot.is_some() {
                return Err(ClauseSetError::Duplicate(kind.label()));
            }
            *slot = Some(v);
            Ok(())
        }

        for c in clauses {
            let kind = c.kind();
            match c {
                Clause::Visualize(v) => put(&mut visualize, v, kind)?,
                Clause::Select(v) => {
                    if v.is_empty() {
                        return Err(ClauseSetError::EmptyList("SELECT"));
                    }
                    put(&mut select, v, kind)?
                }
                Clause::From(v) => put(&mut from, v, kind)?,
                Clause::Join(j) => joins.push(j),
                Clause::Where(v) => put(&mut where_clause, v, kind)?,
                Clause::GroupBy(v) => {
                    if v.is_empty() {
                        return Err(ClauseSetError::EmptyList("GROUP BY"));
                    }
                    put(&mut group_by, v, kind)?
                }
                Clause::Having(v) => put(&mut having, v, kind)?,
                Clause::OrderBy(v) => {
                    if v.is_empty() {
                        return Err(ClauseSetError::EmptyList("ORDER BY"));
                    }
                    put(&mut order_by, v, kind)?
                }
                Clause::Limit(v) => put(&mut limit, v, kind)?,
                Clause::BinBy(v) => put(&mut bin, v, kind)?,
            }
        }
        if having.is_some() && group_by.is_none() {
            return Err(ClauseSetError::HavingWithoutGroupBy);
        }
        Ok(ClauseSet {
            visualize,
            select: select.ok_or(ClauseSetError::Missing("SELECT"))?,
            from: from.ok_or(ClauseSetError::Missing("FROM"))?,
            joins,
            where_clause,
            group_by,
            having,
            order_by,
            limit,
            bin,
        })
    }

    /// Clauses in canonical order.
    pub fn clauses(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        if let Some(v) = self.visualize {
            out.push(Clause::Visualize(v));
        }
        out.push(Clause::Select(self.select.clone()));
        out.push(Clause::From(self.from.clone()));
        out.extend(self.joins.iter().cloned().map(Clause::Join));
        if let Some(p) = &self.where_clause {
            out.push(Clause::Where(p.clone()));
        }
        if let Some(g) = &self.group_by {
            out.push(Clause::GroupBy(g.clone()));
        }
        if let Some(p) = &self.having {
            out.push(Clause::Having(p.clone()));
        }
        if let Some(o) = &self.order_by {
            out.push(Clause::OrderBy(o.clone()));
        }
        if let Some(l) = self.limit {
            out.push(Clause::Limit(l));
        }
        if let Some(b) = &self.bin {
            out.push(Clause::BinBy(b.clone()));
        }
        out
    }

    pub fn len(&self) -> usize {
        2 + self.joins.len()
            + usize::from(self.visualize.is_some())
            + usize::from(self.where_clause.is_some())
            + usize::from(self.group_by.is_some())
            + usize::from(self.having.is_some())
            + usize::from(self.order_by.is_some())
            + usize::from(self.limit.is_some())
            + usize::from(self.bin.is_some())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses().iter().any(|c| c == clause)
    }

    pub fn has_kind(&self, kind: ClauseKind) -> bool {
        match kind {
            ClauseKind::Visualize => self.visualize.is_some(),
            ClauseKind::Select | ClauseKind::From => true,
            ClauseKind::Join => !self.joins.is_empty(),
            ClauseKind::Where => self.where_clause.is_some(),
            ClauseKind::GroupBy => self.group_by.is_some(),
            ClauseKind::Having => self.having.is_some(),
            ClauseKind::OrderBy => self.order_by.is_some(),
            ClauseKind::Limit => self.limit.is_some(),
            ClauseKind::BinBy => self.bin.is_some(),
        }
    }

    /// The remaining clause list after removing one occurrence of `clause`.
    pub fn without(&self, clause: &Clause) -> Vec<Clause> {
        let mut out = self.clauses();
        if let Some(i) = out.iter().position(|c| c == clause) {
            out.remove(i);
        }
        out
    }

    /// Clause-set inclusion (`self ⊆ other`), counting JOIN multiplicity.
    pub fn is_subset_of(&self, other: &ClauseSet) -> bool {
        let mut pool = other.clauses();
        self.clauses().into_iter().all(|c| {
            if let Some(i) = pool.iter().position(|p| *p == c) {
                pool.remove(i);
                true
            } else {
                false
            }
        })
    }

    pub fn visualize(&self) -> Option<ChartType> {
        self.visualize
    }
    pub fn select(&self) -> &[SelectItem] {
        &self.select
    }
    pub fn from(&self) -> &TableRef {
        &self.from
    }
    pub fn joins(&self) -> &[JoinClause] {
        &self.joins
    }
    pub fn where_clause(&self) -> Option<&Predicate> {
        self.where_clause.as_ref()
    }
    pub fn group_by(&self) -> Option<&[ColumnRef]> {
        self.group_by.as_deref()
    }
    pub fn having(&self) -> Option<&Predicate> {
        self.having.as_ref()
    }
    pub fn order_by(&self) -> Option<&[OrderKey]> {
        self.order_by.as_deref()
    }
    pub fn limit(&self) -> Option<u64> {
        self.limit
    }
    pub fn bin(&self) -> Option<&BinClause> {
        self.bin.as_ref()
    }

    /// Whether the query folds rows into groups.
    pub fn is_aggregated(&self) -> bool {
        self.group_by.is_some() || self.select.iter().any(SelectItem::is_aggregate)
    }

    /// Canonical text (the `Assem` of a clause set).
    pub fn assemble(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            c.fmt(f)?;
        }
        Ok(())
    }
}
