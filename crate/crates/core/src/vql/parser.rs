//! Recursive-descent parser for flat VQL.
//!
//! ```text
//! query   := [VISUALIZE chart] SELECT items FROM table join*
//!            [WHERE pred] [GROUP BY cols] [HAVING pred]
//!            [ORDER BY keys] [LIMIT int] [BIN col BY interval] [;]
//! join    := JOIN table ON col = col
//! table   := ident [[AS] ident]
//! item    := * | col | agg
//! agg     := (COUNT|SUM|AVG|MIN|MAX) ( [DISTINCT] col )  | COUNT(*)
//! pred    := conj (OR conj)*
//! conj    := neg (AND neg)*
//! neg     := NOT neg | ( pred ) | atom
//! atom    := operand cmp operand
//!          | operand [NOT] IN ( lit, ... )
//!          | operand [NOT] LIKE string
//!          | operand [NOT] BETWEEN lit AND lit
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Keyword, Tok, Token};
use super::SyntaxError;
use crate::value::Value;

pub fn parse(text: &str) -> Result<ClauseSet, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        end: text.len(),
    };
    let mut clauses = p.query()?;
    canonicalize_casing(&mut clauses);
    ClauseSet::from_clauses(clauses)
        .map_err(|e| SyntaxError::new(0, "a well-formed clause set", e.to_string()))
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.idx).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.tokens.get(self.idx + n).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.idx).map_or(self.end, |t| t.pos)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".into(),
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.pos(), expected, self.found()))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.idx).map(|t| t.tok.clone());
        self.idx += 1;
        t
    }

    fn at_kw(&self, k: Keyword) -> bool {
        self.peek() == Some(&Tok::Kw(k))
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        if self.at_kw(k) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: Keyword) -> Result<(), SyntaxError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(k.text())
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(what)
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.idx += 1;
                Ok(s)
            }
            _ => self.err(what),
        }
    }

    fn query(&mut self) -> Result<Vec<Clause>, SyntaxError> {
        let mut out = Vec::new();
        if self.eat_kw(Keyword::Visualize) {
            let name = self.ident("chart type (BAR, PIE, LINE, SCATTER)")?;
            match ChartType::from_keyword(&name) {
                Some(c) => out.push(Clause::Visualize(c)),
                None => {
                    self.idx -= 1;
                    return self.err("chart type (BAR, PIE, LINE, SCATTER)");
                }
            }
        }
        if !self.at_kw(Keyword::Select) {
            return if out.is_empty() {
                self.err("VISUALIZE or SELECT")
            } else {
                self.err("SELECT")
            };
        }
        self.idx += 1;
        out.push(Clause::Select(self.select_items()?));
        self.expect_kw(Keyword::From)?;
        out.push(Clause::From(self.table_ref()?));
        while self.eat_kw(Keyword::Join) {
            let table = self.table_ref()?;
            self.expect_kw(Keyword::On)?;
            let left = self.column_ref()?;
            self.expect(Tok::Eq, "`=` in join condition")?;
            let right = self.column_ref()?;
            out.push(Clause::Join(JoinClause { table, left, right }));
        }
        if self.eat_kw(Keyword::Where) {
            out.push(Clause::Where(self.predicate()?));
        }
        if self.eat_kw(Keyword::Group) {
            self.expect_kw(Keyword::By)?;
            let mut cols = alloc::vec![self.column_ref()?];
            while self.eat(&Tok::Comma) {
                cols.push(self.column_ref()?);
            }
            out.push(Clause::GroupBy(cols));
        }
        if self.eat_kw(Keyword::Having) {
            out.push(Clause::Having(self.predicate()?));
        }
        if self.eat_kw(Keyword::Order) {
            self.expect_kw(Keyword::By)?;
            let mut keys = alloc::vec![self.order_key()?];
            while self.eat(&Tok::Comma) {
                keys.push(self.order_key()?);
            }
            out.push(Clause::OrderBy(keys));
        }
        if self.eat_kw(Keyword::Limit) {
            match self.bump() {
                Some(Tok::Int(n)) if n >= 0 => out.push(Clause::Limit(n as u64)),
                _ => {
                    self.idx -= 1;
                    return self.err("non-negative integer after LIMIT");
                }
            }
        }
        if self.eat_kw(Keyword::Bin) {
            let column = self.column_ref()?;
            self.expect_kw(Keyword::By)?;
            let name = self.ident("bin interval (YEAR, MONTH, DAY, WEEKDAY)")?;
            match BinInterval::from_keyword(&name) {
                Some(interval) => out.push(Clause::BinBy(BinClause { column, interval })),
                None => {
                    self.idx -= 1;
                    return self.err("bin interval (YEAR, MONTH, DAY, WEEKDAY)");
                }
            }
        }
        self.eat(&Tok::Semicolon);
        if self.peek().is_some() {
            return self.err("end of query");
        }
        Ok(out)
    }

    fn select_items(&mut self) -> Result<Vec<SelectItem>, SyntaxError> {
        let mut items = alloc::vec![self.select_item()?];
        while self.eat(&Tok::Comma) {
            items.push(self.select_item()?);
        }
        Ok(items)
    }

    fn select_item(&mut self) -> Result<SelectItem, SyntaxError> {
        if self.eat(&Tok::Star) {
            return Ok(SelectItem::Star);
        }
        if let Some(a) = self.try_aggregate()? {
            return Ok(SelectItem::Aggregate(a));
        }
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(SelectItem::Column(self.column_ref()?)),
            _ => self.err("select item"),
        }
    }

    fn try_aggregate(&mut self) -> Result<Option<Aggregate>, SyntaxError> {
        let func = match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(name)), Some(Tok::LParen)) => match AggFunc::from_keyword(name) {
                Some(f) => f,
                None => return self.err("aggregate function (COUNT, SUM, AVG, MIN, MAX)"),
            },
            _ => return Ok(None),
        };
        self.idx += 2;
        let distinct = self.eat_kw(Keyword::Distinct);
        let arg = if self.at_kw(Keyword::Distinct) {
            return self.err("column");
        } else if self.peek() == Some(&Tok::Star) {
            if func != AggFunc::Count || distinct {
                return self.err("column");
            }
            self.idx += 1;
            AggArg::Star
        } else {
            AggArg::Column(self.column_ref()?)
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Some(Aggregate {
            func,
            distinct,
            arg,
        }))
    }

    fn column_ref(&mut self) -> Result<ColumnRef, SyntaxError> {
        let first = self.ident("column name")?;
        if self.eat(&Tok::Dot) {
            let name = self.ident("column name after `.`")?;
            Ok(ColumnRef::qualified(first, name))
        } else {
            Ok(ColumnRef::new(first))
        }
    }

    fn table_ref(&mut self) -> Result<TableRef, SyntaxError> {
        let name = self.ident("table name")?;
        let alias = if self.eat_kw(Keyword::As) {
            Some(self.ident("alias after AS")?)
        } else if let Some(Tok::Ident(a)) = self.peek() {
            let a = a.clone();
            self.idx += 1;
            Some(a)
        } else {
            None
        };
        Ok(TableRef { name, alias })
    }

    fn order_key(&mut self) -> Result<OrderKey, SyntaxError> {
        let expr = match self.try_aggregate()? {
            Some(a) => SortExpr::Aggregate(a),
            None => SortExpr::Column(self.column_ref()?),
        };
        let direction = if self.eat_kw(Keyword::Desc) {
            Direction::Desc
        } else {
            self.eat_kw(Keyword::Asc);
            Direction::Asc
        };
        match self.peek() {
            None
            | Some(Tok::Comma)
            | Some(Tok::Semicolon)
            | Some(Tok::Kw(Keyword::Limit))
            | Some(Tok::Kw(Keyword::Bin)) => Ok(OrderKey { expr, direction }),
            _ => self.err("ASC, DESC, `,` or end of ORDER BY"),
        }
    }

    fn predicate(&mut self) -> Result<Predicate, SyntaxError> {
        let mut parts = alloc::vec![self.conjunction()?];
        while self.eat_kw(Keyword::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Predicate, SyntaxError> {
        let mut parts = alloc::vec![self.negation()?];
        while self.eat_kw(Keyword::And) {
            parts.push(self.negation()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::And(parts)
        })
    }

    fn negation(&mut self) -> Result<Predicate, SyntaxError> {
        if self.eat_kw(Keyword::Not) {
            return Ok(Predicate::Not(Box::new(self.negation()?)));
        }
        if self.eat(&Tok::LParen) {
            let p = self.predicate()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(p);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Predicate, SyntaxError> {
        let operand = self.operand()?;
        let negated = self.eat_kw(Keyword::Not);
        if self.eat_kw(Keyword::In) {
            self.expect(Tok::LParen, "`(` after IN")?;
            let mut list = alloc::vec![self.literal()?];
            while self.eat(&Tok::Comma) {
                list.push(self.literal()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Predicate::InList {
                operand,
                negated,
                list,
            });
        }
        if self.eat_kw(Keyword::Like) {
            return match self.bump() {
                Some(Tok::Str(pattern)) => Ok(Predicate::Like {
                    operand,
                    negated,
                    pattern,
                }),
                _ => {
                    self.idx -= 1;
                    self.err("string pattern after LIKE")
                }
            };
        }
        if self.eat_kw(Keyword::Between) {
            let low = self.literal()?;
            self.expect_kw(Keyword::And)?;
            let high = self.literal()?;
            return Ok(Predicate::Between {
                operand,
                negated,
                low,
                high,
            });
        }
        if negated {
            return self.err("IN, LIKE or BETWEEN after NOT");
        }
        let op = match self.peek() {
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ne) => CmpOp::Ne,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Ge) => CmpOp::Ge,
            _ => return self.err("comparison operator"),
        };
        self.idx += 1;
        let right = self.operand()?;
        Ok(Predicate::Compare {
            left: operand,
            op,
            right,
        })
    }

    fn operand(&mut self) -> Result<Operand, SyntaxError> {
        if let Some(a) = self.try_aggregate()? {
            return Ok(Operand::Aggregate(a));
        }
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Operand::Column(self.column_ref()?)),
            Some(Tok::Int(_) | Tok::Real(_) | Tok::Str(_) | Tok::Kw(Keyword::Null)) => {
                Ok(Operand::Literal(self.literal()?))
            }
            _ => self.err("column, aggregate or literal"),
        }
    }

    fn literal(&mut self) -> Result<Literal, SyntaxError> {
        let v = match self.peek() {
            Some(Tok::Int(i)) => Value::Integer(*i),
            Some(Tok::Real(r)) => Value::Real(*r),
            Some(Tok::Str(s)) => Value::Text(s.clone()),
            Some(Tok::Kw(Keyword::Null)) => Value::Null,
            _ => return self.err("literal"),
        };
        self.idx += 1;
        Ok(Literal(v))
    }
}

/// Rewrites every column reference to the casing of its first occurrence,
/// so `SELECT Floors ... ORDER BY floors` assembles as `ORDER BY Floors`.
fn canonicalize_casing(clauses: &mut [Clause]) {
    let mut first: BTreeMap<(Option<String>, String), ColumnRef> = BTreeMap::new();
    let mut fix = |c: &mut ColumnRef| {
        let canon = first.entry(c.key()).or_insert_with(|| c.clone());
        *c = canon.clone();
    };
    for clause in clauses.iter_mut() {
        super::visit::columns_mut(clause, &mut fix);
    }
}
