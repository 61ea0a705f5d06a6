//! Column-reference traversal over clauses.

use alloc::vec::Vec;

use super::ast::*;

fn agg_mut(a: &mut Aggregate, f: &mut dyn FnMut(&mut ColumnRef)) {
    if let AggArg::Column(c) = &mut a.arg {
        f(c);
    }
}

fn operand_mut(o: &mut Operand, f: &mut dyn FnMut(&mut ColumnRef)) {
    match o {
        Operand::Column(c) => f(c),
        Operand::Aggregate(a) => agg_mut(a, f),
        Operand::Literal(_) => {}
    }
}

fn predicate_mut(p: &mut Predicate, f: &mut dyn FnMut(&mut ColumnRef)) {
    match p {
        Predicate::Compare { left, right, .. } => {
            operand_mut(left, f);
            operand_mut(right, f);
        }
        Predicate::InList { operand, .. }
        | Predicate::Like { operand, .. }
        | Predicate::Between { operand, .. } => operand_mut(operand, f),
        Predicate::Not(inner) => predicate_mut(inner, f),
        Predicate::And(ps) | Predicate::Or(ps) => {
            for p in ps {
                predicate_mut(p, f);
            }
        }
    }
}

pub fn columns_mut(clause: &mut Clause, f: &mut dyn FnMut(&mut ColumnRef)) {
    match clause {
        Clause::Visualize(_) | Clause::From(_) | Clause::Limit(_) => {}
        Clause::Select(items) => {
            for it in items {
                match it {
                    SelectItem::Star => {}
                    SelectItem::Column(c) => f(c),
                    SelectItem::Aggregate(a) => agg_mut(a, f),
                }
            }
        }
        Clause::Join(j) => {
            f(&mut j.left);
            f(&mut j.right);
        }
        Clause::Where(p) | Clause::Having(p) => predicate_mut(p, f),
        Clause::GroupBy(cols) => cols.iter_mut().for_each(f),
        Clause::OrderBy(keys) => {
            for k in keys {
                match &mut k.expr {
                    SortExpr::Column(c) => f(c),
                    SortExpr::Aggregate(a) => agg_mut(a, f),
                }
            }
        }
        Clause::BinBy(b) => f(&mut b.column),
    }
}

fn agg_ref<'a>(a: &'a Aggregate, out: &mut Vec<&'a ColumnRef>) {
    if let AggArg::Column(c) = &a.arg {
        out.push(c);
    }
}

fn operand_ref<'a>(o: &'a Operand, out: &mut Vec<&'a ColumnRef>) {
    match o {
        Operand::Column(c) => out.push(c),
        Operand::Aggregate(a) => agg_ref(a, out),
        Operand::Literal(_) => {}
    }
}

/// Column references of one clause in textual order.
pub fn columns(clause: &Clause) -> Vec<&ColumnRef> {
    let mut out = Vec::new();
    match clause {
        Clause::Visualize(_) | Clause::From(_) | Clause::Limit(_) => {}
        Clause::Select(items) => {
            for it in items {
                match it {
                    SelectItem::Star => {}
                    SelectItem::Column(c) => out.push(c),
                    SelectItem::Aggregate(a) => agg_ref(a, &mut out),
                }
            }
        }
        Clause::Join(j) => {
            out.push(&j.left);
            out.push(&j.right);
        }
        Clause::Where(p) | Clause::Having(p) => {
            for o in p.operands() {
                operand_ref(o, &mut out);
            }
        }
        Clause::GroupBy(cols) => out.extend(cols.iter()),
        Clause::OrderBy(keys) => {
            for k in keys {
                match &k.expr {
                    SortExpr::Column(c) => out.push(c),
                    SortExpr::Aggregate(a) => agg_ref(a, &mut out),
                }
            }
        }
        Clause::BinBy(b) => out.push(&b.column),
    }
    out
}
