use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::Serialize;

use crate::exec::{execute, renderability};
use crate::store::Database;
use crate::vql::{
    bound_columns, optional_clauses, prerequisites, referenced_columns, Clause, ClauseKind,
    ClauseSet,
};

/// The masking constraints, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MaskRule {
    /// SELECT and FROM are never masked.
    #[serde(rename = "MC1")]
    CorePreserved,
    /// Every remaining clause keeps its prerequisites.
    #[serde(rename = "MC2")]
    PrerequisitesKept,
    /// Every referenced column stays bound by FROM/JOIN.
    #[serde(rename = "MC3")]
    ColumnsBound,
    /// The remaining query still draws as its chart.
    #[serde(rename = "VF1")]
    Renderable,
    /// The remaining query returns at least one row.
    #[serde(rename = "VF2")]
    NonEmpty,
}

impl MaskRule {
    pub fn code(self) -> &'static str {
        match self {
            MaskRule::CorePreserved => "MC1",
            MaskRule::PrerequisitesKept => "MC2",
            MaskRule::ColumnsBound => "MC3",
            MaskRule::Renderable => "VF1",
            MaskRule::NonEmpty => "VF2",
        }
    }
}

impl fmt::Display for MaskRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaskVerdict {
    pub accepted: bool,
    pub violated_rule: Option<MaskRule>,
    pub diagnostic: String,
}

impl MaskVerdict {
    fn accept() -> Self {
        MaskVerdict {
            accepted: true,
            violated_rule: None,
            diagnostic: String::new(),
        }
    }

    fn reject(rule: MaskRule, diagnostic: impl Into<String>) -> Self {
        MaskVerdict {
            accepted: false,
            violated_rule: Some(rule),
            diagnostic: diagnostic.into(),
        }
    }
}

/// Decides whether `clause` may be removed from `cs`. The rules run on
/// the remaining clauses; the first failing rule is reported.
pub fn check_mask(clause: &Clause, cs: &ClauseSet, db: &Database) -> MaskVerdict {
    if matches!(clause.kind(), ClauseKind::Select | ClauseKind::From) {
        return MaskVerdict::reject(
            MaskRule::CorePreserved,
            format!("{} is a core clause", clause.kind().label()),
        );
    }
    let remaining = cs.without(clause);
    let kinds: BTreeSet<ClauseKind> = remaining.iter().map(Clause::kind).collect();
    for c in &remaining {
        if let Some(missing) = prerequisites(c).difference(&kinds).next() {
            return MaskVerdict::reject(
                MaskRule::PrerequisitesKept,
                format!("{} requires {}", c.kind().label(), missing.label()),
            );
        }
    }
    let rest = match ClauseSet::from_clauses(remaining) {
        Ok(r) => r,
        Err(e) => return MaskVerdict::reject(MaskRule::PrerequisitesKept, e.to_string()),
    };
    match (referenced_columns(&rest, db), bound_columns(&rest, db)) {
        (Ok(used), Ok(bound)) => {
            let unbound: Vec<&String> = used.difference(&bound).collect();
            if !unbound.is_empty() {
                let names: Vec<&str> = unbound.iter().map(|s| s.as_str()).collect();
                return MaskVerdict::reject(
                    MaskRule::ColumnsBound,
                    format!("unbound column(s): {}", names.join(", ")),
                );
            }
        }
        (Err(e), _) | (_, Err(e)) => {
            return MaskVerdict::reject(MaskRule::ColumnsBound, e.to_string())
        }
    }
    let result = match execute(&rest, db) {
        Ok(r) => r,
        // A query that no longer runs yields no rows at all.
        Err(e) => return MaskVerdict::reject(MaskRule::NonEmpty, e.to_string()),
    };
    if let Err(issue) = renderability(&rest, &result) {
        return MaskVerdict::reject(MaskRule::Renderable, issue.to_string());
    }
    if result.is_empty() {
        return MaskVerdict::reject(MaskRule::NonEmpty, "empty result");
    }
    MaskVerdict::accept()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("no optional clause to mask")]
    NothingToMask,
    #[error("every optional clause was rejected")]
    Exhausted {
        rejected: Vec<(Clause, MaskVerdict)>,
    },
}

/// Removes one optional clause drawn uniformly at random, resampling
/// without replacement until a draw passes [`check_mask`].
pub fn random_mask<R: Rng + ?Sized>(
    cs: &ClauseSet,
    db: &Database,
    rng: &mut R,
    maskable_visualize: bool,
    max_attempts: usize,
) -> Result<(Clause, ClauseSet), MaskError> {
    let mut pool = optional_clauses(cs, maskable_visualize);
    if pool.is_empty() {
        return Err(MaskError::NothingToMask);
    }
    let mut rejected = Vec::new();
    while !pool.is_empty() && rejected.len() < max_attempts {
        let pick = pool.swap_remove(rng.random_range(0..pool.len()));
        let verdict = check_mask(&pick, cs, db);
        if verdict.accepted {
            let rest = ClauseSet::from_clauses(cs.without(&pick))
                .expect("accepted masks leave a well-formed clause set");
            return Ok((pick, rest));
        }
        rejected.push((pick, verdict));
    }
    Err(MaskError::Exhausted { rejected })
}
