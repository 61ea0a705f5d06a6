//! Progressive trajectories: a source query is simplified one clause at a
//! time by rule-checked random masking, then replayed simplest-first with
//! one question per round.

mod mask;
mod nlq;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use mask::{check_mask, random_mask, MaskError, MaskRule, MaskVerdict};
pub use nlq::{base_nlq, clause_nlq, synthesize_nlq, NlqContext, RoundDelta};

use crate::exec::{execute, ExecError};
use crate::llm::{LlmClient, LlmError};
use crate::store::Database;
use crate::vql::{parse, referenced_columns, referenced_tables, ClauseSet, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub nlq: String,
    /// Canonical VQL text.
    pub vql: String,
    pub clause_set: ClauseSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub session_id: String,
    pub db_id: String,
    pub seed: u64,
    pub rounds: Vec<Round>,
}

impl Trajectory {
    /// Rebuilds a trajectory from stored `(nlq, vql)` pairs.
    pub fn from_parts(
        session_id: String,
        db_id: String,
        seed: u64,
        rounds: Vec<(String, String)>,
    ) -> Result<Self, SyntaxError> {
        let rounds = rounds
            .into_iter()
            .map(|(nlq, vql)| {
                let clause_set = parse(&vql)?;
                Ok(Round {
                    nlq,
                    vql: clause_set.assemble(),
                    clause_set,
                })
            })
            .collect::<Result<_, SyntaxError>>()?;
        Ok(Trajectory {
            session_id,
            db_id,
            seed,
            rounds,
        })
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The source query, i.e. the last round.
    pub fn target(&self) -> Option<&Round> {
        self.rounds.last()
    }
}

struct RoundRecord<'a>(usize, &'a Round);

impl Serialize for RoundRecord<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Round", 3)?;
        s.serialize_field("round", &self.0)?;
        s.serialize_field("nlq", &self.1.nlq)?;
        s.serialize_field("vql", &self.1.vql)?;
        s.end()
    }
}

/// Wire form: `{session_id, db_id, seed, rounds: [{round, nlq, vql}]}`.
impl Serialize for Trajectory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rounds: Vec<RoundRecord<'_>> = self
            .rounds
            .iter()
            .enumerate()
            .map(|(i, r)| RoundRecord(i + 1, r))
            .collect();
        let mut s = serializer.serialize_struct("Trajectory", 4)?;
        s.serialize_field("session_id", &self.session_id)?;
        s.serialize_field("db_id", &self.db_id)?;
        s.serialize_field("seed", &self.seed)?;
        s.serialize_field("rounds", &rounds)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryConfig {
    pub min_rounds: usize,
    /// Upper bound on rounds; masking stops once it is reached.
    pub max_rounds: usize,
    /// Allow VISUALIZE to be masked like any optional clause.
    pub maskable_visualize: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            min_rounds: 2,
            max_rounds: 6,
            maskable_visualize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceInvalid {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("not grounded in the database: {0}")]
    NotGrounded(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("empty result")]
    EmptyResult,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrajectoryError {
    #[error("invalid source query: {0}")]
    SourceInvalid(#[from] SourceInvalid),
    #[error("chain of {} round(s) is shorter than {min_rounds}", trajectory.len())]
    TooShort {
        trajectory: Box<Trajectory>,
        min_rounds: usize,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
}

fn check_source(v: &str, db: &Database) -> Result<ClauseSet, SourceInvalid> {
    let cs = parse(v)?;
    let tables = db.table_names();
    if let Some(t) = referenced_tables(&cs).iter().find(|t| !tables.contains(*t)) {
        return Err(SourceInvalid::NotGrounded(format!("no such table: {t}")));
    }
    let columns = db.column_names();
    let used =
        referenced_columns(&cs, db).map_err(|e| SourceInvalid::NotGrounded(e.to_string()))?;
    if let Some(c) = used.iter().find(|c| !columns.contains(*c)) {
        return Err(SourceInvalid::NotGrounded(format!("no such column: {c}")));
    }
    if execute(&cs, db)?.is_empty() {
        return Err(SourceInvalid::EmptyResult);
    }
    Ok(cs)
}

/// Builds the reverse masking chain for `v` and emits it simplest-first.
///
/// The chain stops when no optional clause is left, when every candidate
/// mask is rejected, or at `cfg.max_rounds`. With `nlq_llm` the questions
/// come from the model instead of templates.
pub fn generate_trajectory(
    v: &str,
    db: &Database,
    seed: u64,
    cfg: &TrajectoryConfig,
    nlq_llm: Option<&mut dyn LlmClient>,
) -> Result<Trajectory, TrajectoryError> {
    let source = check_source(v, db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // chain[0] is the source; every later entry is its predecessor minus the
    // recorded clause.
    let mut chain = alloc::vec![(source, None)];
    while chain.len() < cfg.max_rounds.max(1) {
        let current = &chain[chain.len() - 1].0;
        match random_mask(current, db, &mut rng, cfg.maskable_visualize, usize::MAX) {
            Ok((removed, rest)) => chain.push((rest, Some(removed))),
            Err(_) => break,
        }
    }

    let session_id = format!("{}-{seed}", db.id);
    let mut llm = nlq_llm;
    let mut history: Vec<(String, String)> = Vec::new();
    let mut rounds = Vec::with_capacity(chain.len());
    // Walk forward: the simplest set first, then re-add clauses in reverse
    // order of removal.
    let n = chain.len();
    for i in 0..n {
        let (cs, _) = &chain[n - 1 - i];
        let delta = if i == 0 {
            RoundDelta::Initial(cs)
        } else {
            let removed = chain[n - i]
                .1
                .as_ref()
                .expect("every later entry records its clause");
            RoundDelta::Added(removed)
        };
        let ctx = NlqContext {
            session: Some(&session_id),
            round: i + 1,
        };
        let client: Option<&mut dyn LlmClient> = match &mut llm {
            Some(l) => Some(&mut **l),
            None => None,
        };
        let nlq = synthesize_nlq(delta, &history, client, ctx)?;
        let vql = cs.assemble();
        history.push((nlq.clone(), vql.clone()));
        rounds.push(Round {
            nlq,
            vql,
            clause_set: cs.clone(),
        });
    }
    let trajectory = Trajectory {
        session_id,
        db_id: db.id.clone(),
        seed,
        rounds,
    };
    if trajectory.len() < cfg.min_rounds {
        return Err(TrajectoryError::TooShort {
            trajectory: Box::new(trajectory),
            min_rounds: cfg.min_rounds,
        });
    }
    Ok(trajectory)
}
