//! JSON Lines files: trajectories, reply scripts and session transcripts.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use pmvis_core::agent::SessionTranscript;
use pmvis_core::llm::ScriptEntry;
use pmvis_core::trajectory::Trajectory;
use pmvis_core::SyntaxError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {source}")]
    Vql {
        path: PathBuf,
        line: usize,
        #[source]
        source: SyntaxError,
    },
}

/// Parses every non-blank line of a JSONL file.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| FormatError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// One compact JSON document per line.
pub fn write_jsonl<T: Serialize>(out: &mut dyn Write, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RoundLine {
    #[allow(dead_code)]
    round: usize,
    nlq: String,
    vql: String,
}

#[derive(Debug, Deserialize)]
struct TrajectoryLine {
    session_id: String,
    db_id: String,
    seed: u64,
    rounds: Vec<RoundLine>,
}

/// Trajectories in the form written by `pmvis gen`.
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>, FormatError> {
    let lines: Vec<TrajectoryLine> = read_jsonl(path)?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let rounds = t.rounds.into_iter().map(|r| (r.nlq, r.vql)).collect();
            Trajectory::from_parts(t.session_id, t.db_id, t.seed, rounds).map_err(|source| {
                FormatError::Vql {
                    path: path.to_path_buf(),
                    line: i + 1,
                    source,
                }
            })
        })
        .collect()
}

pub fn read_script(path: &Path) -> Result<Vec<ScriptEntry>, FormatError> {
    read_jsonl(path)
}

pub fn read_transcripts(path: &Path) -> Result<Vec<SessionTranscript>, FormatError> {
    read_jsonl(path)
}
