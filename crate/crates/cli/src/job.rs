//! Job input files.

use std::path::Path;

use serde::Deserialize;
use strat_forge::{QuotientKind, WeightSystem};

use crate::CliError;

/// Contents of an `--input` file. All numbers are integers.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobInput {
    torus_rank: usize,
    #[serde(default)]
    moduli: Vec<i64>,
    #[serde(default)]
    weights: Vec<Vec<i64>>,
    #[serde(default)]
    finite_chars: Vec<Vec<i64>>,
    /// Needed only when there are no weight or character rows to infer it from.
    #[serde(default)]
    dimension: Option<usize>,
    #[serde(default)]
    kind: Option<QuotientKind>,
}

#[derive(Debug)]
pub struct Job {
    pub system: WeightSystem,
    pub kind: QuotientKind,
}

pub fn load(path: &Path) -> Result<Job, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Job, CliError> {
    let input: JobInput = serde_json::from_str(text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = match input.dimension {
        Some(n) => n,
        None => input
            .weights
            .first()
            .or(input.finite_chars.first())
            .map(Vec::len)
            .ok_or_else(|| CliError::Invalid {
                path: path.to_path_buf(),
                message: "`dimension` is required when there are no weight or character rows".into(),
            })?,
    };
    let system = WeightSystem::new(input.torus_rank, input.moduli, input.weights, input.finite_chars, n)
        .map_err(|e| CliError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    Ok(Job {
        system,
        kind: input.kind.unwrap_or(QuotientKind::Symplectic),
    })
}
