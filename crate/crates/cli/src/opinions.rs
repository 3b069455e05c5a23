//! Internal opinion vectors for experiments.
//!
//! Exponential and power-law samples are unbounded, so they are mapped into
//! `[0, 1]` either by dividing by the largest sample (`Max`, the default)
//! or by clamping (`Clamp`).

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use conflict_min::{NodeIdMap, OpinionVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_EXPONENTIAL_RATE: f64 = 1.0;
pub const DEFAULT_POWER_LAW_EXPONENT: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Exponential,
    #[value(name = "powerlaw")]
    PowerLaw,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Exponential => "exponential",
            Distribution::PowerLaw => "powerlaw",
        })
    }
}

impl FromStr for Distribution {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        <Distribution as ValueEnum>::from_str(s, true).map_err(CliError::Usage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divide every sample by the largest one.
    #[default]
    Max,
    /// Cap samples at 1. Power-law samples start at 1 and are shifted to
    /// start at 0 first.
    Clamp,
}

/// `n` seeded opinions in `[0, 1]`.
///
/// `param` is the exponential rate `λ > 0` (default 1) or the power-law
/// density exponent `α > 1` (default 2.5, density `∝ x^{−α}` on `x ≥ 1`).
/// It is ignored for the uniform distribution.
pub fn generate_opinions(
    n: usize,
    distribution: Distribution,
    param: Option<f64>,
    normalization: Normalization,
    seed: u64,
) -> Result<OpinionVector, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = match distribution {
        Distribution::Uniform => return Ok(OpinionVector::new((0..n).map(|_| rng.random::<f64>()).collect())?),
        Distribution::Exponential => {
            let rate = param.unwrap_or(DEFAULT_EXPONENTIAL_RATE);
            let exp = Exp::new(rate)
                .ok()
                .filter(|_| rate > 0.0 && rate.is_finite())
                .ok_or_else(|| CliError::Usage(format!("exponential rate must be positive, got {rate}")))?;
            (0..n).map(|_| rng.sample(exp)).collect()
        }
        Distribution::PowerLaw => {
            let alpha = param.unwrap_or(DEFAULT_POWER_LAW_EXPONENT);
            if !(alpha > 1.0 && alpha.is_finite()) {
                return Err(CliError::Usage(format!(
                    "power-law exponent must exceed 1, got {alpha}"
                )));
            }
            let pareto = Pareto::new(1.0, alpha - 1.0)
                .map_err(|e| CliError::Usage(format!("power-law parameters: {e}")))?;
            let shift = match normalization {
                Normalization::Max => 0.0,
                Normalization::Clamp => 1.0,
            };
            (0..n).map(|_| rng.sample(pareto) - shift).collect()
        }
    };
    let values = match normalization {
        Normalization::Max => {
            let max = raw.iter().copied().fold(0.0f64, f64::max);
            if max > 0.0 {
                raw.iter().map(|x| x / max).collect()
            } else {
                raw
            }
        }
        Normalization::Clamp => raw.iter().map(|x| x.clamp(0.0, 1.0)).collect(),
    };
    Ok(OpinionVector::new(values)?)
}

/// Reads `original-id value` lines and orders them by contiguous id.
///
/// Every node of the loaded graph must be assigned; ids outside the graph
/// (for example in a dropped component) are ignored.
pub fn load_opinion_file(path: &Path, ids: &NodeIdMap) -> Result<OpinionVector, CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut values: HashMap<u64, f64> = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let bad = || CliError::Data(format!("{}: line {}: expected `id value`", path.display(), lineno + 1));
        let mut parts = t.split_whitespace();
        let id: u64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let value: f64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        values.insert(id, value);
    }
    let mut out = Vec::with_capacity(ids.len());
    for &orig in ids.originals() {
        let v = values
            .get(&orig)
            .ok_or_else(|| CliError::Data(format!("{}: no opinion for node {orig}", path.display())))?;
        out.push(*v);
    }
    OpinionVector::new(out).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
