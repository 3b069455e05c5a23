use std::path::PathBuf;

use conflict_min::gains::{SketchDimension, SketchTolerances};
use conflict_min::greedy::DEFAULT_DAMPING;
use conflict_min::{ConflictMeasure, Execution, Method, SketchOptions, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::opinions::{Distribution, Normalization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum OpinionSource {
    Distribution {
        distribution: Distribution,
        param: Option<f64>,
        normalization: Normalization,
    },
    /// `original-id value` per line.
    File { path: PathBuf },
}

impl Default for OpinionSource {
    fn default() -> Self {
        OpinionSource::Distribution {
            distribution: Distribution::Uniform,
            param: None,
            normalization: Normalization::Max,
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub measure: ConflictMeasure,
    pub method: Method,
    pub k: usize,
    pub epsilon: f64,
    pub opinions: OpinionSource,
    /// Seeds the sketches (`greedy-ac`) and the random baseline.
    pub seed: u64,
    /// Seeds the opinion draw; defaults to `seed`.
    pub opinion_seed: u64,
    pub solver_tolerance: f64,
    pub sketch_dimension: Option<usize>,
    pub sketch_factor: f64,
    pub theoretical_tolerances: bool,
    pub damping: f64,
    pub reference_delta: Option<f64>,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(graph: impl Into<PathBuf>, measure: ConflictMeasure, method: Method, k: usize) -> Self {
        ExperimentConfig {
            graph: graph.into(),
            measure,
            method,
            k,
            epsilon: 0.5,
            opinions: OpinionSource::default(),
            seed: 42,
            opinion_seed: 42,
            solver_tolerance: 1e-8,
            sketch_dimension: None,
            sketch_factor: 4.0,
            theoretical_tolerances: false,
            damping: DEFAULT_DAMPING,
            reference_delta: None,
            execution: Execution::default(),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions::with_tolerance(self.solver_tolerance).execution(self.execution)
    }

    pub fn sketch_options(&self) -> SketchOptions {
        let dimension = match (self.sketch_dimension, self.theoretical_tolerances) {
            (Some(p), _) => SketchDimension::Fixed(p),
            (None, true) => SketchDimension::Theoretical,
            (None, false) => SketchDimension::Heuristic {
                factor: self.sketch_factor,
            },
        };
        let tolerances = if self.theoretical_tolerances {
            SketchTolerances::Theoretical
        } else {
            SketchTolerances::Practical {
                rows: 1e-6,
                vectors: self.solver_tolerance,
            }
        };
        SketchOptions {
            epsilon: self.epsilon,
            seed: self.seed,
            dimension,
            tolerances,
        }
    }

    /// Checks that do not need the graph.
    pub fn validate(&self) -> Result<(), CliError> {
        self.solve_options().validate()?;
        self.sketch_options().validate()?;
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CliError::Usage(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        if self.k == 0 {
            return Err(CliError::Usage("k must be at least 1".into()));
        }
        if let Some(r) = self.reference_delta {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::Usage(format!("reference delta must be positive, got {r}")));
            }
        }
        Ok(())
    }
}
