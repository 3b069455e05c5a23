//! Conflict minimization under the Friedkin–Johnsen opinion model.
//!
//! Given an undirected social graph and internal opinions `s ∈ [0,1]ⁿ`, the
//! crate selects `k` nodes whose internal opinions, once set to zero, reduce
//! either the *resistance* `sᵀ(I+L)⁻¹s` or the *controversy* `sᵀ(I+L)⁻²s`
//! as much as possible.
//!
//! Two selection algorithms are provided:
//!
//! * [`greedy::greedy_exact`] evaluates every marginal gain exactly from
//!   solver-backed diagonals of the forest matrix.
//! * [`greedy::greedy_ac`] estimates all gains per round from random
//!   projections of a logarithmic number of Laplacian solves.
//!
//! Data-parallel loops (independent solves, per-node gains) run on rayon when
//! the `parallel` feature is enabled, and sequentially otherwise. See
//! [`Execution`].

pub mod dynamics;
pub mod error;
pub mod gains;
pub mod graph;
pub mod greedy;
pub mod linsolve;
mod par;

pub use dynamics::{ConflictMeasure, ExpressedOpinions, OpinionVector};
pub use error::{Error, Result};
pub use gains::{GainEstimate, SketchDimension, SketchOptions, SketchSet, SketchTolerances};
pub use graph::{Graph, NodeIdMap};
pub use greedy::{Method, SelectionResult};
pub use linsolve::SolveOptions;
pub use par::Execution;
