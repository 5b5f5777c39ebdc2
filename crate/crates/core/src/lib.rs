//! Multi-objective symbolic regression guided by training data and prior knowledge.
//!
//! Candidate models are linear combinations of nonlinear features,
//! `f(x) = b0 + sum(bi * phi_i(x))`, where the features are read out of a
//! single-node genome ([`expr::NodeArray`]). Every candidate is scored on two
//! objectives, the training error and the violation of formal constraints
//! checked on a growing set of samples, and the population is evolved with
//! NSGA-II style selection.
//!
//! The library is generic over the floating point type; [`f64`] aliases are
//! provided at the crate root.

pub mod benchmarks;
pub mod constraints;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod linear;
pub mod moea;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use constraints::{
    build_constraint_set, constraint_breakdown, constraint_objective, update_constraint_set, violation, ConstraintKind,
    ConstraintSample, ConstraintSet, ConstraintSpec, Domain, Form, ViolationBreakdown,
};
pub use error::{Error, Result};
pub use expr::{eval_node, init_node_array, mutate, to_infix, ArrayConfig, ElementaryOp, Node, NodeArray};
pub use linear::{fit_beta_ls, fit_beta_mols, predict, score, Dataset, Model, ModelScores};
pub use moea::{
    crowding_distance, merge, nondominated_sort, run_base, run_mo, BetaMode, Observer, Population, RunConfig, RunOutcome,
};
pub use rng::RandomStream;
pub use scalar::Scalar;
pub use stats::{median, rank_sum_test};

pub type NodeArrayF64 = NodeArray<f64>;
pub type ModelF64 = Model<f64>;
pub type ModelScoresF64 = ModelScores<f64>;
pub type DatasetF64 = Dataset<f64>;
pub type ConstraintSpecF64 = ConstraintSpec<f64>;
pub type ConstraintSetF64 = ConstraintSet<f64>;
pub type PopulationF64 = Population<f64>;
pub type RunOutcomeF64 = RunOutcome<f64>;

pub type NodeArrayF32 = NodeArray<f32>;
pub type ModelF32 = Model<f32>;
pub type DatasetF32 = Dataset<f32>;
