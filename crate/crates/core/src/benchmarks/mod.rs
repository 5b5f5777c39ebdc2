//! Benchmark problems, acceptability checks and performance measures.

mod accept;
mod data;
mod measures;
pub mod parse;
mod problems;

pub use accept::{check_acceptable, check_acceptable_fn, Acceptability};
pub use data::{generate_data, PRESSURE_LOW_RANGE, PRESSURE_LOW_SHARE};
pub use measures::{lossless, performance_measures, select_model, RunRecord, RunReport};
pub use problems::{
    magman_reference, magman_scale, make_problem, pressure_surrogate, resistance_reference, AcceptParams, AcceptRule,
    DataParams, ProblemDef, ProblemName, MAGMAN_C2, MAGMAN_EDGE, MAGMAN_EDGE_FORCE, MAGMAN_PEAK, PRESSURE_HI,
    PRESSURE_LO, RESISTANCE_HI, RESISTANCE_LO,
};
