use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problems::{AcceptRule, ProblemDef};
use crate::linear::Model;
use crate::scalar::Scalar;

/// Outcome of validating a model on a problem's grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Acceptability {
    pub acceptable: bool,
    /// Maximum absolute deviation from the reference over the grid.
    pub mad: Option<f64>,
    /// Mean squared deviation from the reference over the grid.
    pub msd: Option<f64>,
    /// Mean constraint violation over grid-anchored samples, for the zero-violation rule.
    pub viol_grid: Option<f64>,
}

pub fn check_acceptable<T: Scalar>(model: &Model<T>, problem: &ProblemDef) -> Acceptability {
    check_acceptable_fn(
        |x| {
            let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
            model.predict(&xt).as_f64()
        },
        problem,
    )
}

/// [`check_acceptable`] for any function of the inputs.
pub fn check_acceptable_fn(f: impl Fn(&[f64]) -> f64 + Sync, problem: &ProblemDef) -> Acceptability {
    let grid = problem.grid();
    let (mut mad, mut msd) = (None, None);
    if let Some(r) = problem.reference {
        let (max_abs, sum_sq) = grid
            .par_iter()
            .map(|x| {
                let d = f(x) - r(x);
                // NaN compares false everywhere, so map it to infinity explicitly
                let d = if d.is_nan() { f64::INFINITY } else { d.abs() };
                (d, d * d)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1 + b.1));
        mad = Some(max_abs);
        msd = Some(sum_sq / grid.len() as f64);
    }
    let mut viol_grid = None;
    let acceptable = match problem.accept.rule {
        AcceptRule::MadVsReference => match (mad, problem.accept.epsilon) {
            (Some(m), Some(eps)) => m < eps,
            _ => false,
        },
        AcceptRule::BandVsReference => match (mad, problem.accept.margin) {
            (Some(m), Some(margin)) => m <= margin,
            _ => false,
        },
        AcceptRule::ZeroViolation => {
            let v = grid_violation(&f, problem, &grid);
            viol_grid = Some(v);
            v == 0.0
        }
    };
    Acceptability { acceptable, mad, msd, viol_grid }
}

/// Mean violation over every sample anchored at a grid point.
///
/// Monotonicity is checked on the pair `(p, p + eta)` along its dimension
/// and other kinds pointwise. Non-finite outputs count as infinite violation.
fn grid_violation(f: &(impl Fn(&[f64]) -> f64 + Sync), problem: &ProblemDef, grid: &[Vec<f64>]) -> f64 {
    let specs = &problem.constraint_specs;
    let (sum, count) = grid
        .par_iter()
        .map(|p| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (i, spec) in specs.iter().enumerate() {
                if let Some(sample) = spec.anchored_sample(i, p) {
                    let values: Vec<f64> = spec.eval_points(&sample).iter().map(|q| f(q)).collect();
                    sum += if values.iter().all(|v| v.is_finite()) {
                        spec.violation_from_values(&sample, &values)
                    } else {
                        f64::INFINITY
                    };
                    count += 1;
                }
            }
            (sum, count)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
