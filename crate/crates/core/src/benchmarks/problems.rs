//! The three benchmark problems: parallel resistors, a magnetic manipulator and fermenter pressure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintKind, ConstraintSpec, Domain};
use crate::error::{Error, Result};
use crate::expr::ElementaryOp;
use crate::moea::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemName {
    Resistance2,
    Magman,
    Pressure,
    /// User-supplied data and constraints.
    External,
}

impl ProblemName {
    pub const ALL: [ProblemName; 3] = [ProblemName::Resistance2, ProblemName::Magman, ProblemName::Pressure];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Resistance2 => "resistance2",
            ProblemName::Magman => "magman",
            ProblemName::Pressure => "pressure",
            ProblemName::External => "external",
        }
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemName::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// How training (and test) data are synthesized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataParams {
    pub n_samples: usize,
    /// Box the data inputs are drawn from, which may be narrower than the problem domain.
    pub sample_box: Vec<(f64, f64)>,
    /// Noise level; its meaning is problem specific (see [`super::generate_data`]).
    pub noise: f64,
    /// Fraction of samples held out for testing, rounded down.
    pub test_fraction: f64,
    /// Fresh data for every independent run rather than one dataset per campaign.
    pub per_run: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptRule {
    /// Maximum absolute deviation from the reference below `epsilon`.
    MadVsReference,
    /// Within `margin` of the reference at every grid point.
    BandVsReference,
    /// No constraint violated at any grid point.
    ZeroViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptParams {
    /// Evenly spaced points per input dimension, end points included.
    pub grid_shape: Vec<usize>,
    pub rule: AcceptRule,
    /// MAD bound, a tenth of the reference's standard deviation over the grid.
    pub epsilon: Option<f64>,
    /// Band half-width, a tenth of the reference's range over the grid.
    pub margin: Option<f64>,
}

/// A fully parameterized benchmark problem.
#[derive(Clone, Debug)]
pub struct ProblemDef {
    pub name: ProblemName,
    pub input_domain: Domain<f64>,
    /// Reference model the acceptability check compares against.
    pub reference: Option<fn(&[f64]) -> f64>,
    /// Function the synthetic data are drawn from; the reference where one exists.
    ///
    /// External problems have no such function and cannot generate data.
    pub ground_truth: fn(&[f64]) -> f64,
    pub constraint_specs: Vec<ConstraintSpec<f64>>,
    pub constraint_samples: usize,
    pub data: DataParams,
    pub accept: AcceptParams,
    pub function_set: Vec<ElementaryOp>,
    pub n_features: usize,
    pub depth_limit: usize,
}

impl ProblemDef {
    pub fn n_inputs(&self) -> usize {
        self.input_domain.dims()
    }

    /// Default run settings with this problem's function set, feature count and depth limit.
    pub fn run_config(&self) -> RunConfig {
        self.apply_to(RunConfig::default())
    }

    pub fn apply_to(&self, cfg: RunConfig) -> RunConfig {
        RunConfig {
            function_set: self.function_set.clone(),
            n_features: self.n_features,
            depth_limit: self.depth_limit,
            ..cfg
        }
    }

    /// Problem around user-supplied data: no reference, so models are
    /// accepted by the zero-violation rule on a grid of about 40000 points.
    pub fn external(input_domain: Domain<f64>, constraint_specs: Vec<ConstraintSpec<f64>>, constraint_samples: usize) -> Self {
        let n = input_domain.dims().max(1);
        let per_dim = ((40_000f64).powf(1.0 / n as f64).floor() as usize).max(2);
        let defaults = RunConfig::default();
        ProblemDef {
            name: ProblemName::External,
            reference: None,
            ground_truth: |_| f64::NAN,
            constraint_specs,
            constraint_samples,
            data: DataParams {
                n_samples: 0,
                sample_box: input_domain.0.clone(),
                noise: 0.0,
                test_fraction: 0.0,
                per_run: false,
            },
            accept: AcceptParams {
                grid_shape: vec![per_dim; input_domain.dims()],
                rule: AcceptRule::ZeroViolation,
                epsilon: None,
                margin: None,
            },
            input_domain,
            function_set: defaults.function_set,
            n_features: defaults.n_features,
            depth_limit: defaults.depth_limit,
        }
    }

    /// Evenly spaced validation grid over the input domain, first dimension slowest.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        grid_points(&self.input_domain.0, &self.accept.grid_shape)
    }
}

pub(crate) fn grid_points(bounds: &[(f64, f64)], shape: &[usize]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bounds.iter().zip(shape).map(|(&(lo, hi), &n)| linspace(lo, hi, n)).collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

pub fn make_problem(name: &str) -> Result<ProblemDef> {
    let mut p = match name.parse::<ProblemName>()? {
        ProblemName::Resistance2 => resistance2(),
        ProblemName::Magman => magman(),
        ProblemName::Pressure => pressure(),
        ProblemName::External => return Err(Error::UnknownProblem(name.to_string())),
    };
    if let Some(r) = p.reference {
        let ys: Vec<f64> = p.grid().iter().map(|x| r(x)).collect();
        match p.accept.rule {
            AcceptRule::MadVsReference => p.accept.epsilon = Some(0.1 * population_std(&ys)),
            AcceptRule::BandVsReference => {
                let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
                p.accept.margin = Some(0.1 * (hi - lo));
            }
            AcceptRule::ZeroViolation => {}
        }
    }
    Ok(p)
}

pub(crate) fn population_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub const RESISTANCE_LO: f64 = 0.0001;
pub const RESISTANCE_HI: f64 = 20.0;

/// Equivalent resistance of two resistors in parallel, `x0 x1 / (x0 + x1)`.
///
/// Evaluated as `a / (1 + a / b)` with `a <= b` the sorted inputs. This is
/// the same function, but unlike the product form, which misses `t / 2` by
/// one rounding step on a few percent of diagonal points, it is exactly
/// symmetric, exactly `t / 2` on the diagonal and never exceeds either input.
pub fn resistance_reference(x: &[f64]) -> f64 {
    let (a, b) = if x[0] <= x[1] { (x[0], x[1]) } else { (x[1], x[0]) };
    a / (1.0 + a / b)
}

fn resistance2() -> ProblemDef {
    let dom = Domain(vec![(RESISTANCE_LO, RESISTANCE_HI); 2]);
    let kinds = vec![
        ConstraintKind::SymmetryArgs,
        ConstraintKind::DiagonalHalf,
        ConstraintKind::UpperBoundByInput { dim: 0 },
        ConstraintKind::UpperBoundByInput { dim: 1 },
    ];
    ProblemDef {
        name: ProblemName::Resistance2,
        input_domain: dom.clone(),
        reference: Some(resistance_reference),
        ground_truth: resistance_reference,
        constraint_specs: specs(kinds, &dom),
        constraint_samples: 60,
        data: DataParams {
            n_samples: 10,
            sample_box: dom.0.clone(),
            noise: 0.1,
            test_fraction: 0.0,
            per_run: true,
        },
        accept: AcceptParams { grid_shape: vec![200, 200], rule: AcceptRule::MadVsReference, epsilon: None, margin: None },
        function_set: ElementaryOp::arithmetic(),
        n_features: 3,
        depth_limit: 5,
    }
}

pub const MAGMAN_C2: f64 = 3.2e-4;
pub const MAGMAN_EDGE: f64 = 0.075;
/// Position of the force extremes, `sqrt(c2 / 5)`.
pub const MAGMAN_PEAK: f64 = 0.008;
pub const MAGMAN_EDGE_FORCE: f64 = 1e-3;

/// Lumped scale `k` chosen so the reference force is exactly `1e-3` in magnitude at the domain edges.
pub fn magman_scale() -> f64 {
    MAGMAN_EDGE_FORCE * (MAGMAN_EDGE * MAGMAN_EDGE + MAGMAN_C2).powi(3) / MAGMAN_EDGE
}

/// Force on the manipulated object, `-k x / (x^2 + c2)^3`.
pub fn magman_reference(x: &[f64]) -> f64 {
    let v = x[0];
    -magman_scale() * v / (v * v + MAGMAN_C2).powi(3)
}

fn magman() -> ProblemDef {
    let (e, p) = (MAGMAN_EDGE, MAGMAN_PEAK);
    let dom = Domain(vec![(-e, e)]);
    let iv = |lo: f64, hi: f64| Domain(vec![(lo, hi)]);
    let eta = 0.0001;
    let mono = |lo, hi, increasing| ConstraintKind::Monotone { dim: 0, interval: iv(lo, hi), increasing, eta };
    let kinds = vec![
        ConstraintKind::OddSymmetry,
        ConstraintKind::Sign { interval: iv(-e, 0.0), positive: true },
        ConstraintKind::Sign { interval: iv(0.0, e), positive: false },
        mono(-e, -p, true),
        mono(-p, p, false),
        mono(p, e, true),
        ConstraintKind::PointValue { x: vec![0.0], y: 0.0 },
        ConstraintKind::PointValue { x: vec![-e], y: MAGMAN_EDGE_FORCE },
        ConstraintKind::PointValue { x: vec![e], y: -MAGMAN_EDGE_FORCE },
    ];
    ProblemDef {
        name: ProblemName::Magman,
        input_domain: dom.clone(),
        reference: Some(magman_reference),
        ground_truth: magman_reference,
        constraint_specs: specs(kinds, &dom),
        constraint_samples: 90,
        data: DataParams {
            n_samples: 858,
            sample_box: vec![(-0.027, 0.027)],
            noise: 0.05,
            test_fraction: 0.3,
            per_run: false,
        },
        accept: AcceptParams { grid_shape: vec![30000], rule: AcceptRule::BandVsReference, epsilon: None, margin: None },
        function_set: ElementaryOp::extended(),
        n_features: 5,
        depth_limit: 7,
    }
}

pub const PRESSURE_LO: f64 = 1.0;
pub const PRESSURE_HI: f64 = 2.2;

/// Logistic rescaled to map `[lo, hi]` onto `[0, 1]`.
fn unit_logistic(v: f64, lo: f64, hi: f64, center: f64, steepness: f64) -> f64 {
    let s = |t: f64| 1.0 / (1.0 + (-steepness * (t - center)).exp());
    ((s(v) - s(lo)) / (s(hi) - s(lo))).clamp(0.0, 1.0)
}

/// Smooth stand-in for the fermenter pressure as a function of input pressure `x0` and valve opening `x1`.
///
/// Increasing in both inputs, with range exactly `[1, 2.2]` over the domain.
pub fn pressure_surrogate(x: &[f64]) -> f64 {
    let sp = unit_logistic(x[0], 1.0, 2.0, 1.5, 4.0);
    let su = unit_logistic(x[1], 0.0, 100.0, 30.0, 0.08);
    PRESSURE_LO + (PRESSURE_HI - PRESSURE_LO) * sp * su
}

fn pressure() -> ProblemDef {
    let dom = Domain(vec![(1.0, 2.0), (0.0, 100.0)]);
    let kinds = vec![
        ConstraintKind::Monotone { dim: 0, interval: dom.clone(), increasing: true, eta: 0.001 },
        ConstraintKind::Monotone { dim: 1, interval: dom.clone(), increasing: true, eta: 0.1 },
        ConstraintKind::OutputBounded { lo: PRESSURE_LO, hi: PRESSURE_HI },
    ];
    ProblemDef {
        name: ProblemName::Pressure,
        input_domain: dom.clone(),
        reference: None,
        ground_truth: pressure_surrogate,
        constraint_specs: specs(kinds, &dom),
        constraint_samples: 80,
        data: DataParams {
            n_samples: 756,
            sample_box: dom.0.clone(),
            noise: 1e-3,
            test_fraction: 0.3,
            per_run: false,
        },
        accept: AcceptParams { grid_shape: vec![200, 200], rule: AcceptRule::ZeroViolation, epsilon: None, margin: None },
        function_set: ElementaryOp::extended(),
        n_features: 5,
        depth_limit: 7,
    }
}

fn specs(kinds: Vec<ConstraintKind<f64>>, dom: &Domain<f64>) -> Vec<ConstraintSpec<f64>> {
    kinds.into_iter().enumerate().map(|(id, kind)| ConstraintSpec::new(id, kind, dom.clone())).collect()
}
