//! Prior-knowledge constraints checked on discrete samples.
//!
//! Each [`ConstraintSpec`] is either an inequality `g(x) <= 0` scored by the
//! squared hinge `max(g, 0)^2`, or an equality `h(x) = 0` scored by `h^2`.
//! A [`ConstraintSet`] holds the concrete samples on which candidate models
//! are checked, and grows during a run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::Model;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Axis-aligned box, one `(lo, hi)` pair per input dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Domain<T>(pub Vec<(T, T)>);

impl<T: Scalar> Domain<T> {
    pub fn new(bounds: Vec<(T, T)>) -> Self {
        Domain(bounds)
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.0.len() && self.0.iter().zip(x).all(|(&(lo, hi), &v)| lo <= v && v <= hi)
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Vec<T> {
        self.0.iter().map(|&(lo, hi)| uniform(rng, lo, hi)).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::Config(format!("{what}: empty box")));
        }
        for &(lo, hi) in &self.0 {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!("{what}: invalid interval [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

fn uniform<T: Scalar>(rng: &mut RandomStream, lo: T, hi: T) -> T {
    if lo == hi {
        lo
    } else {
        T::lit(rng.random_range(lo.as_f64()..=hi.as_f64())).max(lo).min(hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Inequality,
    Equality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintKind<T> {
    /// `f(x1, x2) - f(x2, x1) = 0`
    SymmetryArgs,
    /// `f(x) + f(-x) = 0`
    OddSymmetry,
    /// `f(x) - y = 0`
    PointValue { x: Vec<T>, y: T },
    /// `f(x, x) - x / 2 = 0`
    DiagonalHalf,
    /// `f(x) - x[dim] <= 0`
    UpperBoundByInput { dim: usize },
    /// `-f(x) <= 0` when positive, `f(x) <= 0` otherwise, on `interval`.
    Sign { interval: Domain<T>, positive: bool },
    /// Checked on point pairs that differ only in `dim` by less than `eta`.
    Monotone { dim: usize, interval: Domain<T>, increasing: bool, eta: T },
    /// `lo - f(x) <= 0` and `f(x) - hi <= 0`
    OutputBounded { lo: T, hi: T },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec<T> {
    #[serde(default)]
    pub id: usize,
    #[serde(flatten)]
    pub kind: ConstraintKind<T>,
    pub domain: Domain<T>,
}

impl ConstraintSpec<f64> {
    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ConstraintSpec<U> {
        let c = |v: f64| U::lit(v);
        let dom = |d: &Domain<f64>| Domain(d.0.iter().map(|&(lo, hi)| (c(lo), c(hi))).collect());
        let kind = match &self.kind {
            ConstraintKind::SymmetryArgs => ConstraintKind::SymmetryArgs,
            ConstraintKind::OddSymmetry => ConstraintKind::OddSymmetry,
            ConstraintKind::PointValue { x, y } => ConstraintKind::PointValue { x: x.iter().map(|&v| c(v)).collect(), y: c(*y) },
            ConstraintKind::DiagonalHalf => ConstraintKind::DiagonalHalf,
            ConstraintKind::UpperBoundByInput { dim } => ConstraintKind::UpperBoundByInput { dim: *dim },
            ConstraintKind::Sign { interval, positive } => ConstraintKind::Sign { interval: dom(interval), positive: *positive },
            ConstraintKind::Monotone { dim, interval, increasing, eta } => {
                ConstraintKind::Monotone { dim: *dim, interval: dom(interval), increasing: *increasing, eta: c(*eta) }
            }
            ConstraintKind::OutputBounded { lo, hi } => ConstraintKind::OutputBounded { lo: c(*lo), hi: c(*hi) },
        };
        ConstraintSpec { id: self.id, kind, domain: dom(&self.domain) }
    }
}

impl<T: Scalar> ConstraintSpec<T> {
    pub fn new(id: usize, kind: ConstraintKind<T>, domain: Domain<T>) -> Self {
        ConstraintSpec { id, kind, domain }
    }

    pub fn form(&self) -> Form {
        match self.kind {
            ConstraintKind::UpperBoundByInput { .. }
            | ConstraintKind::Sign { .. }
            | ConstraintKind::Monotone { .. }
            | ConstraintKind::OutputBounded { .. } => Form::Inequality,
            _ => Form::Equality,
        }
    }

    /// Box from which this spec's sample points are drawn.
    pub fn sampling_box(&self) -> &Domain<T> {
        match &self.kind {
            ConstraintKind::Sign { interval, .. } | ConstraintKind::Monotone { interval, .. } => interval,
            _ => &self.domain,
        }
    }

    pub fn validate(&self, n_inputs: usize) -> Result<()> {
        let name = format!("constraint {}", self.id);
        self.domain.validate(&name)?;
        if self.domain.dims() != n_inputs {
            return Err(Error::Config(format!("{name}: domain has {} dims, expected {n_inputs}", self.domain.dims())));
        }
        match &self.kind {
            ConstraintKind::SymmetryArgs if n_inputs < 2 => {
                Err(Error::Config(format!("{name}: argument symmetry needs two inputs")))
            }
            ConstraintKind::PointValue { x, .. } if x.len() != n_inputs => {
                Err(Error::Config(format!("{name}: point has wrong dimension")))
            }
            ConstraintKind::UpperBoundByInput { dim } if *dim >= n_inputs => {
                Err(Error::Config(format!("{name}: input {dim} out of range")))
            }
            ConstraintKind::Sign { interval, .. } => {
                interval.validate(&name)?;
                if interval.dims() != n_inputs {
                    return Err(Error::Config(format!("{name}: interval has wrong dimension")));
                }
                Ok(())
            }
            ConstraintKind::Monotone { dim, interval, eta, .. } => {
                interval.validate(&name)?;
                if interval.dims() != n_inputs || *dim >= n_inputs {
                    return Err(Error::Config(format!("{name}: monotone dimension out of range")));
                }
                let (lo, hi) = interval.0[*dim];
                if !(*eta > T::zero()) || !(hi - lo > *eta) {
                    return Err(Error::Config(format!("{name}: eta must be positive and below the interval width")));
                }
                Ok(())
            }
            ConstraintKind::OutputBounded { lo, hi } if !(lo <= hi) => {
                Err(Error::Config(format!("{name}: empty output bound")))
            }
            _ => Ok(()),
        }
    }

    /// Draws one fresh sample for this spec.
    pub fn draw_sample(&self, spec_index: usize, rng: &mut RandomStream) -> ConstraintSample<T> {
        let one = |p: Vec<T>| ConstraintSample { spec: spec_index, points: vec![p], target: None };
        match &self.kind {
            ConstraintKind::PointValue { x, y } => {
                ConstraintSample { spec: spec_index, points: vec![x.clone()], target: Some(*y) }
            }
            ConstraintKind::DiagonalHalf => {
                let (lo, hi) = self.domain.0[0];
                one(vec![uniform(rng, lo, hi); self.domain.dims()])
            }
            ConstraintKind::Sign { interval, .. } => one(interval.sample(rng)),
            ConstraintKind::Monotone { dim, interval, eta, .. } => loop {
                let (lo, hi) = interval.0[*dim];
                let mut x1 = interval.sample(rng);
                x1[*dim] = uniform(rng, lo, hi - *eta);
                let offset = T::lit(rng.random_range(0.0..eta.as_f64()));
                let mut x2 = x1.clone();
                x2[*dim] = x1[*dim] + offset;
                let gap = x2[*dim] - x1[*dim];
                if gap > T::zero() && gap < *eta && x2[*dim] <= hi {
                    break ConstraintSample { spec: spec_index, points: vec![x1, x2], target: None };
                }
            },
            _ => one(self.domain.sample(rng)),
        }
    }

    /// Sample anchored at a given point, used by grid validation.
    ///
    /// Returns `None` where the spec does not apply at `p` (outside a sign or
    /// monotonicity interval, or a monotone partner that leaves the interval).
    pub fn anchored_sample(&self, spec_index: usize, p: &[T]) -> Option<ConstraintSample<T>> {
        let one = |p: Vec<T>| Some(ConstraintSample { spec: spec_index, points: vec![p], target: None });
        match &self.kind {
            ConstraintKind::PointValue { x, y } => {
                Some(ConstraintSample { spec: spec_index, points: vec![x.clone()], target: Some(*y) })
            }
            ConstraintKind::DiagonalHalf => one(vec![p[0]; p.len()]),
            ConstraintKind::Sign { interval, .. } => interval.contains(p).then(|| one(p.to_vec())).flatten(),
            ConstraintKind::Monotone { dim, interval, eta, .. } => {
                let mut q = p.to_vec();
                q[*dim] = p[*dim] + *eta;
                (interval.contains(p) && interval.contains(&q))
                    .then(|| ConstraintSample { spec: spec_index, points: vec![p.to_vec(), q], target: None })
            }
            _ => one(p.to_vec()),
        }
    }

    /// Points at which the model must be evaluated for `sample`, in a fixed order.
    pub fn eval_points(&self, sample: &ConstraintSample<T>) -> Vec<Vec<T>> {
        match &self.kind {
            ConstraintKind::SymmetryArgs => {
                let x = &sample.points[0];
                let mut swapped = x.clone();
                swapped.swap(0, 1);
                vec![x.clone(), swapped]
            }
            ConstraintKind::OddSymmetry => {
                let x = &sample.points[0];
                vec![x.clone(), x.iter().map(|&v| -v).collect()]
            }
            _ => sample.points.clone(),
        }
    }

    /// Violation given the model outputs at [`Self::eval_points`].
    pub fn violation_from_values(&self, sample: &ConstraintSample<T>, v: &[T]) -> T {
        let hinge = |g: T| {
            let m = g.max(T::zero());
            m * m
        };
        let x = &sample.points[0];
        match &self.kind {
            ConstraintKind::SymmetryArgs => (v[0] - v[1]).powi(2),
            ConstraintKind::OddSymmetry => (v[0] + v[1]).powi(2),
            ConstraintKind::PointValue { y, .. } => (v[0] - sample.target.unwrap_or(*y)).powi(2),
            ConstraintKind::DiagonalHalf => (v[0] - x[0] / T::lit(2.0)).powi(2),
            ConstraintKind::UpperBoundByInput { dim } => hinge(v[0] - x[*dim]),
            ConstraintKind::Sign { positive, .. } => hinge(if *positive { -v[0] } else { v[0] }),
            ConstraintKind::Monotone { increasing, .. } => hinge(if *increasing { v[0] - v[1] } else { v[1] - v[0] }),
            ConstraintKind::OutputBounded { lo, hi } => hinge(*lo - v[0]) + hinge(v[0] - *hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSample<T> {
    /// Position of the owning spec in [`ConstraintSet::specs`].
    pub spec: usize,
    /// One point, or two for monotonicity pairs.
    pub points: Vec<Vec<T>>,
    pub target: Option<T>,
}

/// Sums of squared hinge (`e_g`) and squared residual (`e_h`) violations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ViolationBreakdown<T> {
    pub e_g: T,
    pub e_h: T,
    pub n_samples: usize,
}

impl<T: Scalar> ViolationBreakdown<T> {
    pub fn objective(&self) -> T {
        (self.e_g + self.e_h) / T::lit(self.n_samples as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet<T> {
    specs: Vec<ConstraintSpec<T>>,
    samples: Vec<ConstraintSample<T>>,
    points: Vec<Vec<T>>,
    offsets: Vec<usize>,
    cursor: usize,
    version: u64,
}

/// Spreads `total` samples over `specs` as evenly as possible, remainder to the earliest.
pub fn build_constraint_set<T: Scalar>(
    specs: Vec<ConstraintSpec<T>>,
    total: usize,
    rng: &mut RandomStream,
) -> Result<ConstraintSet<T>> {
    if specs.is_empty() {
        return Err(Error::Config("constraint spec list is empty".into()));
    }
    if total < specs.len() {
        return Err(Error::Config(format!("{total} samples cannot cover {} constraints", specs.len())));
    }
    let n_inputs = specs[0].domain.dims();
    for s in &specs {
        s.validate(n_inputs)?;
    }
    let k = specs.len();
    let mut set = ConstraintSet {
        specs,
        samples: Vec::with_capacity(total),
        points: Vec::new(),
        offsets: vec![0],
        cursor: total % k,
        version: 0,
    };
    for i in 0..k {
        let count = total / k + usize::from(i < total % k);
        for _ in 0..count {
            let s = set.specs[i].draw_sample(i, rng);
            set.push(s);
        }
    }
    Ok(set)
}

/// Returns a copy of `cset` grown by `n_new` fresh samples, allocated round-robin.
pub fn update_constraint_set<T: Scalar>(cset: &ConstraintSet<T>, n_new: usize, rng: &mut RandomStream) -> ConstraintSet<T> {
    let mut out = cset.clone();
    out.extend_random(n_new, rng);
    out
}

impl<T: Scalar> ConstraintSet<T> {
    /// Builds a set from explicit samples. Every sample must reference an existing spec.
    pub fn from_samples(specs: Vec<ConstraintSpec<T>>, samples: Vec<ConstraintSample<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("constraint set needs at least one sample".into()));
        }
        if let Some(s) = samples.iter().find(|s| s.spec >= specs.len()) {
            return Err(Error::Config(format!("sample references missing spec {}", s.spec)));
        }
        let mut set = ConstraintSet { specs, samples: Vec::new(), points: Vec::new(), offsets: vec![0], cursor: 0, version: 0 };
        for s in samples {
            set.push(s);
        }
        Ok(set)
    }

    fn push(&mut self, s: ConstraintSample<T>) {
        self.points.extend(self.specs[s.spec].eval_points(&s));
        self.offsets.push(self.points.len());
        self.samples.push(s);
    }

    pub fn extend_random(&mut self, n_new: usize, rng: &mut RandomStream) {
        if n_new == 0 {
            return;
        }
        for _ in 0..n_new {
            let i = self.cursor;
            let s = self.specs[i].draw_sample(i, rng);
            self.push(s);
            self.cursor = (self.cursor + 1) % self.specs.len();
        }
        self.version += 1;
    }

    /// Appends one explicit sample.
    pub fn push_sample(&mut self, s: ConstraintSample<T>) -> Result<()> {
        if s.spec >= self.specs.len() {
            return Err(Error::Config(format!("sample references missing spec {}", s.spec)));
        }
        self.push(s);
        self.version += 1;
        Ok(())
    }

    pub fn specs(&self) -> &[ConstraintSpec<T>] {
        &self.specs
    }

    pub fn samples(&self) -> &[ConstraintSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Incremented on every change, so scores from different versions can be told apart.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// All evaluation points of all samples, flattened in sample order.
    pub fn eval_points(&self) -> &[Vec<T>] {
        &self.points
    }

    /// Violation breakdown of an arbitrary function.
    pub fn breakdown_with(&self, f: impl Fn(&[T]) -> T) -> ViolationBreakdown<T> {
        let values: Vec<T> = self.points.iter().map(|p| f(p)).collect();
        self.breakdown_from_values(&values)
    }

    /// Violation breakdown from model outputs at every point of [`Self::eval_points`].
    pub fn breakdown_from_values(&self, values: &[T]) -> ViolationBreakdown<T> {
        let (mut e_g, mut e_h) = (T::zero(), T::zero());
        for (i, s) in self.samples.iter().enumerate() {
            let spec = &self.specs[s.spec];
            let v = spec.violation_from_values(s, &values[self.offsets[i]..self.offsets[i + 1]]);
            match spec.form() {
                Form::Inequality => e_g = e_g + v,
                Form::Equality => e_h = e_h + v,
            }
        }
        ViolationBreakdown { e_g, e_h, n_samples: self.samples.len() }
    }
}

/// Squared violation of one sample by `model`.
pub fn violation<T: Scalar>(model: &Model<T>, sample: &ConstraintSample<T>, spec: &ConstraintSpec<T>) -> T {
    let values: Vec<T> = spec.eval_points(sample).iter().map(|p| model.predict(p)).collect();
    spec.violation_from_values(sample, &values)
}

pub fn constraint_breakdown<T: Scalar>(model: &Model<T>, cset: &ConstraintSet<T>) -> ViolationBreakdown<T> {
    cset.breakdown_with(|p| model.predict(p))
}

/// Mean violation over all samples of `cset`.
pub fn constraint_objective<T: Scalar>(model: &Model<T>, cset: &ConstraintSet<T>) -> T {
    constraint_breakdown(model, cset).objective()
}
