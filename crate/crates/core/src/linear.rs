//! Linear-in-parameters models `f(x) = b0 + sum_i b_i * phi_i(x)` over genome features.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::expr::{to_infix, NodeArray};
use crate::linalg;
use crate::rng::RandomStream;
use crate::scalar::{format_exact, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    inputs: Vec<Vec<T>>,
    targets: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: Vec<Vec<T>>, targets: Vec<T>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Dataset("no data rows".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::Dataset(format!("{} inputs but {} targets", inputs.len(), targets.len())));
        }
        let n = inputs[0].len();
        if n == 0 {
            return Err(Error::Dataset("rows have no input columns".into()));
        }
        if let Some(i) = inputs.iter().position(|x| x.len() != n) {
            return Err(Error::Dataset(format!("row {i} has {} inputs, expected {n}", inputs[i].len())));
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs[0].len()
    }
}

/// The two minimized objectives: training MSE and mean constraint violation.
///
/// Both are `+inf` (the sentinel) for models with a non-finite output at any
/// training or constraint point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScores<T> {
    pub c_train: T,
    pub c_constr: T,
}

impl<T: Scalar> ModelScores<T> {
    pub fn new(c_train: T, c_constr: T) -> Self {
        if c_train.is_finite() && c_constr.is_finite() {
            ModelScores { c_train, c_constr }
        } else {
            Self::sentinel()
        }
    }

    pub fn sentinel() -> Self {
        ModelScores { c_train: T::infinity(), c_constr: T::infinity() }
    }

    pub fn is_sentinel(&self) -> bool {
        !(self.c_train.is_finite() && self.c_constr.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub genome: NodeArray<T>,
    /// `beta[0]` is the intercept.
    pub beta: Vec<T>,
    pub scores: Option<ModelScores<T>>,
}

impl<T: Scalar> Model<T> {
    /// Wraps a genome with all-zero coefficients and no scores.
    pub fn new(genome: NodeArray<T>) -> Self {
        let beta = vec![T::zero(); genome.n_features() + 1];
        Model { genome, beta, scores: None }
    }

    pub fn with_beta(genome: NodeArray<T>, beta: Vec<T>) -> Result<Self> {
        if beta.len() != genome.n_features() + 1 {
            return Err(Error::Config(format!(
                "{} coefficients for {} features",
                beta.len(),
                genome.n_features()
            )));
        }
        Ok(Model { genome, beta, scores: None })
    }

    pub fn predict(&self, x: &[T]) -> T {
        self.genome
            .identity_links()
            .iter()
            .zip(&self.beta[1..])
            .fold(self.beta[0], |acc, (&t, &b)| acc + b * self.genome.eval_node(t, x))
    }

    /// Scores, or the sentinel when the model has not been scored.
    pub fn scores_or_sentinel(&self) -> ModelScores<T> {
        self.scores.unwrap_or_else(ModelScores::sentinel)
    }

    /// Infix text with the coefficients inlined, evaluated in the same
    /// order as [`Self::predict`].
    pub fn to_infix(&self) -> String {
        let mut s = format_exact(self.beta[0]);
        for (&t, &b) in self.genome.identity_links().iter().zip(&self.beta[1..]) {
            s = format!("({s} + ({} * {}))", format_exact(b), to_infix(&self.genome, t));
        }
        s
    }
}

pub fn predict<T: Scalar>(model: &Model<T>, x: &[T]) -> T {
    model.predict(x)
}

/// Feature values of one genome on the training inputs and on every constraint evaluation point.
#[derive(Clone, Debug)]
pub struct FeatureCache<T> {
    n_features: usize,
    train: Vec<T>,
    constr: Vec<T>,
    finite: bool,
}

impl<T: Scalar> FeatureCache<T> {
    pub fn new(genome: &NodeArray<T>, data: &Dataset<T>, cset: Option<&ConstraintSet<T>>) -> Self {
        let prog = genome.feature_program();
        let nf = prog.n_features();
        let mut scratch = Vec::new();
        let mut row = vec![T::zero(); nf];
        let mut collect = |points: &[Vec<T>]| {
            let mut out = Vec::with_capacity(points.len() * nf);
            for p in points {
                prog.eval(genome, p, &mut scratch, &mut row);
                out.extend_from_slice(&row);
            }
            out
        };
        let train = collect(data.inputs());
        let constr = cset.map(|c| collect(c.eval_points())).unwrap_or_default();
        let finite = train.iter().chain(&constr).all(|v| v.is_finite());
        FeatureCache { n_features: nf, train, constr, finite }
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    fn combine<'a>(&'a self, feats: &'a [T], beta: &'a [T]) -> impl Iterator<Item = T> + 'a {
        feats
            .chunks(self.n_features.max(1))
            .map(move |f| f.iter().zip(&beta[1..]).fold(beta[0], |acc, (&v, &b)| acc + b * v))
    }

    /// Training-set predictions for `beta`.
    pub fn train_predictions(&self, beta: &[T]) -> Vec<T> {
        self.combine(&self.train, beta).collect()
    }

    pub fn c_train(&self, beta: &[T], data: &Dataset<T>) -> T {
        if !self.finite {
            return T::infinity();
        }
        let sse: T = self
            .combine(&self.train, beta)
            .zip(data.targets())
            .map(|(p, &y)| (p - y) * (p - y))
            .sum();
        let v = sse / T::lit(data.len() as f64);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    }

    /// Both objectives for `beta`; requires the cache to have been built with `cset`.
    pub fn scores(&self, beta: &[T], data: &Dataset<T>, cset: &ConstraintSet<T>) -> ModelScores<T> {
        if !self.finite {
            return ModelScores::sentinel();
        }
        let c_train = self.c_train(beta, data);
        let values: Vec<T> = self.combine(&self.constr, beta).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return ModelScores::sentinel();
        }
        ModelScores::new(c_train, cset.breakdown_from_values(&values).objective())
    }

    fn design_rows(&self) -> Vec<Vec<T>> {
        self.train
            .chunks(self.n_features.max(1))
            .map(|f| std::iter::once(T::one()).chain(f.iter().copied()).collect())
            .collect()
    }
}

/// Least-squares coefficients from precomputed features; zeros when features are non-finite.
pub fn fit_ls_cached<T: Scalar>(cache: &FeatureCache<T>, data: &Dataset<T>) -> Vec<T> {
    let zeros = vec![T::zero(); cache.n_features + 1];
    if !cache.finite {
        return zeros;
    }
    linalg::least_squares(&cache.design_rows(), data.targets()).unwrap_or(zeros)
}

/// Fits `model.beta` by least squares on `data` and returns it.
///
/// A feature that is non-finite on any training point yields the zero
/// vector and marks the model's scores as the sentinel.
pub fn fit_beta_ls<T: Scalar>(model: &mut Model<T>, data: &Dataset<T>) -> Vec<T> {
    let cache = FeatureCache::new(&model.genome, data, None);
    model.beta = fit_ls_cached(&cache, data);
    if !cache.finite {
        model.scores = Some(ModelScores::sentinel());
    }
    model.beta.clone()
}

/// Multi-objective local search on the coefficients, from precomputed features.
///
/// `on_accept` sees the scores of every accepted step, in order.
pub fn fit_mols_cached<T: Scalar>(
    cache: &FeatureCache<T>,
    data: &Dataset<T>,
    cset: &ConstraintSet<T>,
    iters: usize,
    sigma: f64,
    rng: &mut RandomStream,
    mut on_accept: impl FnMut(&ModelScores<T>),
) -> (Vec<T>, ModelScores<T>) {
    let mut beta: Vec<T> = (0..=cache.n_features).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    let mut current = cache.scores(&beta, data, cset);
    let mut trial = beta.clone();
    for _ in 0..iters {
        for (t, &b) in trial.iter_mut().zip(&beta) {
            let z: f64 = StandardNormal.sample(rng);
            *t = b + T::lit(sigma * z);
        }
        let s = cache.scores(&trial, data, cset);
        if s.dominates(&current) {
            std::mem::swap(&mut beta, &mut trial);
            current = s;
            on_accept(&current);
        }
    }
    (beta, current)
}

/// Fits `model.beta` by the multi-objective coefficient local search and returns it.
///
/// Starts from a uniform draw on (-1, 1) per coefficient; each round adds
/// Gaussian noise of standard deviation `sigma` to every coefficient and keeps
/// the candidate only if it dominates the current one.
pub fn fit_beta_mols<T: Scalar>(
    model: &mut Model<T>,
    data: &Dataset<T>,
    cset: &ConstraintSet<T>,
    iters: usize,
    sigma: f64,
    rng: &mut RandomStream,
) -> Vec<T> {
    let cache = FeatureCache::new(&model.genome, data, Some(cset));
    let (beta, scores) = fit_mols_cached(&cache, data, cset, iters, sigma, rng, |_| {});
    model.beta = beta;
    model.scores = Some(scores);
    model.beta.clone()
}

/// Scores a model on both objectives.
pub fn score<T: Scalar>(model: &Model<T>, data: &Dataset<T>, cset: &ConstraintSet<T>) -> ModelScores<T> {
    FeatureCache::new(&model.genome, data, Some(cset)).scores(&model.beta, data, cset)
}
