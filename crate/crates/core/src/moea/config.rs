use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{ArrayConfig, ElementaryOp};

/// How feature coefficients are fitted for every candidate model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    LeastSquares,
    MoLocalSearch,
}

/// Every hyperparameter of a multi-objective or baseline run.
///
/// Defaults are the standard experimental settings (problem-specific
/// entries default to the two-input arithmetic setting).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Number of models in the population (`M`).
    pub population_size: usize,
    pub max_gens: usize,
    /// Mutation iterations spent producing one offspring.
    pub max_iters: usize,
    /// Coefficient local-search rounds per candidate.
    pub ls_iters: usize,
    /// Generations between constraint-set updates.
    pub period: usize,
    pub tournament_size: usize,
    pub n_features: usize,
    pub depth_limit: usize,
    pub array_size: usize,
    pub function_set: Vec<ElementaryOp>,
    pub n_constants: usize,
    pub beta_mode: BetaMode,
    pub ls_sigma: f64,
    /// `(rewire, retarget)` mutation probabilities.
    pub mutation_mix: (f64, f64),
    pub seed: u64,
    /// Samples added per constraint-set update; `None` means 10% of the initial size, rounded up.
    pub n_new_constraints: Option<usize>,
    /// Baseline accepts equal training error (`<=`) rather than only strict improvements.
    pub base_accept_equal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            population_size: 50,
            max_gens: 40,
            max_iters: 50,
            ls_iters: 50,
            period: 2,
            tournament_size: 3,
            n_features: 3,
            depth_limit: 5,
            array_size: 400,
            function_set: ElementaryOp::arithmetic(),
            n_constants: 10,
            beta_mode: BetaMode::LeastSquares,
            ls_sigma: 0.1,
            mutation_mix: (0.7, 0.3),
            seed: 0,
            n_new_constraints: None,
            base_accept_equal: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size < 2 {
            return fail("population size must be at least 2");
        }
        if self.max_gens == 0 {
            return fail("max_gens must be at least 1");
        }
        if self.tournament_size < 2 {
            return fail("tournament size must be at least 2");
        }
        if self.period == 0 {
            return fail("period must be at least 1");
        }
        if !(self.ls_sigma > 0.0) {
            return fail("ls_sigma must be positive");
        }
        let (a, b) = self.mutation_mix;
        if a < 0.0 || b < 0.0 || ((a + b) - 1.0).abs() > 1e-9 {
            return fail("mutation probabilities must be nonnegative and sum to 1");
        }
        Ok(())
    }

    pub fn array_config(&self, n_inputs: usize) -> ArrayConfig {
        ArrayConfig {
            array_size: self.array_size,
            n_constants: self.n_constants,
            n_inputs,
            function_set: self.function_set.clone(),
            n_features: self.n_features,
            depth_limit: self.depth_limit,
            rewire_prob: self.mutation_mix.0,
        }
    }

    /// Candidate evaluations of one multi-objective run, also the baseline's budget.
    pub fn budget(&self) -> usize {
        self.population_size * self.max_gens * self.max_iters
    }

    pub fn samples_per_update(&self, initial: usize) -> usize {
        self.n_new_constraints.unwrap_or_else(|| initial.div_ceil(10))
    }
}
