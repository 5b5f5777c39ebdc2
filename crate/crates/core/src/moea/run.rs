//! Outer loops: the multi-objective run and the single-objective baseline.

use rayon::prelude::*;

use super::config::{BetaMode, RunConfig};
use super::nsga::{merge, tournament_index, Population};
use crate::constraints::{build_constraint_set, ConstraintSet, ConstraintSpec};
use crate::error::Result;
use crate::expr::{init_node_array, mutate};
use crate::linear::{fit_ls_cached, fit_mols_cached, score, Dataset, FeatureCache, Model, ModelScores};
use crate::rng::{label_hash, substream, RandomStream};
use crate::scalar::Scalar;

fn tag(label: &str) -> u64 {
    label_hash(label)
}

/// Offspring acceptance event: scores of the fixed parent, the child before
/// the step, and the accepted candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acceptance<T> {
    pub parent: ModelScores<T>,
    pub child: ModelScores<T>,
    pub accepted: ModelScores<T>,
}

/// Hooks for instrumenting a multi-objective run. All methods default to no-ops.
pub trait Observer<T> {
    /// Called for every accepted offspring step, in slot order after each generation.
    fn on_accept(&mut self, _event: &Acceptance<T>) {}
    /// Called at the end of each generation, after merging and any constraint update.
    fn on_generation(&mut self, _gen: usize, _pop: &Population<T>, _cset: &ConstraintSet<T>) {}
    /// Whether acceptance events should be collected at all.
    fn wants_acceptances(&self) -> bool {
        false
    }
}

/// Observer that records nothing.
pub struct NoObserver;

impl<T> Observer<T> for NoObserver {}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    /// Non-dominated models of the final population.
    pub front: Vec<Model<T>>,
    pub population: Population<T>,
    /// Constraint set the final scores refer to.
    pub cset: ConstraintSet<T>,
    /// Candidates evaluated inside offspring production.
    pub evaluations: u64,
}

/// Fits coefficients for `genome` per `cfg.beta_mode` and scores the result.
pub fn evaluate_candidate<T: Scalar>(
    genome: crate::expr::NodeArray<T>,
    data: &Dataset<T>,
    cset: &ConstraintSet<T>,
    cfg: &RunConfig,
    rng: &mut RandomStream,
) -> Model<T> {
    let cache = FeatureCache::new(&genome, data, Some(cset));
    let (beta, scores) = match cfg.beta_mode {
        BetaMode::LeastSquares => {
            let b = fit_ls_cached(&cache, data);
            let s = cache.scores(&b, data, cset);
            (b, s)
        }
        BetaMode::MoLocalSearch => fit_mols_cached(&cache, data, cset, cfg.ls_iters, cfg.ls_sigma, rng, |_| {}),
    };
    Model { genome, beta, scores: Some(scores) }
}

/// Produces one offspring by `cfg.max_iters` mutate-refit-score steps.
///
/// A candidate replaces the child unless the original parent or the
/// current child dominates it.
pub fn produce_offspring<T: Scalar>(
    parent: &Model<T>,
    data: &Dataset<T>,
    cset: &ConstraintSet<T>,
    cfg: &RunConfig,
    rng: &mut RandomStream,
) -> Model<T> {
    produce_offspring_with(parent, data, cset, cfg, rng, |_| {})
}

pub fn produce_offspring_with<T: Scalar>(
    parent: &Model<T>,
    data: &Dataset<T>,
    cset: &ConstraintSet<T>,
    cfg: &RunConfig,
    rng: &mut RandomStream,
    mut on_accept: impl FnMut(Acceptance<T>),
) -> Model<T> {
    let parent_scores = parent.scores_or_sentinel();
    let mut child = parent.clone();
    for _ in 0..cfg.max_iters {
        let genome = mutate(&child.genome, rng);
        let temp = evaluate_candidate(genome, data, cset, cfg, rng);
        let temp_scores = temp.scores_or_sentinel();
        let child_scores = child.scores_or_sentinel();
        if !parent_scores.dominates(&temp_scores) && !child_scores.dominates(&temp_scores) {
            on_accept(Acceptance { parent: parent_scores, child: child_scores, accepted: temp_scores });
            child = temp;
        }
    }
    child
}

fn rescore<T: Scalar>(pop: &mut Population<T>, data: &Dataset<T>, cset: &ConstraintSet<T>) {
    pop.models.par_iter_mut().for_each(|m| m.scores = Some(score(m, data, cset)));
    pop.cset_version = cset.version();
}

/// True when every stored score equals a fresh recomputation on `(data, cset)`.
pub fn audit_scores<T: Scalar>(pop: &Population<T>, data: &Dataset<T>, cset: &ConstraintSet<T>) -> bool {
    pop.cset_version == cset.version()
        && pop.models.iter().all(|m| {
            let fresh = score(m, data, cset);
            match m.scores {
                Some(s) => s == fresh || (s.is_sentinel() && fresh.is_sentinel()),
                None => false,
            }
        })
}

/// Multi-objective run; returns the final non-dominated set.
///
/// Every random draw comes from a substream of `cfg.seed` labelled by its
/// role (initial model slot, generation and offspring slot, constraint
/// update), so results do not depend on thread scheduling.
pub fn run_mo<T: Scalar>(
    data: &Dataset<T>,
    specs: Vec<ConstraintSpec<T>>,
    initial_samples: usize,
    cfg: &RunConfig,
    observer: &mut dyn Observer<T>,
) -> Result<RunOutcome<T>> {
    cfg.validate()?;
    let array_cfg = cfg.array_config(data.n_inputs());
    array_cfg.validate()?;
    let seed = cfg.seed;
    let mut cset = build_constraint_set(specs, initial_samples, &mut substream(seed, &[tag("cset")]))?;
    let n_new = cfg.samples_per_update(initial_samples);

    let models = (0..cfg.population_size)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[tag("init"), i as u64]);
            let genome = init_node_array(&array_cfg, &mut rng)?;
            Ok(evaluate_candidate(genome, data, &cset, cfg, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pop = Population::new(models, cset.version());
    let mut evaluations = 0u64;
    let trace = observer.wants_acceptances();

    for gen in 1..=cfg.max_gens {
        let ranking = pop.ranking();
        let produced: Vec<(Model<T>, Vec<Acceptance<T>>)> = (0..cfg.population_size)
            .into_par_iter()
            .map(|slot| {
                let mut rng = substream(seed, &[tag("offspring"), gen as u64, slot as u64]);
                let parent = &pop.models[tournament_index(&ranking, cfg.tournament_size, &mut rng)];
                let mut events = Vec::new();
                let child = produce_offspring_with(parent, data, &cset, cfg, &mut rng, |e| {
                    if trace {
                        events.push(e)
                    }
                });
                (child, events)
            })
            .collect();
        evaluations += (cfg.population_size * cfg.max_iters) as u64;
        let mut children = Vec::with_capacity(produced.len());
        for (child, events) in produced {
            for e in &events {
                observer.on_accept(e);
            }
            children.push(child);
        }
        pop = merge(pop, Population::new(children, cset.version()))?;
        if gen % cfg.period == 0 {
            cset.extend_random(n_new, &mut substream(seed, &[tag("update"), gen as u64]));
            rescore(&mut pop, data, &cset);
        }
        observer.on_generation(gen, &pop, &cset);
    }
    debug_assert!(audit_scores(&pop, data, &cset));
    Ok(RunOutcome { front: pop.nondominated(), population: pop, cset, evaluations })
}

/// Single-model first-improvement local search minimizing training error only.
///
/// Runs `cfg.budget()` mutate-refit steps with least-squares coefficients.
/// When `report_cset` is given the final model is also scored on it;
/// otherwise its constraint objective is left at zero.
pub fn run_base<T: Scalar>(data: &Dataset<T>, cfg: &RunConfig, report_cset: Option<&ConstraintSet<T>>) -> Result<Model<T>> {
    run_base_traced(data, cfg, cfg.budget(), report_cset, |_| {})
}

/// [`run_base`] with an explicit step budget; `on_step` sees the current training error after every step.
pub fn run_base_traced<T: Scalar>(
    data: &Dataset<T>,
    cfg: &RunConfig,
    budget: usize,
    report_cset: Option<&ConstraintSet<T>>,
    mut on_step: impl FnMut(T),
) -> Result<Model<T>> {
    let array_cfg = cfg.array_config(data.n_inputs());
    array_cfg.validate()?;
    let mut rng = substream(cfg.seed, &[tag("base")]);
    let fit = |genome| {
        let cache = FeatureCache::new(&genome, data, None);
        let beta = fit_ls_cached(&cache, data);
        let c = cache.c_train(&beta, data);
        (Model { genome, beta, scores: None }, c)
    };
    let (mut current, mut err) = fit(init_node_array(&array_cfg, &mut rng)?);
    for _ in 0..budget {
        let (cand, e) = fit(mutate(&current.genome, &mut rng));
        let better = if cfg.base_accept_equal { e <= err } else { e < err };
        if better {
            current = cand;
            err = e;
        }
        on_step(err);
    }
    current.scores = Some(match report_cset {
        Some(c) => score(&current, data, c),
        None => ModelScores::new(err, T::zero()),
    });
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{ConstraintKind, Domain};
    use crate::expr::ElementaryOp;

    fn linear_data() -> Dataset<f64> {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 4) as f64, (i / 4) as f64 * 0.5]).collect();
        let ys = xs.iter().map(|x| x[0] + 2.0 * x[1]).collect();
        Dataset::new(xs, ys).unwrap()
    }

    fn small_cfg() -> RunConfig {
        RunConfig {
            population_size: 6,
            max_gens: 3,
            max_iters: 4,
            ls_iters: 5,
            array_size: 40,
            function_set: vec![ElementaryOp::Add],
            seed: 5,
            ..RunConfig::default()
        }
    }

    fn specs() -> Vec<ConstraintSpec<f64>> {
        let d = Domain::new(vec![(0.0, 3.0), (0.0, 2.0)]);
        vec![ConstraintSpec::new(0, ConstraintKind::OutputBounded { lo: 0.0, hi: 10.0 }, d)]
    }

    #[test]
    fn zero_iterations_copy_parent() {
        let data = linear_data();
        let cfg = RunConfig { max_iters: 0, ..small_cfg() };
        let cset = build_constraint_set(specs(), 5, &mut substream(1, &[])).unwrap();
        let g = init_node_array(&cfg.array_config(2), &mut substream(2, &[])).unwrap();
        let parent = evaluate_candidate(g, &data, &cset, &cfg, &mut substream(3, &[]));
        let child = produce_offspring(&parent, &data, &cset, &cfg, &mut substream(4, &[]));
        assert_eq!(child, parent);
    }

    #[test]
    fn base_trajectory_is_non_increasing_and_reaches_exact_fit() {
        let data = linear_data();
        let cfg = small_cfg();
        let mut traj = Vec::new();
        let m = run_base_traced(&data, &cfg, 2000, None, |e| traj.push(e)).unwrap();
        assert!(traj.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.scores.unwrap().c_train <= traj[0]);
        assert!(m.scores.unwrap().c_train < 1e-20, "{}", m.scores.unwrap().c_train);
        let m0 = run_base_traced(&data, &cfg, 0, None, |_| {}).unwrap();
        let init = init_node_array::<f64>(&cfg.array_config(2), &mut substream(cfg.seed, &[tag("base")])).unwrap();
        assert_eq!(m0.genome, init);
    }

    #[test]
    fn mo_run_counts_and_front() {
        let data = linear_data();
        for mode in [BetaMode::LeastSquares, BetaMode::MoLocalSearch] {
            let cfg = RunConfig { beta_mode: mode, ..small_cfg() };
            let out = run_mo(&data, specs(), 10, &cfg, &mut NoObserver).unwrap();
            assert_eq!(out.evaluations as usize, cfg.budget());
            assert_eq!(out.population.len(), cfg.population_size);
            let s: Vec<_> = out.front.iter().map(|m| m.scores.unwrap()).collect();
            for a in &s {
                assert!(s.iter().all(|b| !b.dominates(a)));
            }
            assert!(audit_scores(&out.population, &data, &out.cset));
            // one update at generation 2 with 10% of 10 samples
            assert_eq!(out.cset.len(), 11);
        }
    }
}
