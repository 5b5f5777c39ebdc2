//! Multi-run experiments and their reports.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use mosr_core::benchmarks::{lossless, performance_measures, select_model, RunRecord, RunReport};
use mosr_core::moea::NoObserver;
use mosr_core::rng::{label_hash, substream};
use mosr_core::{build_constraint_set, rank_sum_test, run_base, run_mo, Model, RunConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{data_seed, method_config, run_seed, CampaignConfig, Method, Task};
use crate::dataset::write_file;
use crate::error::{CliError, Result};
use crate::export::{front_csv, front_rows, FrontRow};

/// Significance level of the pairwise rank-sum comparisons.
pub const SIGNIFICANCE: f64 = 0.01;

/// Everything one run leaves behind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub problem: String,
    pub master_seed: u64,
    pub method: Method,
    pub index: usize,
    pub seed: u64,
    pub data_seed: u64,
    pub evaluations: u64,
    pub record: RunRecord,
    /// Final non-dominated models, by increasing training error.
    pub front: Vec<FrontRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    #[serde(flatten)]
    pub report: RunReport,
}

/// Two-sided rank-sum comparison of one per-run measure between two methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub measure: String,
    pub a: Method,
    pub b: Method,
    #[serde(with = "lossless")]
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub problem: String,
    pub master_seed: u64,
    pub methods: Vec<MethodReport>,
    pub comparisons: Vec<Comparison>,
}

/// Executes run `index` of `method`; panics inside the run propagate.
pub fn execute_run(task: &Task, base_cfg: &RunConfig, method: Method, master: u64, index: usize) -> Result<RunArtifact> {
    let problem = &task.problem;
    let seed = run_seed(master, method, index);
    let cfg = method_config(base_cfg, method, seed);
    let (train, test) = task.data(master, index);
    let specs = problem.constraint_specs.clone();
    let (models, evaluations): (Vec<Model<f64>>, u64) = match method {
        Method::Base => {
            // scored on the constraint set a multi-objective run with this seed starts from
            let cset = build_constraint_set(specs, problem.constraint_samples, &mut substream(seed, &[label_hash("cset")]))?;
            (vec![run_base(&train, &cfg, Some(&cset))?], cfg.budget() as u64)
        }
        Method::Msngp | Method::MsngpLs => {
            let out = run_mo(&train, specs, problem.constraint_samples, &cfg, &mut NoObserver)?;
            (out.front, out.evaluations)
        }
    };
    let (_, record) = select_model(&models, problem, test.as_ref())
        .ok_or_else(|| CliError::Config("run produced no models".into()))?;
    Ok(RunArtifact {
        problem: task.name().to_string(),
        master_seed: master,
        method,
        index,
        seed,
        data_seed: data_seed(master, problem, index),
        evaluations,
        record,
        front: front_rows(&models),
    })
}

/// Like [`execute_run`], but a panic becomes a failed record instead of unwinding.
pub fn execute_run_contained(
    task: &Task,
    cfg: &RunConfig,
    method: Method,
    master: u64,
    index: usize,
) -> Result<RunArtifact> {
    match catch_unwind(AssertUnwindSafe(|| execute_run(task, cfg, method, master, index))) {
        Ok(r) => r,
        Err(_) => Ok(RunArtifact {
            problem: task.name().to_string(),
            master_seed: master,
            method,
            index,
            seed: run_seed(master, method, index),
            data_seed: data_seed(master, &task.problem, index),
            evaluations: 0,
            record: RunRecord::failed(),
            front: Vec::new(),
        }),
    }
}

/// Builds the aggregate report from per-run artifacts alone.
///
/// Methods appear in `methods` order; artifacts of other methods are ignored.
pub fn aggregate(problem: &str, master_seed: u64, methods: &[Method], runs: &[RunArtifact]) -> Aggregate {
    let per_method: Vec<Vec<&RunRecord>> = methods
        .iter()
        .map(|&m| {
            let mut rs: Vec<&RunArtifact> = runs.iter().filter(|r| r.method == m).collect();
            rs.sort_by_key(|r| r.index);
            rs.into_iter().map(|r| &r.record).collect()
        })
        .collect();
    let reports = methods
        .iter()
        .zip(&per_method)
        .map(|(&method, rs)| {
            let owned: Vec<RunRecord> = rs.iter().map(|r| (*r).clone()).collect();
            MethodReport { method, report: performance_measures(&owned) }
        })
        .collect();

    let measures: [(&str, fn(&RunRecord) -> Option<f64>); 4] = [
        ("mse", |r| Some(r.c_train)),
        ("mse_ref", |r| r.msd),
        ("viol", |r| Some(r.c_constr)),
        ("mse_test", |r| r.mse_test),
    ];
    let mut comparisons = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            for (name, get) in measures {
                let values = |rs: &[&RunRecord]| -> Vec<f64> {
                    rs.iter().filter(|r| !r.failed).filter_map(|r| get(r)).filter(|v| !v.is_nan()).collect()
                };
                let (a, b) = (values(&per_method[i]), values(&per_method[j]));
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let p = rank_sum_test(&a, &b);
                comparisons.push(Comparison {
                    measure: name.to_string(),
                    a: methods[i],
                    b: methods[j],
                    p_value: p,
                    significant: p < SIGNIFICANCE,
                });
            }
        }
    }
    Aggregate { problem: problem.to_string(), master_seed, methods: reports, comparisons }
}

pub fn artifact_path(out_dir: &Path, method: Method, index: usize) -> PathBuf {
    out_dir.join("runs").join(format!("{method}_{index:03}.json"))
}

pub fn front_path(out_dir: &Path, method: Method, index: usize) -> PathBuf {
    out_dir.join("fronts").join(format!("{method}_{index:03}.csv"))
}

pub fn aggregate_path(out_dir: &Path) -> PathBuf {
    out_dir.join("aggregate.json")
}

pub fn write_artifact(out_dir: &Path, a: &RunArtifact) -> Result<()> {
    let json = serde_json::to_string_pretty(a).expect("artifact serializes");
    write_file(&artifact_path(out_dir, a.method, a.index), json.as_bytes())?;
    write_file(&front_path(out_dir, a.method, a.index), front_csv(&a.front).as_bytes())
}

pub fn read_artifacts(out_dir: &Path) -> Result<Vec<RunArtifact>> {
    let dir = out_dir.join("runs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Runs every method `n_runs` times, in parallel, and writes per-run and aggregate reports under `out_dir`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Aggregate> {
    let task = cfg.task()?;
    let run_cfg = cfg.run_config(&task.problem)?;
    let jobs: Vec<(Method, usize)> =
        cfg.methods.iter().flat_map(|&m| (0..cfg.n_runs).map(move |i| (m, i))).collect();
    let artifacts = jobs
        .par_iter()
        .map(|&(m, i)| execute_run_contained(&task, &run_cfg, m, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    for a in &artifacts {
        write_artifact(&cfg.out_dir, a)?;
    }
    let agg = aggregate(task.name(), cfg.seed, &cfg.methods, &artifacts);
    let json = serde_json::to_string_pretty(&agg).expect("aggregate serializes");
    write_file(&aggregate_path(&cfg.out_dir), json.as_bytes())?;
    Ok(agg)
}
