//! Campaign configuration documents.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mosr_core::benchmarks::{generate_data, make_problem, ProblemDef};
use mosr_core::rng::{derive_seed, label_hash, stream};
use mosr_core::{BetaMode, ConstraintSpec, Dataset, Domain, RunConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dataset::load_dataset;
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Single-model local search on training error only.
    Base,
    /// Multi-objective run with least-squares coefficients.
    Msngp,
    /// Multi-objective run with coefficients from the multi-objective local search.
    #[value(name = "msngp_ls")]
    MsngpLs,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Base => "base",
            Method::Msngp => "msngp",
            Method::MsngpLs => "msngp_ls",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Base, Method::Msngp, Method::MsngpLs]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown method `{s}`")))
    }
}

/// Constraints for an external dataset: the input box, the specs and the initial sample count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub domain: Vec<(f64, f64)>,
    pub specs: Vec<ConstraintSpec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    60
}

fn default_runs() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// One experiment: a problem (built in, or external data with constraints),
/// the methods to compare, and how many independent runs each gets.
///
/// `run` overrides individual [`RunConfig`] fields on top of the problem's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub problem: Option<String>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub test_data: Option<PathBuf>,
    #[serde(default)]
    pub constraints: Option<ConstraintFile>,
    pub methods: Vec<Method>,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub run: Map<String, Value>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl CampaignConfig {
    /// Reads a JSON config; relative paths inside it are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: CampaignConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.data, &mut cfg.test_data].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(CliError::Config("n_runs must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(CliError::Config("methods must be distinct".into()));
        }
        match (&self.problem, &self.data) {
            (Some(_), Some(_)) => Err(CliError::Config("give either `problem` or `data`, not both".into())),
            (None, None) => Err(CliError::Config("one of `problem` or `data` is required".into())),
            (None, Some(_)) if self.constraints.is_none() => {
                Err(CliError::Config("external data need `constraints` with a domain and specs".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn task(&self) -> Result<Task> {
        self.validate()?;
        let task = match (&self.problem, &self.data) {
            (Some(name), _) => Task { problem: make_problem(name)?, fixed: None },
            (None, Some(path)) => {
                let c = self.constraints.as_ref().expect("validated");
                let train = load_dataset(path)?;
                let test = self.test_data.as_deref().map(load_dataset).transpose()?;
                Task::external(train, test, c.clone())?
            }
            (None, None) => unreachable!("validated"),
        };
        Ok(task)
    }

    /// Problem defaults with the `run` overrides applied.
    pub fn run_config(&self, problem: &ProblemDef) -> Result<RunConfig> {
        apply_overrides(problem.run_config(), &self.run)
    }
}

/// Overlays JSON fields on `cfg`; unknown field names are an error.
pub fn apply_overrides(cfg: RunConfig, overrides: &Map<String, Value>) -> Result<RunConfig> {
    let Value::Object(mut fields) = serde_json::to_value(&cfg).expect("run config serializes") else {
        unreachable!("run config is a struct")
    };
    for (k, v) in overrides {
        if !fields.contains_key(k) {
            return Err(CliError::Config(format!("unknown run setting `{k}`")));
        }
        fields.insert(k.clone(), v.clone());
    }
    let out: RunConfig =
        serde_json::from_value(Value::Object(fields)).map_err(|e| CliError::Config(format!("run settings: {e}")))?;
    out.validate()?;
    Ok(out)
}

pub fn method_config(cfg: &RunConfig, method: Method, seed: u64) -> RunConfig {
    let beta_mode = match method {
        Method::MsngpLs => BetaMode::MoLocalSearch,
        Method::Base | Method::Msngp => BetaMode::LeastSquares,
    };
    RunConfig { beta_mode, seed, ..cfg.clone() }
}

/// Seed of run `index` of `method`, from the campaign's master seed.
pub fn run_seed(master: u64, method: Method, index: usize) -> u64 {
    derive_seed(master, &[label_hash("run"), label_hash(method.as_str()), index as u64])
}

/// Seed of the data used by run `index`, shared by every method.
pub fn data_seed(master: u64, problem: &ProblemDef, index: usize) -> u64 {
    if problem.data.per_run {
        derive_seed(master, &[label_hash("data"), index as u64])
    } else {
        derive_seed(master, &[label_hash("data")])
    }
}

/// A problem together with where its data come from.
#[derive(Clone, Debug)]
pub struct Task {
    pub problem: ProblemDef,
    fixed: Option<(Dataset<f64>, Option<Dataset<f64>>)>,
}

impl Task {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(Task { problem: make_problem(name)?, fixed: None })
    }

    pub fn external(train: Dataset<f64>, test: Option<Dataset<f64>>, c: ConstraintFile) -> Result<Self> {
        let problem = ProblemDef::external(Domain(c.domain), c.specs, c.samples);
        let n = problem.n_inputs();
        for d in std::iter::once(&train).chain(&test) {
            if d.n_inputs() != n {
                return Err(CliError::Config(format!("data have {} inputs, domain has {n}", d.n_inputs())));
            }
        }
        if problem.constraint_specs.is_empty() {
            return Err(CliError::Config("at least one constraint spec is required".into()));
        }
        for s in &problem.constraint_specs {
            s.validate(n)?;
        }
        Ok(Task { problem, fixed: Some((train, test)) })
    }

    pub fn name(&self) -> &'static str {
        self.problem.name.as_str()
    }

    /// Training and test data for run `index`.
    pub fn data(&self, master: u64, index: usize) -> (Dataset<f64>, Option<Dataset<f64>>) {
        match &self.fixed {
            Some(d) => d.clone(),
            None => generate_data(&self.problem, &mut stream(data_seed(master, &self.problem, index))),
        }
    }
}
