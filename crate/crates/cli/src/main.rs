use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mosr_core::benchmarks::parse::parse;
use mosr_core::benchmarks::{check_acceptable_fn, generate_data, Acceptability};
use mosr_core::rng::{label_hash, stream, substream};
use mosr_core::{build_constraint_set, Dataset};
use mosr_cli::campaign::{aggregate_path, execute_run_contained, write_artifact};
use mosr_cli::config::{apply_overrides, data_seed, ConstraintFile};
use mosr_cli::{load_dataset, run_campaign, write_dataset, CampaignConfig, CliError, Method, Result, Task};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "mosr", version, about = "Symbolic regression under prior-knowledge constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run of one method; writes its report and Pareto front.
    Run {
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        problem: Option<String>,
        /// Training CSV with header `x0,...,xn,y`.
        #[arg(long, requires = "constraints")]
        data: Option<PathBuf>,
        #[arg(long, requires = "data")]
        test_data: Option<PathBuf>,
        /// JSON with `domain`, `specs` and `samples`.
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "msngp_ls")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON object of run setting overrides.
        #[arg(long)]
        settings: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Every method of a campaign config, `n_runs` times each.
    Campaign {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scores an expression on data and constraints.
    Eval {
        #[arg(long)]
        model_expr: String,
        #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
        data: Option<PathBuf>,
        /// Scores on this problem's generated data and constraints and checks acceptability.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Constraint samples to draw; defaults to the problem's or the constraint file's count.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Writes a problem's generated training data (and test data, as `<stem>.test.csv`).
    ExportData {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn task_from(problem: Option<&str>, data: Option<&Path>, test: Option<&Path>, c: Option<&Path>) -> Result<Task> {
    match (problem, data) {
        (Some(name), _) => Task::builtin(name),
        (None, Some(path)) => {
            let cf: ConstraintFile = read_json(c.ok_or_else(|| CliError::Config("--constraints is required".into()))?)?;
            let train = load_dataset(path)?;
            let test = test.map(load_dataset).transpose()?;
            Task::external(train, test, cf)
        }
        (None, None) => Err(CliError::Config("one of --problem or --data is required".into())),
    }
}

fn mse(data: &Dataset<f64>, f: impl Fn(&[f64]) -> f64) -> f64 {
    let sse: f64 = data.inputs().iter().zip(data.targets()).map(|(x, &y)| (f(x) - y).powi(2)).sum();
    sse / data.len() as f64
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(v.to_string()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { problem, data, test_data, constraints, method, seed, settings, out } => {
            let task = task_from(problem.as_deref(), data.as_deref(), test_data.as_deref(), constraints.as_deref())?;
            let overrides: Map<String, Value> = settings.as_deref().map(read_json).transpose()?.unwrap_or_default();
            let cfg = apply_overrides(task.problem.run_config(), &overrides)?;
            let artifact = execute_run_contained(&task, &cfg, method, seed, 0)?;
            write_artifact(&out, &artifact)?;
            print_json(&artifact.record);
        }
        Command::Campaign { config } => {
            let cfg = CampaignConfig::load(&config)?;
            let agg = run_campaign(&cfg)?;
            for m in &agg.methods {
                eprintln!("{}: {}/{} acceptable", m.method, m.report.nb_succ, m.report.n_runs);
            }
            eprintln!("report written to {}", aggregate_path(&cfg.out_dir).display());
        }
        Command::Eval { model_expr, data, problem, constraints, samples, seed } => {
            let expr = parse(&model_expr).map_err(|e| CliError::Config(format!("expression: {e}")))?;
            let (train, task) = match (&problem, &data) {
                (Some(name), _) => {
                    let task = Task::builtin(name)?;
                    let d = generate_data(&task.problem, &mut stream(data_seed(seed, &task.problem, 0))).0;
                    (d, Some(task))
                }
                (None, Some(path)) => (load_dataset(path)?, None),
                (None, None) => return Err(CliError::Config("one of --problem or --data is required".into())),
            };
            if expr.n_inputs() > train.n_inputs() {
                return Err(CliError::Config(format!("expression reads x{} but data have {} inputs", expr.n_inputs() - 1, train.n_inputs())));
            }
            let f = |x: &[f64]| expr.eval(x);
            let mut report = json!({ "expression": model_expr, "c_train": number(mse(&train, f)) });
            let (specs, n) = match (constraints.as_deref(), &task) {
                (Some(path), _) => {
                    let cf: ConstraintFile = read_json(path)?;
                    (Some(cf.specs), samples.unwrap_or(cf.samples))
                }
                (None, Some(t)) => (Some(t.problem.constraint_specs.clone()), samples.unwrap_or(t.problem.constraint_samples)),
                (None, None) => (None, 0),
            };
            if let Some(specs) = specs {
                for s in &specs {
                    s.validate(train.n_inputs())?;
                }
                let cset = build_constraint_set(specs, n, &mut substream(seed, &[label_hash("cset")]))?;
                let b = cset.breakdown_with(f);
                report["c_constr"] = number(b.objective());
                report["e_g"] = number(b.e_g);
                report["e_h"] = number(b.e_h);
                report["n_constraint_samples"] = json!(b.n_samples);
            }
            if let Some(t) = &task {
                let a: Acceptability = check_acceptable_fn(f, &t.problem);
                report["acceptable"] = json!(a.acceptable);
                for (k, v) in [("mad", a.mad), ("msd", a.msd), ("viol_grid", a.viol_grid)] {
                    if let Some(v) = v {
                        report[k] = number(v);
                    }
                }
            }
            print_json(&report);
        }
        Command::ExportData { problem, seed, out } => {
            let task = Task::builtin(&problem)?;
            let (train, test) = task.data(seed, 0);
            write_dataset(&train, &out)?;
            if let Some(test) = test {
                let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                write_dataset(&test, &out.with_file_name(format!("{stem}.test.csv")))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
