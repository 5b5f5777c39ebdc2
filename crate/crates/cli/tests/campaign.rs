//! Small campaigns end to end: artifacts, aggregate recomputation, front export and determinism.

use std::path::Path;

use mosr_cli::campaign::{aggregate_path, read_artifacts};
use mosr_cli::{aggregate, run_campaign, Aggregate, CampaignConfig, Method, Task};
use mosr_core::benchmarks::parse::parse;
use serde_json::json;

fn tiny(out_dir: &Path, seed: u64) -> CampaignConfig {
    let run = json!({"population_size": 8, "max_gens": 2, "max_iters": 4, "ls_iters": 5});
    CampaignConfig {
        problem: Some("resistance2".into()),
        data: None,
        test_data: None,
        constraints: None,
        methods: vec![Method::Base, Method::MsngpLs],
        n_runs: 2,
        run: run.as_object().unwrap().clone(),
        out_dir: out_dir.to_path_buf(),
        seed,
    }
}

#[test]
fn four_runs_and_a_report_rebuilt_from_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), 7);
    let agg = run_campaign(&cfg).unwrap();

    let runs = read_artifacts(dir.path()).unwrap();
    assert_eq!(runs.len(), 4);
    for m in [Method::Base, Method::MsngpLs] {
        let mine: Vec<_> = runs.iter().filter(|r| r.method == m).collect();
        assert_eq!(mine.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1]);
        let report = &agg.methods.iter().find(|r| r.method == m).unwrap().report;
        assert_eq!(report.n_runs, 2);
        assert_eq!(report.nb_succ, mine.iter().filter(|r| r.record.accepted).count());
    }
    // resistance2 data are drawn per run and shared by the methods
    let seeds = |i: usize| runs.iter().filter(|r| r.index == i).map(|r| r.data_seed).collect::<Vec<_>>();
    assert_eq!(seeds(0)[0], seeds(0)[1]);
    assert_ne!(seeds(0)[0], seeds(1)[0]);

    assert_eq!(aggregate("resistance2", 7, &cfg.methods, &runs), agg);
    let text = std::fs::read_to_string(aggregate_path(dir.path())).unwrap();
    let back: Aggregate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, agg);
    assert_eq!(agg.comparisons.iter().filter(|c| c.measure == "mse").count(), 1);
}

#[test]
fn exported_expressions_reproduce_their_training_error() {
    let dir = tempfile::tempdir().unwrap();
    run_campaign(&tiny(dir.path(), 3)).unwrap();
    let task = Task::builtin("resistance2").unwrap();
    let mut checked = 0;
    for run in read_artifacts(dir.path()).unwrap() {
        let (train, _) = task.data(run.master_seed, run.index);
        let mut rows = run.front.clone();
        if let Some(e) = &run.record.expression {
            rows.push(mosr_cli::export::FrontRow {
                c_train: run.record.c_train,
                c_constr: run.record.c_constr,
                expression: e.clone(),
            });
        }
        for row in rows {
            let expr = parse(&row.expression).unwrap();
            let sse: f64 = train.inputs().iter().zip(train.targets()).map(|(x, y)| (expr.eval(x) - y).powi(2)).sum();
            let mse = sse / train.len() as f64;
            assert!((mse - row.c_train).abs() <= 1e-9 * row.c_train.abs().max(1.0), "{mse} vs {}", row.c_train);
            checked += 1;
        }
        let csv = std::fs::read_to_string(mosr_cli::campaign::front_path(dir.path(), run.method, run.index)).unwrap();
        assert_eq!(csv.lines().count(), run.front.len() + 1);
    }
    assert!(checked >= 4);
}

#[test]
fn same_seed_same_bytes_other_seed_other_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_campaign(&tiny(a.path(), 11)).unwrap();
    run_campaign(&tiny(b.path(), 11)).unwrap();
    run_campaign(&tiny(c.path(), 12)).unwrap();
    let read = |d: &Path| std::fs::read(aggregate_path(d)).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let runs = |d: &Path| std::fs::read(d.join("runs").join("msngp_ls_000.json")).unwrap();
    assert_eq!(runs(a.path()), runs(b.path()));
    assert_ne!(runs(a.path()), runs(c.path()));
}
