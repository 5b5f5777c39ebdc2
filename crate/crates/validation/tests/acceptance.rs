//! Acceptance criteria, one report line each.
//!
//! Every criterion runs even when an earlier one fails; the test fails if any did.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use mosr_cli::{run_campaign, Aggregate, CampaignConfig, Method};
use mosr_core::benchmarks::{generate_data, make_problem};
use mosr_core::expr::{mutate_traced, Node, NodeArray};
use mosr_core::moea::{merge, nondominated_sort, Acceptance, Observer, Population};
use mosr_core::rng::stream;
use mosr_core::{
    build_constraint_set, fit_beta_ls, init_node_array, rank_sum_test, run_mo, ArrayConfig, ConstraintKind,
    ConstraintSet, Dataset, ElementaryOp, Model, ModelScores, RunConfig,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::{json, Map, Value};

type S = ModelScores<f64>;
type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- 1: least squares against a pseudo-inverse

fn ls_genome(rng: &mut impl Rng, n_inputs: usize, n_features: usize) -> NodeArray<f64> {
    use ElementaryOp::*;
    let mut nodes: Vec<Node<f64>> = (0..10).map(|_| Node::Constant(rng.random_range(-1.0..1.0))).collect();
    nodes.extend((0..n_inputs).map(Node::Variable));
    let mut identity = Vec::new();
    let mut used = Vec::new();
    while identity.len() < n_features {
        let (a, b) = (rng.random_range(0..n_inputs), rng.random_range(0..n_inputs));
        let op = [Mul, Square, Cube, Sine, Tanh][rng.random_range(0..5)];
        let key = match op {
            Mul if a == b => continue,
            Mul => (op, a.min(b), a.max(b)),
            _ => (op, a, a),
        };
        if used.contains(&key) {
            continue;
        }
        used.push(key);
        nodes.push(Node::Function { op, args: [10 + key.1, 10 + key.2] });
        identity.push(nodes.len() - 1);
    }
    NodeArray::from_parts(nodes, n_inputs, identity, 3, 0.7).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_inputs = rng.random_range(1..=3);
        let nf = rng.random_range(1..=5.min(4 * n_inputs));
        let m = rng.random_range(nf + 2..=50);
        let genome = ls_genome(&mut rng, n_inputs, nf);
        let xs: Vec<Vec<f64>> = (0..m).map(|_| (0..n_inputs).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let data = Dataset::new(xs, ys.clone()).unwrap();
        let beta = DVector::from_vec(fit_beta_ls(&mut Model::new(genome.clone()), &data));
        let x = DMatrix::from_fn(m, nf + 1, |r, c| {
            if c == 0 {
                1.0
            } else {
                genome.eval_node(genome.identity_links()[c - 1], &data.inputs()[r])
            }
        });
        let oracle = x.pseudo_inverse(1e-14).unwrap() * DVector::from_vec(ys);
        worst = worst.max((&beta - &oracle).norm() / oracle.norm().max(f64::MIN_POSITIVE));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-8 && secs < 5.0, format!("worst relative error {worst:.2e} over 100 instances, {secs:.2} s"))
}

// ---- 2: sorting and merge against brute force

fn dominates(a: &S, b: &S) -> bool {
    a.c_train <= b.c_train && a.c_constr <= b.c_constr && (a.c_train < b.c_train || a.c_constr < b.c_constr)
}

fn brute_fronts(scores: &[S]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..scores.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&scores[j], &scores[i]))).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Crowding distance from each member's position in the stable value order.
fn brute_crowding(front: &[S]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0; n];
    for obj in [|s: &S| s.c_train, |s: &S| s.c_constr] {
        let pos = |i: usize| {
            (0..n).filter(|&j| obj(&front[j]) < obj(&front[i]) || (obj(&front[j]) == obj(&front[i]) && j < i)).count()
        };
        let mut at = vec![0; n];
        for i in 0..n {
            at[pos(i)] = i;
        }
        let range = obj(&front[at[n - 1]]) - obj(&front[at[0]]);
        for i in 0..n {
            let p = pos(i);
            if p == 0 || p == n - 1 {
                d[i] = f64::INFINITY;
            } else if range > 0.0 && range.is_finite() {
                let gap = (obj(&front[at[p + 1]]) - obj(&front[at[p - 1]])) / range;
                if gap.is_finite() {
                    d[i] += gap;
                }
            }
        }
    }
    d
}

/// Whole fronts while they fit; the split front is filled by descending
/// crowding distance, earlier members first on equal distance.
fn brute_survivors(scores: &[S], m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for front in brute_fronts(scores) {
        let room = m - out.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            out.extend(&front);
            continue;
        }
        let d = brute_crowding(&front.iter().map(|&i| scores[i]).collect::<Vec<_>>());
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
        out.extend(order[..room].iter().map(|&k| front[k]));
    }
    out
}

fn tagged_model(s: S, tag: usize) -> Model<f64> {
    let nodes = vec![Node::Constant(0.0), Node::Variable(0), Node::Function { op: ElementaryOp::Square, args: [1, 1] }];
    let genome = NodeArray::from_parts(nodes, 1, vec![1], 1, 0.7).unwrap();
    Model { genome, beta: vec![tag as f64, 0.0], scores: Some(s) }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(202);
    for case in 0..500 {
        let m = rng.random_range(1..=10);
        let scores: Vec<S> = (0..2 * m)
            .map(|_| match rng.random_range(0..10) {
                0 => S::sentinel(),
                _ => S::new(f64::from(rng.random_range(0..5u8)), f64::from(rng.random_range(0..5u8))),
            })
            .collect();
        if nondominated_sort(&scores) != brute_fronts(&scores) {
            return Err(format!("sort differs on population {case}"));
        }
        let models: Vec<Model<f64>> = scores.iter().enumerate().map(|(i, &s)| tagged_model(s, i)).collect();
        let merged = merge(Population::new(models[..m].to_vec(), 0), Population::new(models[m..].to_vec(), 0)).unwrap();
        let got: Vec<usize> = merged.models.iter().map(|md| md.beta[0] as usize).collect();
        if got != brute_survivors(&scores, m) {
            return Err(format!("merge differs on population {case}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, format!("500 populations agree, {secs:.2} s"))
}

// ---- 3: reference models against their constraints

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let res = make_problem("resistance2").unwrap();
    let cset = build_constraint_set(res.constraint_specs.clone(), 10_000, &mut stream(303)).unwrap();
    let c_res = cset.breakdown_with(res.reference.unwrap()).objective();

    let mag = make_problem("magman").unwrap();
    let r = mag.reference.unwrap();
    let cset = build_constraint_set(mag.constraint_specs.clone(), 10_000, &mut stream(304)).unwrap();
    let mut worst = 0.0f64;
    for s in cset.samples() {
        let residual = match &cset.specs()[s.spec].kind {
            ConstraintKind::OddSymmetry => r(&s.points[0]) + r(&[-s.points[0][0]]),
            ConstraintKind::PointValue { x, y } => r(x) - y,
            _ => continue,
        };
        worst = worst.max(residual.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        c_res == 0.0 && worst <= 1e-12 && secs < 5.0,
        format!("resistance2 C_c = {c_res:e} on 10^4 samples, magman worst residual {worst:.1e}, {secs:.2} s"),
    )
}

// ---- 4: invariants

#[derive(Default)]
struct Audit {
    accepted: usize,
    admitted_dominated: usize,
    sizes: Vec<usize>,
}

impl Observer<f64> for Audit {
    fn on_accept(&mut self, e: &Acceptance<f64>) {
        self.accepted += 1;
        if e.parent.dominates(&e.accepted) || e.child.dominates(&e.accepted) {
            self.admitted_dominated += 1;
        }
    }
    fn on_generation(&mut self, _gen: usize, pop: &Population<f64>, _cset: &ConstraintSet<f64>) {
        self.sizes.push(pop.len());
    }
    fn wants_acceptances(&self) -> bool {
        true
    }
}

fn criterion_4() -> Outcome {
    let mut rng = stream(404);
    let mut broken = 0;
    for (k, function_set) in [ElementaryOp::arithmetic(), ElementaryOp::extended()].into_iter().enumerate() {
        let cfg = ArrayConfig {
            array_size: 100 + 100 * k,
            n_constants: 10,
            n_inputs: 1 + k,
            function_set,
            n_features: 3 + 2 * k,
            depth_limit: 5 + 2 * k,
            rewire_prob: 0.7,
        };
        let mut genome: NodeArray<f64> = init_node_array(&cfg, &mut rng).unwrap();
        for _ in 0..50_000 {
            genome = mutate_traced(&genome, &mut rng).0;
            broken += usize::from(genome.check_invariants().is_err());
        }
    }

    let p = make_problem("resistance2").unwrap();
    let (data, _) = generate_data::<f64>(&p, &mut stream(405));
    let mut out = Vec::new();
    for beta_mode in [mosr_core::BetaMode::LeastSquares, mosr_core::BetaMode::MoLocalSearch] {
        let cfg = RunConfig { population_size: 20, max_gens: 5, max_iters: 10, beta_mode, seed: 406, ..p.run_config() };
        let mut audit = Audit::default();
        run_mo(&data, p.constraint_specs.clone(), p.constraint_samples, &cfg, &mut audit).unwrap();
        out.push(audit);
    }
    let ok = broken == 0
        && out.iter().all(|a| a.accepted > 0 && a.admitted_dominated == 0 && a.sizes == vec![20; 5]);
    check(
        ok,
        format!(
            "10^5 mutations, {broken} invalid; {} accepted steps across two 5-generation runs, {} dominated; population sizes {:?}",
            out.iter().map(|a| a.accepted).sum::<usize>(),
            out.iter().map(|a| a.admitted_dominated).sum::<usize>(),
            out.iter().map(|a| a.sizes.clone()).collect::<Vec<_>>(),
        ),
    )
}

// ---- 5 to 7: scaled campaigns

fn scaled_campaign(problem: &str, n_runs: usize, out_dir: &Path) -> Aggregate {
    let run: Map<String, Value> =
        json!({"population_size": 30, "max_gens": 20, "max_iters": 30}).as_object().unwrap().clone();
    let cfg = CampaignConfig {
        problem: Some(problem.to_string()),
        data: None,
        test_data: None,
        constraints: None,
        methods: vec![Method::Base, Method::MsngpLs],
        n_runs,
        run,
        out_dir: out_dir.to_path_buf(),
        seed: 1,
    };
    run_campaign(&cfg).unwrap()
}

fn report(agg: &Aggregate, m: Method) -> &mosr_core::benchmarks::RunReport {
    &agg.methods.iter().find(|r| r.method == m).unwrap().report
}

fn criterion_5(agg: &Aggregate, secs: f64) -> Outcome {
    let (base, ls) = (report(agg, Method::Base), report(agg, Method::MsngpLs));
    let (rb, rl) = (base.mse_ref.unwrap_or(f64::NAN), ls.mse_ref.unwrap_or(f64::NAN));
    check(
        base.nb_succ == 0 && ls.nb_succ >= 2 && rl * 100.0 <= rb,
        format!(
            "acceptable base {}/15, msngp_ls {}/15 (need >= 2); median MSE_ref base {rb:.3e}, msngp_ls {rl:.3e} (ratio {:.1e}); {secs:.0} s",
            base.nb_succ,
            ls.nb_succ,
            rb / rl,
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let agg = scaled_campaign("magman", 10, dir.path());
    let (vb, vl) = (report(&agg, Method::Base).viol.unwrap(), report(&agg, Method::MsngpLs).viol.unwrap());
    check(
        vl <= 1e-3 && vb >= 10.0 * vl,
        format!("median VIOL base {vb:.3e}, msngp_ls {vl:.3e}; {:.0} s", start.elapsed().as_secs_f64()),
    )
}

fn criterion_7(first: &Path) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    scaled_campaign("resistance2", 15, dir.path());
    let a = std::fs::read(first.join("aggregate.json")).unwrap();
    let b = std::fs::read(dir.path().join("aggregate.json")).unwrap();
    check(a == b, format!("aggregate reports of two executions, {} and {} bytes, identical: {}", a.len(), b.len(), a == b))
}

// ---- 8: rank-sum test

fn criterion_8() -> Outcome {
    let lo = [1.0, 2.0, 3.0, 4.0, 5.0];
    let hi = [6.0, 7.0, 8.0, 9.0, 10.0];
    let p = rank_sum_test(&lo, &hi);
    let same: Vec<f64> = (0..20).map(|i| f64::from(i % 7)).collect();
    let q = rank_sum_test(&same, &same);
    check(
        (p - 2.0 / 252.0).abs() < 1e-12 && q >= 0.99,
        format!("disjoint 5 vs 5 p = {p:.6} (2/252 = {:.6}), identical samples p = {q:.4}", 2.0 / 252.0),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

#[test]
fn acceptance_criteria() {
    let res_dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "least squares vs pseudo-inverse", guarded(criterion_1)),
        (2, "sorting and merge vs brute force", guarded(criterion_2)),
        (3, "reference models satisfy constraints", guarded(criterion_3)),
        (4, "genome and offspring invariants", guarded(criterion_4)),
    ];
    let start = Instant::now();
    let res = guarded(|| {
        let agg = scaled_campaign("resistance2", 15, res_dir.path());
        criterion_5(&agg, start.elapsed().as_secs_f64())
    });
    results.push((5, "scaled resistance2 campaign", res));
    results.push((6, "scaled magman campaign", guarded(criterion_6)));
    results.push((7, "campaign determinism", guarded(|| criterion_7(res_dir.path()))));
    results.push((8, "rank-sum p-values", guarded(criterion_8)));

    // written past the harness capture so the lines appear on success too
    let mut out = std::io::stdout().lock();
    // the harness has already printed `test acceptance_criteria ... ` without a newline
    writeln!(out).unwrap();
    for (n, name, r) in &results {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(out, "criterion {n} {tag} [{name}]: {detail}").unwrap();
    }
    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
