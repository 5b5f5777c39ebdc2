//! Reference models against their own constraints, and the constraint objective against a direct sum.

use std::time::Instant;

use mosr_core::benchmarks::{make_problem, pressure_surrogate};
use mosr_core::constraints::ConstraintSample;
use mosr_core::expr::{Node, NodeArray};
use mosr_core::moea::{nondominated_sort, Ranking};
use mosr_core::rng::stream;
use mosr_core::{
    build_constraint_set, constraint_objective, score, violation, ConstraintKind, ConstraintSet, ConstraintSpec, Dataset,
    Domain, ElementaryOp, Model,
};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn resistance_reference_has_zero_violation_on_10k_samples() {
    let start = Instant::now();
    let p = make_problem("resistance2").unwrap();
    let r = p.reference.unwrap();
    let cset = build_constraint_set(p.constraint_specs.clone(), 10_000, &mut stream(11)).unwrap();
    assert_eq!(cset.len(), 10_000);
    let b = cset.breakdown_with(r);
    assert_eq!((b.e_g, b.e_h), (0.0, 0.0));
    assert_eq!(b.objective(), 0.0);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn magman_reference_is_odd_and_hits_the_edge_values() {
    let p = make_problem("magman").unwrap();
    let r = p.reference.unwrap();
    let cset = build_constraint_set(p.constraint_specs.clone(), 10_000, &mut stream(12)).unwrap();
    let mut checked = 0;
    for s in cset.samples() {
        let spec = &cset.specs()[s.spec];
        let residual = match &spec.kind {
            ConstraintKind::OddSymmetry => {
                let x = s.points[0][0];
                r(&[x]) + r(&[-x])
            }
            ConstraintKind::PointValue { x, y } => r(x) - y,
            _ => continue,
        };
        assert!(residual.abs() <= 1e-12, "{:?}: {residual:e}", spec.kind);
        checked += 1;
    }
    assert!(checked > 4000);
    // the remaining kinds hold too: the reference satisfies every constraint up to rounding
    assert!(cset.breakdown_with(r).objective() < 1e-24);
}

#[test]
fn pressure_surrogate_is_monotone_and_bounded_on_a_grid() {
    let n = 200;
    let at = |i: usize, j: usize| [1.0 + i as f64 / (n - 1) as f64, 100.0 * j as f64 / (n - 1) as f64];
    for i in 0..n {
        for j in 0..n {
            let f = pressure_surrogate(&at(i, j));
            assert!((1.0..=2.2).contains(&f), "{f}");
            if i + 1 < n {
                assert!(pressure_surrogate(&at(i + 1, j)) >= f);
            }
            if j + 1 < n {
                assert!(pressure_surrogate(&at(i, j + 1)) >= f);
            }
        }
    }
    assert_eq!(pressure_surrogate(&[1.0, 0.0]), 1.0);
    assert!((pressure_surrogate(&[2.0, 100.0]) - 2.2).abs() < 1e-15);
}

fn line_model(intercept: f64, slope: f64) -> Model<f64> {
    let nodes = vec![Node::Constant(0.5), Node::Variable(0), Node::Function { op: ElementaryOp::Square, args: [1, 1] }];
    let genome = NodeArray::from_parts(nodes, 1, vec![1], 2, 0.7).unwrap();
    Model::with_beta(genome, vec![intercept, slope]).unwrap()
}

#[test]
fn objective_is_a_plain_mean_and_order_free() {
    let p = make_problem("magman").unwrap();
    let mut rng = stream(5);
    let cset = build_constraint_set(p.constraint_specs.clone(), 90, &mut rng).unwrap();
    for _ in 0..20 {
        let model = line_model(rng.random_range(-1e-3..1e-3), rng.random_range(-0.1..0.1));
        let direct: f64 =
            cset.samples().iter().map(|s| violation(&model, s, &cset.specs()[s.spec])).sum::<f64>() / cset.len() as f64;
        let got = constraint_objective(&model, &cset);
        assert!((got - direct).abs() <= 1e-12 * direct.max(1e-300), "{got} vs {direct}");

        let mut shuffled: Vec<ConstraintSample<f64>> = cset.samples().to_vec();
        shuffled.shuffle(&mut rng);
        let permuted = ConstraintSet::from_samples(cset.specs().to_vec(), shuffled).unwrap();
        let again = constraint_objective(&model, &permuted);
        assert!((again - got).abs() <= 1e-12 * got.max(1e-300));
    }
}

#[test]
fn new_sample_flips_the_ranking_of_a_pair() {
    let spec = ConstraintSpec::new(
        0,
        ConstraintKind::Sign { interval: Domain(vec![(0.0, 1.0)]), positive: true },
        Domain(vec![(0.0, 1.0)]),
    );
    let xs: Vec<Vec<f64>> = (0..11).map(|i| vec![i as f64 / 10.0]).collect();
    let ys = xs.iter().map(|x| x[0] - 0.5).collect();
    let data = Dataset::new(xs, ys).unwrap();
    let sample = |x: f64| ConstraintSample { spec: 0, points: vec![vec![x]], target: None };
    let mut cset = ConstraintSet::from_samples(vec![spec], vec![sample(0.9)]).unwrap();

    let exact = line_model(-0.5, 1.0);
    let positive = line_model(1.0, 0.0);
    let scores = |c: &ConstraintSet<f64>| vec![score(&exact, &data, c), score(&positive, &data, c)];

    let before = scores(&cset);
    assert_eq!(nondominated_sort(&before), vec![vec![0], vec![1]]);
    cset.push_sample(sample(0.1)).unwrap();
    let after = scores(&cset);
    assert!(after[0].c_constr > 0.0 && after[1].c_constr == 0.0);
    assert_eq!(nondominated_sort(&after), vec![vec![0, 1]]);
    assert_eq!(Ranking::of(&after).rank, vec![0, 0]);
}
