//! Sorting, crowding and elitist merge against brute-force references.

use std::time::Instant;

use mosr_core::expr::{Node, NodeArray};
use mosr_core::moea::{crowding_distance, merge, nondominated_sort, Population};
use mosr_core::rng::stream;
use mosr_core::{Model, ModelScores};
use rand::Rng;

type S = ModelScores<f64>;

fn brute_dominates(a: &S, b: &S) -> bool {
    let not_worse = a.c_train <= b.c_train && a.c_constr <= b.c_constr;
    let better = a.c_train < b.c_train || a.c_constr < b.c_constr;
    not_worse && better
}

/// Fronts by repeated removal of the currently non-dominated set.
fn brute_fronts(scores: &[S]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..scores.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| brute_dominates(&scores[j], &scores[i])))
            .collect();
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
        let at: Vec<usize> = {
            let mut at = vec![0; n];
            for i in 0..n {
                at[pos(i)] = i;
            }
            at
        };
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

/// Survivors: whole fronts while they fit, then the split front by descending crowding, earlier index first on ties.
fn brute_survivors(scores: &[S], m: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for front in brute_fronts(scores) {
        if out.len() == m {
            break;
        }
        if out.len() + front.len() <= m {
            out.extend(&front);
            continue;
        }
        let fs: Vec<S> = front.iter().map(|&i| scores[i]).collect();
        let d = brute_crowding(&fs);
        let mut chosen = Vec::new();
        let mut taken = vec![false; front.len()];
        while out.len() + chosen.len() < m {
            let mut best: Option<usize> = None;
            for k in 0..front.len() {
                if !taken[k] && best.is_none_or(|b| d[k] > d[b]) {
                    best = Some(k);
                }
            }
            let b = best.unwrap();
            taken[b] = true;
            chosen.push(front[b]);
        }
        out.extend(chosen);
    }
    out
}

fn random_scores(rng: &mut impl Rng, n: usize) -> Vec<S> {
    (0..n)
        .map(|_| match rng.random_range(0..10) {
            0 => S::sentinel(),
            // a coarse value grid makes duplicates and ties common
            _ => S::new(f64::from(rng.random_range(0..6u8)), f64::from(rng.random_range(0..6u8)) * 0.5),
        })
        .collect()
}

fn model_with(s: S, tag: usize) -> Model<f64> {
    let nodes = vec![
        Node::Constant(tag as f64),
        Node::Variable(0),
        Node::Function { op: mosr_core::ElementaryOp::Square, args: [1, 1] },
    ];
    let genome = NodeArray::from_parts(nodes, 1, vec![1], 1, 0.7).unwrap();
    Model { genome, beta: vec![tag as f64, 0.0], scores: Some(s) }
}

#[test]
fn sort_and_merge_match_brute_force_on_500_populations() {
    let start = Instant::now();
    let mut rng = stream(2024);
    for case in 0..500 {
        let m = rng.random_range(1..=10);
        let scores = random_scores(&mut rng, 2 * m);

        assert_eq!(nondominated_sort(&scores), brute_fronts(&scores), "case {case}");
        for front in brute_fronts(&scores) {
            let fs: Vec<S> = front.iter().map(|&i| scores[i]).collect();
            assert_eq!(crowding_distance(&fs), brute_crowding(&fs), "case {case}");
        }

        let models: Vec<Model<f64>> = scores.iter().enumerate().map(|(i, &s)| model_with(s, i)).collect();
        let pop = Population::new(models[..m].to_vec(), 3);
        let inter = Population::new(models[m..].to_vec(), 3);
        let merged = merge(pop, inter).unwrap();
        assert_eq!(merged.len(), m);
        let got: Vec<usize> = merged.models.iter().map(|md| md.beta[0] as usize).collect();
        assert_eq!(got, brute_survivors(&scores, m), "case {case}: {scores:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn merge_rejects_stale_scores() {
    let a = Population::new(vec![model_with(S::new(1.0, 1.0), 0)], 1);
    let b = Population::new(vec![model_with(S::new(0.0, 0.0), 1)], 2);
    assert!(merge(a, b).is_err());
}
