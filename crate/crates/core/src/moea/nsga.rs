//! Pareto domination, non-dominated sorting, crowding distance, crowded
//! tournament selection and elitist replacement.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linear::{Model, ModelScores};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

impl<T: Scalar> ModelScores<T> {
    /// Not worse in both objectives and strictly better in at least one.
    pub fn dominates(&self, other: &ModelScores<T>) -> bool {
        dominates(self, other)
    }
}

/// Pareto domination on `(c_train, c_constr)`.
///
/// Sentinel scores are `+inf` in both objectives, so any finite score
/// dominates them and two sentinels are mutually non-dominating.
pub fn dominates<T: Scalar>(a: &ModelScores<T>, b: &ModelScores<T>) -> bool {
    a.c_train <= b.c_train
        && a.c_constr <= b.c_constr
        && (a.c_train < b.c_train || a.c_constr < b.c_constr)
}

/// Fronts of mutually non-dominated indices, best first; each front in ascending index order.
pub fn nondominated_sort<T: Scalar>(scores: &[ModelScores<T>]) -> Vec<Vec<usize>> {
    let n = scores.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&scores[i], &scores[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&scores[j], &scores[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of every member of one front.
///
/// Per objective the extreme members get `+inf`; interior members add the
/// gap between their neighbours divided by the objective's range. An
/// objective with zero or non-finite range adds nothing.
pub fn crowding_distance<T: Scalar>(front: &[ModelScores<T>]) -> Vec<T> {
    let n = front.len();
    let mut dist = vec![T::zero(); n];
    if n == 0 {
        return dist;
    }
    let objectives: [fn(&ModelScores<T>) -> T; 2] = [|s| s.c_train, |s| s.c_constr];
    for obj in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| obj(&front[a]).partial_cmp(&obj(&front[b])).unwrap_or(Ordering::Equal));
        dist[order[0]] = T::infinity();
        dist[order[n - 1]] = T::infinity();
        let range = obj(&front[order[n - 1]]) - obj(&front[order[0]]);
        if !(range > T::zero()) || !range.is_finite() {
            continue;
        }
        for k in 1..n.saturating_sub(1) {
            let gap = (obj(&front[order[k + 1]]) - obj(&front[order[k - 1]])) / range;
            if gap.is_finite() {
                dist[order[k]] = dist[order[k]] + gap;
            }
        }
    }
    dist
}

/// Front rank (0 = best) and crowding distance of every population member.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking<T> {
    pub rank: Vec<usize>,
    pub crowding: Vec<T>,
}

impl<T: Scalar> Ranking<T> {
    pub fn of(scores: &[ModelScores<T>]) -> Self {
        let mut rank = vec![0; scores.len()];
        let mut crowding = vec![T::zero(); scores.len()];
        for (r, front) in nondominated_sort(scores).iter().enumerate() {
            let fs: Vec<_> = front.iter().map(|&i| scores[i]).collect();
            for (&i, d) in front.iter().zip(crowding_distance(&fs)) {
                rank[i] = r;
                crowding[i] = d;
            }
        }
        Ranking { rank, crowding }
    }

    /// Crowded comparison; `Less` means `a` is preferred.
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        self.rank[a]
            .cmp(&self.rank[b])
            .then_with(|| self.crowding[b].partial_cmp(&self.crowding[a]).unwrap_or(Ordering::Equal))
    }
}

/// Models scored against one dataset and one constraint-set version.
#[derive(Clone, Debug, PartialEq)]
pub struct Population<T> {
    pub models: Vec<Model<T>>,
    pub cset_version: u64,
}

impl<T: Scalar> Population<T> {
    pub fn new(models: Vec<Model<T>>, cset_version: u64) -> Self {
        Population { models, cset_version }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn scores(&self) -> Vec<ModelScores<T>> {
        self.models.iter().map(Model::scores_or_sentinel).collect()
    }

    pub fn ranking(&self) -> Ranking<T> {
        Ranking::of(&self.scores())
    }

    /// Members of the first non-dominated front.
    pub fn nondominated(&self) -> Vec<Model<T>> {
        nondominated_sort(&self.scores())
            .first()
            .map(|f| f.iter().map(|&i| self.models[i].clone()).collect())
            .unwrap_or_default()
    }
}

/// Tournament of `k` draws with replacement under crowded comparison.
pub fn tournament_index<T: Scalar>(ranking: &Ranking<T>, k: usize, rng: &mut RandomStream) -> usize {
    let n = ranking.rank.len();
    let candidates: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
    crowded_winner(ranking, &candidates, rng)
}

/// Best of `candidates` under crowded comparison; remaining ties broken uniformly at random.
pub fn crowded_winner<T: Scalar>(ranking: &Ranking<T>, candidates: &[usize], rng: &mut RandomStream) -> usize {
    let mut best = candidates[0];
    let mut ties = 1usize;
    for &c in &candidates[1..] {
        match ranking.compare(c, best) {
            Ordering::Less => {
                best = c;
                ties = 1;
            }
            Ordering::Equal => {
                // reservoir choice keeps every tied draw equally likely
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = c;
                }
            }
            Ordering::Greater => {}
        }
    }
    best
}

pub fn tournament_select<'a, T: Scalar>(
    pop: &'a Population<T>,
    ranking: &Ranking<T>,
    k: usize,
    rng: &mut RandomStream,
) -> &'a Model<T> {
    &pop.models[tournament_index(ranking, k, rng)]
}

/// Indices of the `m` survivors of `scores`: whole fronts first, the split
/// front truncated by descending crowding (stable on index).
pub fn survivor_indices<T: Scalar>(scores: &[ModelScores<T>], m: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(m);
    for front in nondominated_sort(scores) {
        if out.len() + front.len() <= m {
            out.extend_from_slice(&front);
        } else {
            let fs: Vec<_> = front.iter().map(|&i| scores[i]).collect();
            let d = crowding_distance(&fs);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(Ordering::Equal));
            out.extend(order.into_iter().take(m - out.len()).map(|k| front[k]));
        }
        if out.len() == m {
            break;
        }
    }
    out
}

/// Elitist replacement of `pop` by the best `pop.len()` models of `pop ∪ interpop`.
pub fn merge<T: Scalar>(pop: Population<T>, interpop: Population<T>) -> Result<Population<T>> {
    if pop.cset_version != interpop.cset_version {
        return Err(Error::VersionMismatch { left: pop.cset_version, right: interpop.cset_version });
    }
    let m = pop.len();
    let version = pop.cset_version;
    let mut union: Vec<Option<Model<T>>> = pop.models.into_iter().chain(interpop.models).map(Some).collect();
    let scores: Vec<_> = union.iter().map(|m| m.as_ref().map(Model::scores_or_sentinel).unwrap()).collect();
    let models = survivor_indices(&scores, m).into_iter().filter_map(|i| union[i].take()).collect();
    Ok(Population::new(models, version))
}
