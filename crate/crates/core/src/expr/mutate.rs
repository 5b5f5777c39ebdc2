use rand::Rng;

use super::NodeArray;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

const MAX_ATTEMPTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    /// One operand link of a function node was redirected.
    Rewire,
    /// One identity link was pointed at another feature root.
    Retarget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MutationOutcome {
    pub kind: MoveKind,
    /// False when every attempt broke an invariant and the copy is unchanged.
    pub applied: bool,
}

pub fn mutate<T: Scalar>(array: &NodeArray<T>, rng: &mut RandomStream) -> NodeArray<T> {
    mutate_traced(array, rng).0
}

/// Mutates a copy of `array` and reports which move was drawn.
///
/// A move always changes something: the replacement link or target is drawn
/// from the candidates other than the current one.
pub fn mutate_traced<T: Scalar>(array: &NodeArray<T>, rng: &mut RandomStream) -> (NodeArray<T>, MutationOutcome) {
    let kind = if rng.random::<f64>() < array.rewire_prob() { MoveKind::Rewire } else { MoveKind::Retarget };
    let mut out = array.clone();
    let applied = match kind {
        MoveKind::Rewire => try_rewire(&mut out, rng),
        MoveKind::Retarget => try_retarget(&mut out, rng),
    };
    (out, MutationOutcome { kind, applied })
}

fn try_rewire<T: Scalar>(a: &mut NodeArray<T>, rng: &mut RandomStream) -> bool {
    let first = a.first_function();
    let active = {
        let prog = a.feature_program();
        let mut mask = vec![false; a.len()];
        for &i in &prog.order {
            mask[i] = true;
        }
        mask
    };
    for _ in 0..MAX_ATTEMPTS {
        let node = rng.random_range(first..a.len());
        let links = a.nodes()[node].links();
        let slot = rng.random_range(0..links.len());
        let current = links[slot];
        // earlier nodes excluding the current operand
        if node < 2 {
            continue;
        }
        let mut target = rng.random_range(0..node - 1);
        if target >= current {
            target += 1;
        }
        a.set_link(node, slot, target);
        if !active[node] || a.features_valid() {
            return true;
        }
        a.set_link(node, slot, current);
    }
    false
}

fn try_retarget<T: Scalar>(a: &mut NodeArray<T>, rng: &mut RandomStream) -> bool {
    let eligible = a.eligible_targets();
    for _ in 0..MAX_ATTEMPTS {
        let slot = rng.random_range(0..a.n_features());
        let current = a.identity_links()[slot];
        let choices: Vec<usize> = eligible.iter().copied().filter(|&t| t != current).collect();
        if choices.is_empty() {
            continue;
        }
        a.set_identity(slot, choices[rng.random_range(0..choices.len())]);
        return true;
    }
    false
}
