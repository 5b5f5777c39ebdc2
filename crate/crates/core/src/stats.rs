//! Two-sided Wilcoxon rank-sum test.

use statrs::distribution::{ContinuousCDF, Normal};

/// Pooled sizes up to this use the exact permutation distribution.
pub const EXACT_LIMIT: usize = 12;

/// Midranks of `values` (1-based, ties averaged), doubled so they are integers.
fn doubled_midranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the average rank (i + 1 + j + 1) / 2
        let doubled = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided p-value for the null hypothesis that `a` and `b` come from the same distribution.
///
/// Exact enumeration of every rank assignment when `a.len() + b.len() <= 12`
/// (ties handled through midranks); otherwise the normal approximation with
/// tie and continuity corrections.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "rank-sum test needs two nonempty samples");
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = doubled_midranks(&pooled);
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let w2: u64 = ranks[..n1].iter().sum();

    if n <= EXACT_LIMIT {
        let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
        enumerate_sums(&ranks, n1, 0, 0, &mut |s| {
            total += 1;
            le += u64::from(s <= w2);
            ge += u64::from(s >= w2);
        });
        let tail = le.min(ge) as f64 / total as f64;
        return (2.0 * tail).min(1.0);
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = w2 as f64 / 2.0 - n1f * (n1f + 1.0) / 2.0;
    let mean = n1f * n2f / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term);
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Calls `f` with the sum of every `k`-subset of `ranks[start..]` added to `acc`.
fn enumerate_sums(ranks: &[u64], k: usize, start: usize, acc: u64, f: &mut impl FnMut(u64)) {
    if k == 0 {
        f(acc);
        return;
    }
    for i in start..=ranks.len() - k {
        enumerate_sums(ranks, k - 1, i + 1, acc + ranks[i], f);
    }
}

/// Median; the mean of the two middle values for even counts. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn disjoint_five_vs_five_is_exact() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [6.0, 7.0, 8.0, 9.0, 10.0];
        // C(10, 5) = 252 assignments; only one reaches the minimal rank sum
        assert!((rank_sum_test(&a, &b) - 2.0 / 252.0).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_are_not_significant() {
        let a = [0.3, 1.2, 2.5, 4.0];
        assert_eq!(rank_sum_test(&a, &a), 1.0);
        let big: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(rank_sum_test(&big, &big) >= 0.99);
    }

    #[test]
    fn normal_approximation_region() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (20..40).map(f64::from).collect();
        let p = rank_sum_test(&a, &b);
        assert!(p < 1e-6, "{p}");
        let all_tied = vec![1.0; 10];
        assert_eq!(rank_sum_test(&all_tied, &all_tied), 1.0);
    }

    #[test]
    fn midranks_handle_ties() {
        let (r, t) = doubled_midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![7, 2, 7, 4]);
        assert_eq!(t, vec![1, 1, 2]);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[1.0, 100.0, 4.0]), Some(4.0));
        assert_eq!(median(&[1.0, 3.0]), Some(2.0));
        assert_eq!(median(&[]), None);
    }

    proptest! {
        #[test]
        fn symmetric_in_arguments(
            a in prop::collection::vec(-5i32..5, 1..9),
            b in prop::collection::vec(-5i32..5, 1..12),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let (p, q) = (rank_sum_test(&a, &b), rank_sum_test(&b, &a));
            prop_assert!((p - q).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
