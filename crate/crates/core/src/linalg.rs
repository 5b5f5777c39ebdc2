//! Small dense least-squares solver for the coefficient fit.

use crate::scalar::Scalar;

/// Condition-number estimate above which the ridge fallback is used.
pub const MAX_CONDITION: f64 = 1e12;
/// Ridge term used when the Gram matrix is singular or ill-conditioned.
pub const RIDGE: f64 = 1e-9;

/// Cholesky solve of `(G + ridge I) b = rhs` for row-major symmetric `G`.
///
/// Returns the solution and a condition estimate (squared ratio of the
/// extreme Cholesky diagonal entries), or `None` if a pivot is not positive.
pub fn cholesky_solve<T: Scalar>(g: &[T], rhs: &[T], ridge: T) -> Option<(Vec<T>, T)> {
    let n = rhs.len();
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i * n + j];
            if i == j {
                s = s + ridge;
            }
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    let diag = (0..n).map(|i| l[i * n + i]);
    let (lo, hi) = diag.fold((T::infinity(), T::zero()), |(lo, hi), d| (lo.min(d), hi.max(d)));
    let cond = (hi / lo).powi(2);
    x.iter().all(|v| v.is_finite()).then_some((x, cond))
}

/// Least-squares coefficients for the design matrix `rows` (each row `[1, phi_1, ...]`).
///
/// Solves the normal equations, retrying with a ridge term (growing by three
/// decades per retry) when the Gram matrix is singular or ill-conditioned.
pub fn least_squares<T: Scalar>(rows: &[Vec<T>], y: &[T]) -> Option<Vec<T>> {
    let n = rows.first()?.len();
    let mut g = vec![T::zero(); n * n];
    let mut rhs = vec![T::zero(); n];
    for (r, &t) in rows.iter().zip(y) {
        for i in 0..n {
            rhs[i] = rhs[i] + r[i] * t;
            for j in 0..=i {
                g[i * n + j] = g[i * n + j] + r[i] * r[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[j * n + i] = g[i * n + j];
        }
    }
    if let Some((x, cond)) = cholesky_solve(&g, &rhs, T::zero()) {
        if cond <= T::lit(MAX_CONDITION) {
            return Some(x);
        }
    }
    let mut ridge = RIDGE;
    for _ in 0..8 {
        if let Some((x, _)) = cholesky_solve(&g, &rhs, T::lit(ridge)) {
            return Some(x);
        }
        ridge *= 1e3;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let g = [4.0f64, 2.0, 2.0, 3.0];
        let (x, cond) = cholesky_solve(&g, &[2.0, 1.0], 0.0).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-14 && x[1].abs() < 1e-14);
        assert!(cond >= 1.0);
    }

    #[test]
    fn singular_uses_ridge() {
        let rows = vec![vec![1.0f64, 2.0, 2.0], vec![1.0, 3.0, 3.0], vec![1.0, 5.0, 5.0]];
        let y = [1.0, 2.0, 4.0];
        let b = least_squares(&rows, &y).unwrap();
        assert!((b[1] - b[2]).abs() < 1e-6);
    }
}
