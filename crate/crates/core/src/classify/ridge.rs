//! Closed-form multi-output ridge regression.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// In-place Cholesky solve of `A X = B` for symmetric positive-definite `A`
/// (`n × n`, row-major) and `B` (`n × k`, row-major). `B` is overwritten
/// with `X`.
pub(crate) fn cholesky_solve<T: Scalar>(a: &mut [T], n: usize, b: &mut [T], k: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d = d - a[j * n + p] * a[j * n + p];
        }
        if d.is_nan() || d <= T::zero() {
            return Err(Error::Classifier(format!("system not positive definite at pivot {j}")));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s = s - a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = s / d;
        }
    }
    for col in 0..k {
        // L y = b
        for i in 0..n {
            let mut s = b[i * k + col];
            for p in 0..i {
                s = s - a[i * n + p] * b[p * k + col];
            }
            b[i * k + col] = s / a[i * n + i];
        }
        // L^T x = y
        for i in (0..n).rev() {
            let mut s = b[i * k + col];
            for p in i + 1..n {
                s = s - a[p * n + i] * b[p * k + col];
            }
            b[i * k + col] = s / a[i * n + i];
        }
    }
    Ok(())
}

/// Solves `(GᵀG + λI) W = Gᵀ Y` for `G` (`n × p`) and `Y` (`n × k`).
///
/// When `p > n` the equivalent dual system `W = Gᵀ (G Gᵀ + λI)⁻¹ Y` is
/// solved instead. Returns `W` as `p × k` row-major.
pub(crate) fn ridge_solve<T: Scalar>(g: &[T], n: usize, p: usize, y: &[T], k: usize, lambda: T) -> Result<Vec<T>> {
    debug_assert_eq!(g.len(), n * p);
    debug_assert_eq!(y.len(), n * k);
    if p <= n {
        let mut gram = vec![T::zero(); p * p];
        for r in 0..n {
            let row = &g[r * p..(r + 1) * p];
            for i in 0..p {
                let gi = row[i];
                if gi == T::zero() {
                    continue;
                }
                for j in 0..=i {
                    gram[i * p + j] = gram[i * p + j] + gi * row[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                gram[j * p + i] = gram[i * p + j];
            }
            gram[i * p + i] = gram[i * p + i] + lambda;
        }
        let mut rhs = vec![T::zero(); p * k];
        for r in 0..n {
            for i in 0..p {
                let gi = g[r * p + i];
                for c in 0..k {
                    rhs[i * k + c] = rhs[i * k + c] + gi * y[r * k + c];
                }
            }
        }
        cholesky_solve(&mut gram, p, &mut rhs, k)?;
        Ok(rhs)
    } else {
        let mut kernel = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: T = (0..p).map(|c| g[i * p + c] * g[j * p + c]).sum();
                kernel[i * n + j] = v;
                kernel[j * n + i] = v;
            }
            kernel[i * n + i] = kernel[i * n + i] + lambda;
        }
        let mut alpha = y.to_vec();
        cholesky_solve(&mut kernel, n, &mut alpha, k)?;
        let mut w = vec![T::zero(); p * k];
        for r in 0..n {
            for i in 0..p {
                let gi = g[r * p + i];
                for c in 0..k {
                    w[i * k + c] = w[i * k + c] + gi * alpha[r * k + c];
                }
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Residual of the primal normal equations, computed with plain loops.
    fn residual(g: &[f64], n: usize, p: usize, y: &[f64], k: usize, lambda: f64, w: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..p {
            for c in 0..k {
                let mut lhs = lambda * w[i * k + c];
                let mut rhs = 0.0;
                for r in 0..n {
                    let pred: f64 = (0..p).map(|j| g[r * p + j] * w[j * k + c]).sum();
                    lhs += g[r * p + i] * pred;
                    rhs += g[r * p + i] * y[r * k + c];
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn primal_and_dual_satisfy_normal_equations() {
        let mut s = 7;
        for (n, p) in [(12, 4), (5, 9), (6, 6)] {
            let g: Vec<f64> = (0..n * p).map(|_| lcg(&mut s)).collect();
            let y: Vec<f64> = (0..n * 2).map(|_| lcg(&mut s)).collect();
            let w = ridge_solve(&g, n, p, &y, 2, 0.1).unwrap();
            assert!(residual(&g, n, p, &y, 2, 0.1, &w) <= 1e-8, "n={n} p={p}");
        }
    }

    #[test]
    fn degenerate_features_still_solve() {
        let g = vec![0.0; 20];
        let y = vec![1.0; 5];
        let w = ridge_solve(&g, 5, 4, &y, 1, 1e-2).unwrap();
        assert!(w.iter().all(|v| *v == 0.0));
    }
}
