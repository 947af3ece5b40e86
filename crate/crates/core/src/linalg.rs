//! Small dense linear-algebra routines shared across the crate.
//!
//! Everything here is deterministic: fixed sweep orders, fixed tie-breaking,
//! and seeded start vectors. The matrices involved are desk-scale (a few
//! hundred rows at most), so plain dense algorithms are sufficient.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Thin SVD `A = U * diag(sigma) * Vt` with `k = min(rows, cols)` columns.
///
/// Singular values are sorted in descending order. Columns of `U` belonging
/// to zero singular values are left as zero vectors. The sign convention
/// forces the largest-magnitude entry of each left singular vector to be
/// non-negative, so repeated factorizations of the same matrix are
/// reproducible entry for entry.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Array2<f64>,
    pub sigma: Vec<f64>,
    pub vt: Array2<f64>,
}

impl Svd {
    /// Rebuild `U * diag(f(sigma)) * Vt` for a per-singular-value map `f`.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let (m, k) = (self.u.nrows(), self.sigma.len());
        let n = self.vt.ncols();
        let mut out = Array2::zeros((m, n));
        for idx in 0..k {
            let s = f(self.sigma[idx]);
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let us = self.u[[i, idx]] * s;
                if us == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[[i, j]] += us * self.vt[[idx, j]];
                }
            }
        }
        out
    }
}

/// One-sided Jacobi SVD. Deterministic cyclic sweeps; wide matrices are
/// handled by factoring the transpose.
pub fn jacobi_svd(a: &Array2<f64>) -> Svd {
    let (m, n) = a.dim();
    if m < n {
        let t = jacobi_svd(&a.t().to_owned());
        // A = (A^T)^T = (U S Vt)^T = Vt^T S U^T
        return Svd {
            u: t.vt.t().to_owned(),
            sigma: t.sigma,
            vt: t.u.t().to_owned(),
        };
    }

    let mut b = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-14 * scale * scale;

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let bp = b[[i, p]];
                    let bq = b[[i, q]];
                    app += bp * bp;
                    aqq += bq * bq;
                    apq += bp * bq;
                }
                if apq.abs() <= tol || apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Rutishauser rotation annihilating the (p,q) Gram entry.
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bp = b[[i, p]];
                    let bq = b[[i, q]];
                    b[[i, p]] = c * bp - s * bq;
                    b[[i, q]] = s * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[[i, p]];
                    let vq = v[[i, q]];
                    v[[i, p]] = c * vp - s * vq;
                    v[[i, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort descending (stable).
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b[[i, j]] * b[[i, j]]).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));

    let mut u = Array2::<f64>::zeros((m, n));
    let mut vt = Array2::<f64>::zeros((n, n));
    let mut sigma = vec![0.0; n];
    for (idx, &j) in order.iter().enumerate() {
        sigma[idx] = norms[j];
        if norms[j] > 1e-300 {
            for i in 0..m {
                u[[i, idx]] = b[[i, j]] / norms[j];
            }
        }
        for i in 0..n {
            vt[[idx, i]] = v[[i, j]];
        }
        // Sign convention: largest-magnitude entry of each left vector >= 0.
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..m {
            if u[[i, idx]].abs() > best_abs {
                best_abs = u[[i, idx]].abs();
                best = i;
            }
        }
        if u[[best, idx]] < 0.0 {
            for i in 0..m {
                u[[i, idx]] = -u[[i, idx]];
            }
            for i in 0..n {
                vt[[idx, i]] = -vt[[idx, i]];
            }
        }
    }

    Svd { u, sigma, vt }
}

/// Sum of singular values.
pub fn singular_value_sum(a: &Array2<f64>) -> f64 {
    jacobi_svd(a).sigma.iter().sum()
}

/// Solve `H x = b` for a symmetric positive-definite `H` via Cholesky.
///
/// Returns `None` if a non-positive pivot shows up (H not SPD to working
/// precision).
pub fn cholesky_solve(h: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = h.nrows();
    assert_eq!(h.ncols(), n);
    assert_eq!(b.len(), n);
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = h[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    Some(x)
}

/// A linear map exposed operationally, for power iteration without ever
/// materializing the matrix.
pub trait LinearOperator {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]);
}

/// Dense matrix viewed as a `LinearOperator`.
pub struct DenseOp<'a>(pub &'a Array2<f64>);

impl LinearOperator for DenseOp<'_> {
    fn in_dim(&self) -> usize {
        self.0.ncols()
    }
    fn out_dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, xj) in x.iter().enumerate() {
                s += self.0[[i, j]] * xj;
            }
            *o = s;
        }
    }
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, yi) in y.iter().enumerate() {
                s += self.0[[i, j]] * yi;
            }
            *o = s;
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Largest singular value of `op` by alternating power iteration, starting
/// from a seeded random right vector. The estimate converges from below.
pub fn power_iteration_sigma(op: &dyn LinearOperator, iters: usize, seed: u64) -> f64 {
    let mut v = seeded_unit_vector(op.in_dim(), seed);
    power_iteration_sigma_warm(op, iters, &mut v)
}

/// Same as [`power_iteration_sigma`] but reusing a caller-owned right vector,
/// which lets training loops warm-start across steps.
pub fn power_iteration_sigma_warm(
    op: &dyn LinearOperator,
    iters: usize,
    v: &mut Vec<f64>,
) -> f64 {
    assert_eq!(v.len(), op.in_dim());
    if normalize(v) == 0.0 {
        // Degenerate warm vector; restart deterministically.
        *v = seeded_unit_vector(op.in_dim(), 0x9e37_79b9);
    }
    let mut u = vec![0.0; op.out_dim()];
    let mut sigma = 0.0;
    for _ in 0..iters.max(1) {
        op.apply(v, &mut u);
        sigma = normalize(&mut u);
        if sigma == 0.0 {
            return 0.0;
        }
        op.apply_adjoint(&u, v);
        normalize(v);
    }
    // One final apply so sigma corresponds to the returned v.
    op.apply(v, &mut u);
    norm2(&u)
}

pub fn seeded_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if normalize(&mut v) == 0.0 {
        v = vec![0.0; n];
        if n > 0 {
            v[0] = 1.0;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use ndarray::array;

    fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
    }

    fn random_matrix(m: usize, n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn svd_singular_values_match_nalgebra() {
        for seed in 0..20 {
            let a = random_matrix(8, 6, seed);
            let mine = jacobi_svd(&a);
            let theirs = to_na(&a).svd(false, false);
            let mut ref_sv: Vec<f64> = theirs.singular_values.iter().copied().collect();
            ref_sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
            for (s_mine, s_ref) in mine.sigma.iter().zip(ref_sv.iter()) {
                assert!(
                    (s_mine - s_ref).abs() < 1e-10,
                    "sigma mismatch: {s_mine} vs {s_ref}"
                );
            }
        }
    }

    #[test]
    fn svd_reconstructs_input() {
        for seed in [3u64, 17, 91] {
            for (m, n) in [(7, 4), (4, 7), (5, 5)] {
                let a = random_matrix(m, n, seed);
                let back = jacobi_svd(&a).rebuild_with(|s| s);
                for i in 0..m {
                    for j in 0..n {
                        assert!((back[[i, j]] - a[[i, j]]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn svd_sign_convention_is_reproducible() {
        let a = random_matrix(6, 4, 5);
        let s1 = jacobi_svd(&a);
        let s2 = jacobi_svd(&a);
        assert_eq!(s1.u, s2.u);
        assert_eq!(s1.vt, s2.vt);
        for j in 0..s1.sigma.len() {
            let col: Vec<f64> = (0..6).map(|i| s1.u[[i, j]]).collect();
            let best = col
                .iter()
                .cloned()
                .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                .unwrap();
            assert!(best >= 0.0, "sign convention violated in column {j}");
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = random_matrix(6, 6, 11);
        let h = a.t().dot(&a) + Array2::<f64>::eye(6);
        let b = Array1::from_vec((0..6).map(|i| i as f64 - 2.5).collect());
        let x = cholesky_solve(&h, &b).expect("SPD");
        let r = h.dot(&x) - &b;
        assert!(norm2(r.as_slice().unwrap()) < 1e-10);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let h = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3, -1
        assert!(cholesky_solve(&h, &array![1.0, 1.0]).is_none());
    }

    #[test]
    fn power_iteration_matches_svd_on_dense() {
        let a = random_matrix(9, 7, 23);
        let sigma_pi = power_iteration_sigma(&DenseOp(&a), 300, 7);
        let sigma_ref = jacobi_svd(&a).sigma[0];
        assert!((sigma_pi - sigma_ref).abs() < 1e-8, "{sigma_pi} vs {sigma_ref}");
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let a = array![[2.0, 0.0], [0.0, 1.0]];
        let sigma = power_iteration_sigma(&DenseOp(&a), 50, 0);
        assert!((sigma - 2.0).abs() < 1e-6);
    }

    #[test]
    fn power_iteration_zero_operator() {
        let a = Array2::<f64>::zeros((3, 3));
        assert_eq!(power_iteration_sigma(&DenseOp(&a), 10, 0), 0.0);
    }
}
