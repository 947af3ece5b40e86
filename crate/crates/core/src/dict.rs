//! Dictionary model, baseline sparse coders, and online dictionary learning.
//!
//! Both coders minimize the same objective,
//! `(mu1/2) ||z - Phi a||^2 + w_s ||a||_1`,
//! one by proximal gradient (ISTA) and one by variable splitting (ADMM).
//! They cross-check each other and serve as oracles for the plug-and-play
//! solver.

use crate::linalg::{cholesky_solve, jacobi_svd, DenseOp, power_iteration_sigma};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DictError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad dictionary file {path}: {reason}")]
    BadFile { path: String, reason: String },
}

/// Atom matrix, `atom_len x n_atoms`, unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub atoms: Array2<f64>,
}

impl Dictionary {
    pub fn new(atoms: Array2<f64>) -> Result<Self, DictError> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(DictError::InvalidArgument("empty dictionary".into()));
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(DictError::InvalidArgument("non-finite atom entry".into()));
        }
        for j in 0..atoms.ncols() {
            let n: f64 = (0..atoms.nrows()).map(|i| atoms[[i, j]].powi(2)).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-8 {
                return Err(DictError::InvalidArgument(format!(
                    "atom {j} has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn atom_len(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    /// `Phi a`
    pub fn synthesize(&self, code: &Array1<f64>) -> Array1<f64> {
        self.atoms.dot(code)
    }

    /// `Phi^T r`
    pub fn analyze(&self, signal: &Array1<f64>) -> Array1<f64> {
        self.atoms.t().dot(signal)
    }

    /// Largest singular value, via power iteration.
    pub fn sigma_max(&self) -> f64 {
        power_iteration_sigma(&DenseOp(&self.atoms), 200, 0x5eed)
    }

    /// Smallest singular value (dense route; desk-scale matrices only).
    pub fn sigma_min(&self) -> f64 {
        let svd = jacobi_svd(&self.atoms);
        *svd.sigma.last().unwrap_or(&0.0)
    }
}

/// Sparse codes for a set of patches, one column per patch.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub coeffs: Array2<f64>,
}

impl SparseCode {
    pub fn zeros(n_atoms: usize, n_patches: usize) -> Self {
        Self {
            coeffs: Array2::zeros((n_atoms, n_patches)),
        }
    }
}

/// Elementwise `sign(v) * max(|v| - tau, 0)`.
pub fn soft_threshold(v: &Array1<f64>, tau: f64) -> Result<Array1<f64>, DictError> {
    if tau < 0.0 {
        return Err(DictError::InvalidArgument(format!("negative tau {tau}")));
    }
    Ok(v.mapv(|x| x.signum() * (x.abs() - tau).max(0.0)))
}

pub(crate) fn soft_threshold_inplace(v: &mut Array1<f64>, tau: f64) {
    v.mapv_inplace(|x| x.signum() * (x.abs() - tau).max(0.0));
}

fn lasso_objective(dict: &Dictionary, z: &Array1<f64>, w_s: f64, mu1: f64, a: &Array1<f64>) -> f64 {
    let r = z - &dict.synthesize(a);
    0.5 * mu1 * r.dot(&r) + w_s * a.iter().map(|x| x.abs()).sum::<f64>()
}

/// ISTA for `(mu1/2)||z - Phi a||^2 + w_s ||a||_1`.
///
/// `step` is the gradient step; pass `None` for `1/beta` with
/// `beta = mu1 * sigma_max(Phi)^2`. The warm start defaults to zero.
pub fn ista_sparse_code(
    dict: &Dictionary,
    z: &Array1<f64>,
    w_s: f64,
    mu1: f64,
    iters: usize,
    step: Option<f64>,
) -> Result<Array1<f64>, DictError> {
    ista_sparse_code_warm(dict, z, w_s, mu1, iters, step, None)
}

pub fn ista_sparse_code_warm(
    dict: &Dictionary,
    z: &Array1<f64>,
    w_s: f64,
    mu1: f64,
    iters: usize,
    step: Option<f64>,
    warm: Option<&Array1<f64>>,
) -> Result<Array1<f64>, DictError> {
    if z.len() != dict.atom_len() {
        return Err(DictError::DimensionMismatch(format!(
            "signal length {} vs atom length {}",
            z.len(),
            dict.atom_len()
        )));
    }
    if iters == 0 {
        return Err(DictError::InvalidArgument("iters must be >= 1".into()));
    }
    if mu1 <= 0.0 {
        return Err(DictError::InvalidArgument(format!("mu1 {mu1} must be > 0")));
    }
    let beta = mu1 * dict.sigma_max().powi(2);
    let eta = match step {
        Some(s) if s <= 0.0 => {
            return Err(DictError::InvalidArgument(format!("non-positive step {s}")))
        }
        Some(s) => s,
        None => {
            if beta > 0.0 {
                1.0 / beta
            } else {
                1.0
            }
        }
    };
    let mut a = match warm {
        Some(w) => w.clone(),
        None => Array1::zeros(dict.n_atoms()),
    };
    let tau = eta * w_s;
    for _ in 0..iters {
        let grad = dict.analyze(&(dict.synthesize(&a) - z)) * mu1;
        a = a - eta * &grad;
        soft_threshold_inplace(&mut a, tau);
    }
    Ok(a)
}

/// ADMM for the same lasso objective. The alpha step is a ridge-regularized
/// linear solve in `(mu1 Phi^T Phi + rho I)`, the v step a soft threshold at
/// `w_s / rho`, and the scaled residual drives the dual update. Returns the
/// code and the final primal residual `||a - v||`.
pub fn admm_sparse_code(
    dict: &Dictionary,
    z: &Array1<f64>,
    w_s: f64,
    mu1: f64,
    rho: f64,
    iters: usize,
) -> Result<(Array1<f64>, f64), DictError> {
    if z.len() != dict.atom_len() {
        return Err(DictError::DimensionMismatch(format!(
            "signal length {} vs atom length {}",
            z.len(),
            dict.atom_len()
        )));
    }
    if rho <= 0.0 {
        return Err(DictError::InvalidArgument(format!("rho {rho} must be > 0")));
    }
    let n = dict.n_atoms();
    // rho > 0 keeps the system positive definite even for overcomplete Phi.
    let mut h = dict.atoms.t().dot(&dict.atoms) * mu1;
    for i in 0..n {
        h[[i, i]] += rho;
    }
    let phitz = dict.analyze(z) * mu1;

    let mut a = Array1::<f64>::zeros(n);
    let mut v = Array1::<f64>::zeros(n);
    let mut u = Array1::<f64>::zeros(n);
    let mut residual = 0.0;
    for _ in 0..iters {
        let rhs = &phitz + &((&v - &u) * rho);
        a = cholesky_solve(&h, &rhs)
            .ok_or_else(|| DictError::SolveFailed("alpha-step system not SPD".into()))?;
        let mut t = &a + &u;
        soft_threshold_inplace(&mut t, w_s / rho);
        v = t;
        let diff = &a - &v;
        u = &u + &diff;
        residual = diff.dot(&diff).sqrt();
    }
    Ok((a, residual))
}

/// Dictionary learned from patches by online block-coordinate updates:
/// per-sample sparse coding followed by rank-accumulated atom updates with
/// re-normalization. Atoms unused during a full epoch are re-seeded from the
/// worst-reconstructed patch.
pub fn online_dictionary_learn(
    patches: &[Vec<f64>],
    n_atoms: usize,
    w_s: f64,
    epochs: usize,
    seed: u64,
) -> Result<Dictionary, DictError> {
    if patches.is_empty() {
        return Err(DictError::InvalidArgument("empty patch set".into()));
    }
    if n_atoms == 0 {
        return Err(DictError::InvalidArgument("n_atoms must be >= 1".into()));
    }
    let atom_len = patches[0].len();
    if atom_len == 0 || patches.iter().any(|p| p.len() != atom_len) {
        return Err(DictError::InvalidArgument(
            "patches must share a positive length".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Initialization: sample patches without replacement; once exhausted,
    // reuse jittered copies so overcomplete dictionaries still initialize.
    let mut order: Vec<usize> = (0..patches.len()).collect();
    order.shuffle(&mut rng);
    let mut atoms = Array2::<f64>::zeros((atom_len, n_atoms));
    for j in 0..n_atoms {
        let src = &patches[order[j % patches.len()]];
        let mut col: Vec<f64> = src.clone();
        if j >= patches.len() {
            for x in col.iter_mut() {
                *x += 0.05 * rng.gen_range(-1.0..1.0);
            }
        }
        let mut norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            for x in col.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        for (i, x) in col.iter().enumerate() {
            atoms[[i, j]] = x / norm;
        }
    }

    let inner_iters = 50;
    let mut gram_acc = Array2::<f64>::zeros((n_atoms, n_atoms));
    let mut corr_acc = Array2::<f64>::zeros((atom_len, n_atoms));

    for _epoch in 0..epochs {
        let mut sample_order: Vec<usize> = (0..patches.len()).collect();
        sample_order.shuffle(&mut rng);
        let mut used = vec![false; n_atoms];

        for &pi in &sample_order {
            let dict = Dictionary {
                atoms: atoms.clone(),
            };
            let p = Array1::from_vec(patches[pi].clone());
            let code = ista_sparse_code(&dict, &p, w_s, 1.0, inner_iters, None)?;
            for (j, &c) in code.iter().enumerate() {
                if c != 0.0 {
                    used[j] = true;
                }
            }
            // Accumulate sufficient statistics A += a a^T, B += p a^T.
            for j in 0..n_atoms {
                let cj = code[j];
                if cj == 0.0 {
                    continue;
                }
                for k in 0..n_atoms {
                    gram_acc[[j, k]] += cj * code[k];
                }
                for i in 0..atom_len {
                    corr_acc[[i, j]] += p[i] * cj;
                }
            }
            // Block-coordinate atom update with re-normalization.
            for j in 0..n_atoms {
                let ajj = gram_acc[[j, j]];
                if ajj < 1e-12 {
                    continue;
                }
                let mut col = vec![0.0f64; atom_len];
                for (i, c) in col.iter_mut().enumerate() {
                    let mut phi_a = 0.0;
                    for k in 0..n_atoms {
                        phi_a += atoms[[i, k]] * gram_acc[[k, j]];
                    }
                    *c = atoms[[i, j]] + (corr_acc[[i, j]] - phi_a) / ajj;
                }
                let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for i in 0..atom_len {
                        atoms[[i, j]] = col[i] / norm;
                    }
                }
            }
        }

        // Re-seed atoms that sat out the whole epoch.
        let dict = Dictionary {
            atoms: atoms.clone(),
        };
        let mut worst = 0usize;
        let mut worst_err = -1.0;
        for (pi, patch) in patches.iter().enumerate() {
            let p = Array1::from_vec(patch.clone());
            let code = ista_sparse_code(&dict, &p, w_s, 1.0, inner_iters, None)?;
            let r = &p - &dict.synthesize(&code);
            let err = r.dot(&r);
            if err > worst_err {
                worst_err = err;
                worst = pi;
            }
        }
        for j in 0..n_atoms {
            if used[j] {
                continue;
            }
            let mut col: Vec<f64> = patches[worst].clone();
            for x in col.iter_mut() {
                *x += 0.02 * rng.gen_range(-1.0..1.0);
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for i in 0..atom_len {
                    atoms[[i, j]] = col[i] / norm;
                }
            }
        }
    }

    Dictionary::new(atoms)
}

/// Mean per-patch lasso objective at a fixed coding budget; the learning
/// tests track this across epochs.
pub fn mean_reconstruction_objective(
    dict: &Dictionary,
    patches: &[Vec<f64>],
    w_s: f64,
) -> Result<f64, DictError> {
    let mut total = 0.0;
    for patch in patches {
        let p = Array1::from_vec(patch.clone());
        let code = ista_sparse_code(dict, &p, w_s, 1.0, 50, None)?;
        total += lasso_objective(dict, &p, w_s, 1.0, &code);
    }
    Ok(total / patches.len() as f64)
}

#[derive(Debug, Serialize, Deserialize)]
struct DictHeader {
    atom_len: usize,
    n_atoms: usize,
}

fn resolve(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    (stem.with_extension("json"), stem.with_extension("bin"))
}

/// Write `<name>.json` header plus `<name>.bin` column-major f32 payload.
pub fn save_dictionary(dict: &Dictionary, path: &Path) -> Result<(), DictError> {
    let (hpath, bpath) = resolve(path);
    let header = DictHeader {
        atom_len: dict.atom_len(),
        n_atoms: dict.n_atoms(),
    };
    std::fs::write(&hpath, serde_json::to_string(&header).expect("serializes")).map_err(|e| {
        DictError::Io {
            path: hpath.display().to_string(),
            source: e,
        }
    })?;
    let mut payload = Vec::with_capacity(dict.atom_len() * dict.n_atoms() * 4);
    for j in 0..dict.n_atoms() {
        for i in 0..dict.atom_len() {
            payload.extend_from_slice(&(dict.atoms[[i, j]] as f32).to_le_bytes());
        }
    }
    std::fs::write(&bpath, payload).map_err(|e| DictError::Io {
        path: bpath.display().to_string(),
        source: e,
    })
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary, DictError> {
    let (hpath, bpath) = resolve(path);
    let text = std::fs::read_to_string(&hpath).map_err(|e| DictError::Io {
        path: hpath.display().to_string(),
        source: e,
    })?;
    let header: DictHeader = serde_json::from_str(&text).map_err(|e| DictError::BadFile {
        path: hpath.display().to_string(),
        reason: format!("invalid header: {e}"),
    })?;
    let bytes = std::fs::read(&bpath).map_err(|e| DictError::Io {
        path: bpath.display().to_string(),
        source: e,
    })?;
    let expect = header.atom_len * header.n_atoms * 4;
    if bytes.len() != expect {
        return Err(DictError::BadFile {
            path: bpath.display().to_string(),
            reason: format!("payload {} bytes, header implies {expect}", bytes.len()),
        });
    }
    let mut atoms = Array2::<f64>::zeros((header.atom_len, header.n_atoms));
    let mut it = bytes.chunks_exact(4);
    for j in 0..header.n_atoms {
        for i in 0..header.atom_len {
            let chunk = it.next().unwrap();
            atoms[[i, j]] = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
        }
    }
    // Atoms were quantized to f32; re-normalize to restore the unit-norm
    // invariant before validation.
    for j in 0..header.n_atoms {
        let n: f64 = (0..header.atom_len)
            .map(|i| atoms[[i, j]].powi(2))
            .sum::<f64>()
            .sqrt();
        if n > 1e-12 {
            for i in 0..header.atom_len {
                atoms[[i, j]] /= n;
            }
        }
    }
    Dictionary::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn identity_dict(n: usize) -> Dictionary {
        Dictionary::new(Array2::eye(n)).unwrap()
    }

    fn random_dict(atom_len: usize, n_atoms: usize, seed: u64) -> Dictionary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut atoms = Array2::from_shape_fn((atom_len, n_atoms), |_| rng.gen_range(-1.0..1.0));
        for j in 0..n_atoms {
            let n: f64 = (0..atom_len).map(|i| atoms[[i, j]].powi(2)).sum::<f64>().sqrt();
            for i in 0..atom_len {
                atoms[[i, j]] /= n;
            }
        }
        Dictionary::new(atoms).unwrap()
    }

    #[test]
    fn soft_threshold_scalar_cases() {
        let out = soft_threshold(&array![1.2], 0.5).unwrap();
        assert!((out[0] - 0.7).abs() < 1e-15);
        let out = soft_threshold(&array![-0.3], 0.5).unwrap();
        assert_eq!(out[0], 0.0);
        let out = soft_threshold(&array![-2.0, 0.0, 2.0], 1.0).unwrap();
        assert_eq!(out.to_vec(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn soft_threshold_zero_tau_is_identity() {
        let v = array![0.3, -0.7, 1.5];
        assert_eq!(soft_threshold(&v, 0.0).unwrap(), v);
    }

    #[test]
    fn soft_threshold_rejects_negative_tau() {
        assert!(soft_threshold(&array![1.0], -0.1).is_err());
    }

    #[test]
    fn soft_threshold_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = Array1::from_shape_fn(8, |_| rng.gen_range(-2.0..2.0));
            let b = Array1::from_shape_fn(8, |_| rng.gen_range(-2.0..2.0));
            let sa = soft_threshold(&a, 0.6).unwrap();
            let sb = soft_threshold(&b, 0.6).unwrap();
            let d1 = (&sa - &sb).mapv(|x| x * x).sum().sqrt();
            let d2 = (&a - &b).mapv(|x| x * x).sum().sqrt();
            assert!(d1 <= d2 + 1e-12);
        }
    }

    #[test]
    fn ista_orthonormal_dictionary_is_one_threshold() {
        let dict = identity_dict(2);
        let z = array![1.2, -0.3];
        let a = ista_sparse_code(&dict, &z, 0.5, 1.0, 200, None).unwrap();
        assert!((a[0] - 0.7).abs() < 1e-10, "{:?}", a);
        assert!(a[1].abs() < 1e-12);
    }

    #[test]
    fn ista_zero_weight_recovers_least_squares() {
        let dict = random_dict(4, 4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z = Array1::from_shape_fn(4, |_| rng.gen_range(-1.0..1.0));
        let a = ista_sparse_code(&dict, &z, 0.0, 1.0, 20000, None).unwrap();
        let r = &z - &dict.synthesize(&a);
        assert!(r.dot(&r).sqrt() < 1e-6, "residual {}", r.dot(&r).sqrt());
    }

    #[test]
    fn ista_objective_is_nonincreasing() {
        let dict = random_dict(8, 12, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let z = Array1::from_shape_fn(8, |_| rng.gen_range(-1.0..1.0));
        let mut last = f64::INFINITY;
        let mut a = Array1::zeros(12);
        for _ in 0..100 {
            a = ista_sparse_code_warm(&dict, &z, 0.1, 1.0, 1, None, Some(&a)).unwrap();
            let obj = lasso_objective(&dict, &z, 0.1, 1.0, &a);
            assert!(obj <= last + 1e-12);
            last = obj;
        }
    }

    #[test]
    fn ista_matches_long_run_reference() {
        let dict = random_dict(8, 12, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let z = Array1::from_shape_fn(8, |_| rng.gen_range(-1.0..1.0));
        let long = ista_sparse_code(&dict, &z, 0.2, 1.0, 100_000, None).unwrap();
        let short = ista_sparse_code(&dict, &z, 0.2, 1.0, 5000, None).unwrap();
        let ref_obj = lasso_objective(&dict, &z, 0.2, 1.0, &long);
        let obj = lasso_objective(&dict, &z, 0.2, 1.0, &short);
        assert!(obj - ref_obj < 1e-8, "gap {}", obj - ref_obj);
    }

    #[test]
    fn admm_matches_closed_forms() {
        let dict = identity_dict(2);
        let z = array![1.2, -0.3];
        let (a, _res) = admm_sparse_code(&dict, &z, 0.5, 1.0, 1.0, 300).unwrap();
        assert!((a[0] - 0.7).abs() < 1e-6, "{:?}", a);
        assert!(a[1].abs() < 1e-6);

        let dict = random_dict(5, 5, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let z = Array1::from_shape_fn(5, |_| rng.gen_range(-1.0..1.0));
        let (a, _) = admm_sparse_code(&dict, &z, 0.0, 1.0, 1.0, 500).unwrap();
        let r = &z - &dict.synthesize(&a);
        assert!(r.dot(&r).sqrt() < 1e-6);
    }

    #[test]
    fn admm_and_ista_agree_on_random_instances() {
        for seed in 0..5 {
            let dict = random_dict(8, 12, 40 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(50 + seed);
            let z = Array1::from_shape_fn(8, |_| rng.gen_range(-1.0..1.0));
            let ia = ista_sparse_code(&dict, &z, 0.15, 1.0, 50_000, None).unwrap();
            let (aa, _) = admm_sparse_code(&dict, &z, 0.15, 1.0, 1.0, 2000).unwrap();
            let oi = lasso_objective(&dict, &z, 0.15, 1.0, &ia);
            let oa = lasso_objective(&dict, &z, 0.15, 1.0, &aa);
            assert!((oi - oa).abs() < 1e-6, "seed {seed}: {oi} vs {oa}");
        }
    }

    #[test]
    fn lasso_optimality_conditions_hold() {
        let w_s = 0.2;
        let mu1 = 0.7;
        for seed in 0..3 {
            let dict = random_dict(8, 12, 60 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(70 + seed);
            let z = Array1::from_shape_fn(8, |_| rng.gen_range(-1.0..1.0));
            let a = ista_sparse_code(&dict, &z, w_s, mu1, 200_000, None).unwrap();
            let corr = dict.analyze(&(&z - &dict.synthesize(&a))) * mu1;
            for j in 0..12 {
                assert!(
                    corr[j].abs() <= w_s + 1e-4,
                    "coordinate {j}: |{}| > {w_s}",
                    corr[j]
                );
                if a[j].abs() > 1e-6 {
                    assert!(
                        (corr[j] - w_s * a[j].signum()).abs() < 1e-4,
                        "support sign mismatch at {j}: corr {} code {}",
                        corr[j],
                        a[j]
                    );
                }
            }
        }
    }

    #[test]
    fn learning_rank_one_data_recovers_the_direction() {
        let v = vec![1.0, 2.0, -1.0, 0.5];
        let patches: Vec<Vec<f64>> = (0..6).map(|_| v.clone()).collect();
        let dict = online_dictionary_learn(&patches, 1, 0.05, 3, 1).unwrap();
        let norm_v = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let unit: Vec<f64> = v.iter().map(|x| x / norm_v).collect();
        let dot: f64 = (0..4).map(|i| dict.atoms[[i, 0]] * unit[i]).sum();
        assert!(dot.abs() > 1.0 - 1e-6, "atom not aligned: dot {dot}");
    }

    #[test]
    fn learning_orthogonal_directions_spans_the_subspace() {
        let dirs = [
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut patches = Vec::new();
        for k in 0..30 {
            let scale: f64 = rng.gen_range(0.5..2.0);
            patches.push(dirs[k % 3].iter().map(|x| x * scale).collect());
        }
        let dict = online_dictionary_learn(&patches, 3, 0.01, 5, 2).unwrap();
        // Each learned atom must lie in span(e0,e1,e2): components 3..6 ~ 0.
        for j in 0..3 {
            let tail: f64 = (3..6).map(|i| dict.atoms[[i, j]].powi(2)).sum::<f64>().sqrt();
            assert!(tail < 1e-3, "atom {j} leaves the subspace: {tail}");
        }
        // And the atoms must span all three directions.
        let svd = jacobi_svd(&dict.atoms);
        assert!(svd.sigma[2] > 1e-3, "atoms collapsed: {:?}", svd.sigma);
    }

    #[test]
    fn learning_is_deterministic_and_objective_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let patches: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let d1 = online_dictionary_learn(&patches, 4, 0.1, 2, 7).unwrap();
        let d2 = online_dictionary_learn(&patches, 4, 0.1, 2, 7).unwrap();
        assert_eq!(d1, d2);

        let mut last = f64::INFINITY;
        for epochs in 1..=4 {
            let d = online_dictionary_learn(&patches, 4, 0.1, epochs, 7).unwrap();
            let obj = mean_reconstruction_objective(&d, &patches, 0.1).unwrap();
            assert!(
                obj <= last + 1e-6,
                "objective rose from {last} to {obj} at epoch {epochs}"
            );
            last = obj;
        }
    }

    #[test]
    fn learning_rejects_empty_patches() {
        assert!(online_dictionary_learn(&[], 2, 0.1, 1, 0).is_err());
    }

    #[test]
    fn dictionary_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let dict = random_dict(6, 9, 77);
        let path = dir.path().join("dict");
        save_dictionary(&dict, &path).unwrap();
        let back = load_dictionary(&path).unwrap();
        assert_eq!(back.atom_len(), 6);
        assert_eq!(back.n_atoms(), 9);
        for (a, b) in back.atoms.iter().zip(dict.atoms.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
