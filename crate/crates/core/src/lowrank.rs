//! Singular value thresholding on the pixels-by-bands unfolding.
//!
//! Unfolding direction is spatial-pixels x bands, so the shrinkage acts on
//! the spectral correlation structure. The threshold is the proximal
//! parameter of the nuclear norm: `svt(A, tau) = argmin_Z 0.5||Z - A||^2 +
//! tau ||Z||_*`.

use crate::cube::{CubeError, HsiCube};
use crate::linalg::{jacobi_svd, singular_value_sum};
use ndarray::Array2;

/// Band-unfold: column `b` is band `b`'s spatial plane in row-major order.
pub fn unfold(cube: &HsiCube) -> Array2<f64> {
    let npix = cube.plane_len();
    Array2::from_shape_fn((npix, cube.bands), |(p, b)| cube.data[b * npix + p])
}

/// Inverse of [`unfold`]; exact data movement, no arithmetic.
pub fn refold(matrix: &Array2<f64>, like: &HsiCube) -> Result<HsiCube, CubeError> {
    let npix = like.plane_len();
    if matrix.nrows() != npix || matrix.ncols() != like.bands {
        return Err(CubeError::ShapeMismatch(format!(
            "unfolded {}x{} vs cube expecting {}x{}",
            matrix.nrows(),
            matrix.ncols(),
            npix,
            like.bands
        )));
    }
    let mut out = like.clone();
    for b in 0..like.bands {
        for p in 0..npix {
            out.data[b * npix + p] = matrix[[p, b]];
        }
    }
    Ok(out)
}

/// Soft-threshold the singular values: `U max(S - tau, 0) V^T`.
pub fn svt(a: &Array2<f64>, tau: f64) -> Result<Array2<f64>, CubeError> {
    if tau < 0.0 {
        return Err(CubeError::InvalidArgument(format!("negative tau {tau}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(CubeError::InvalidArgument(
            "non-finite input to svt".into(),
        ));
    }
    let svd = jacobi_svd(a);
    Ok(svd.rebuild_with(|s| (s - tau).max(0.0)))
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Array2<f64>) -> f64 {
    singular_value_sum(a)
}
