//! Hyperspectral cube data model.
//!
//! A cube is `rows x cols x bands` of real values stored band-major: each
//! band is a contiguous row-major spatial plane. Masks share the shape and
//! hold 0 (missing) / 1 (valid) flags with one spatial pattern replicated
//! across all bands.

mod io;
mod metrics;
mod patch;
mod synth;

pub use io::{load_cube, load_mask, save_cube, save_mask};
pub use metrics::{mpsnr, msam, mssim, quality_report, MpsnrCeiling, QualityReport};
pub use patch::{assemble_patches, extract_patches, PatchLayout};
pub use synth::{make_mask, synth_lowrank_cube, MaskKind};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad cube file {path}: {reason}")]
    BadFile { path: String, reason: String },
}

/// Dense hyperspectral cube, band-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    /// Length `rows * cols * bands`; band b, row r, col c lives at
    /// `b * rows * cols + r * cols + c`.
    pub data: Vec<f64>,
    /// Value range used by the quality metrics, default (0, 1).
    pub value_range: (f64, f64),
}

impl HsiCube {
    pub fn zeros(rows: usize, cols: usize, bands: usize) -> Self {
        Self {
            rows,
            cols,
            bands,
            data: vec![0.0; rows * cols * bands],
            value_range: (0.0, 1.0),
        }
    }

    pub fn from_data(
        rows: usize,
        cols: usize,
        bands: usize,
        data: Vec<f64>,
    ) -> Result<Self, CubeError> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(CubeError::InvalidArgument(
                "dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols * bands {
            return Err(CubeError::ShapeMismatch(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                rows,
                cols,
                bands
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(CubeError::NonFinite(idx));
        }
        Ok(Self {
            rows,
            cols,
            bands,
            data,
            value_range: (0.0, 1.0),
        })
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn idx(&self, band: usize, row: usize, col: usize) -> usize {
        band * self.rows * self.cols + row * self.cols + col
    }

    #[inline]
    pub fn get(&self, band: usize, row: usize, col: usize) -> f64 {
        self.data[self.idx(band, row, col)]
    }

    #[inline]
    pub fn set(&mut self, band: usize, row: usize, col: usize, v: f64) {
        let i = self.idx(band, row, col);
        self.data[i] = v;
    }

    pub fn band(&self, b: usize) -> &[f64] {
        let p = self.plane_len();
        &self.data[b * p..(b + 1) * p]
    }

    pub fn same_shape(&self, other: &HsiCube) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.bands == other.bands
    }

    /// Per-pixel spectrum (length `bands`) at flat spatial index `pix`.
    pub fn spectrum(&self, pix: usize) -> Vec<f64> {
        let p = self.plane_len();
        (0..self.bands).map(|b| self.data[b * p + pix]).collect()
    }

    pub fn assert_finite(&self) -> Result<(), CubeError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(idx) => Err(CubeError::NonFinite(idx)),
            None => Ok(()),
        }
    }
}

/// Binary mask cube; 0 marks a missing pixel, 1 a valid one.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskCube {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub data: Vec<u8>,
}

impl MaskCube {
    pub fn ones(rows: usize, cols: usize, bands: usize) -> Self {
        Self {
            rows,
            cols,
            bands,
            data: vec![1; rows * cols * bands],
        }
    }

    pub fn from_data(
        rows: usize,
        cols: usize,
        bands: usize,
        data: Vec<u8>,
    ) -> Result<Self, CubeError> {
        if data.len() != rows * cols * bands {
            return Err(CubeError::ShapeMismatch(format!(
                "mask length {} != {}x{}x{}",
                data.len(),
                rows,
                cols,
                bands
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(CubeError::InvalidArgument(
                "mask values must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            bands,
            data,
        })
    }

    /// Build a mask by replicating one spatial plane (0/1) over all bands.
    pub fn from_spatial_pattern(
        rows: usize,
        cols: usize,
        bands: usize,
        plane: &[u8],
    ) -> Result<Self, CubeError> {
        if plane.len() != rows * cols {
            return Err(CubeError::ShapeMismatch(format!(
                "pattern length {} != {}x{}",
                plane.len(),
                rows,
                cols
            )));
        }
        let mut data = Vec::with_capacity(rows * cols * bands);
        for _ in 0..bands {
            data.extend_from_slice(plane);
        }
        Self::from_data(rows, cols, bands, data)
    }

    pub fn same_shape_as(&self, cube: &HsiCube) -> bool {
        self.rows == cube.rows && self.cols == cube.cols && self.bands == cube.bands
    }

    pub fn masked_fraction(&self) -> f64 {
        let zeros = self.data.iter().filter(|&&v| v == 0).count();
        zeros as f64 / self.data.len() as f64
    }
}

/// Zero out the entries of `cube` where the mask is 0.
pub fn apply_mask(cube: &HsiCube, mask: &MaskCube) -> Result<HsiCube, CubeError> {
    if !mask.same_shape_as(cube) {
        return Err(CubeError::ShapeMismatch(format!(
            "mask {}x{}x{} vs cube {}x{}x{}",
            mask.rows, mask.cols, mask.bands, cube.rows, cube.cols, cube.bands
        )));
    }
    let mut out = cube.clone();
    for (v, &m) in out.data.iter_mut().zip(mask.data.iter()) {
        if m == 0 {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Add i.i.d. Gaussian noise of standard deviation `sigma`, seeded.
pub fn add_gaussian_noise(cube: &HsiCube, sigma: f64, seed: u64) -> Result<HsiCube, CubeError> {
    if sigma < 0.0 {
        return Err(CubeError::InvalidArgument(format!(
            "negative sigma {sigma}"
        )));
    }
    let mut out = cube.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in out.data.iter_mut() {
        *v += sigma * standard_normal(&mut rng);
    }
    Ok(out)
}

/// Box-Muller draw; two uniforms per sample keeps the stream layout simple
/// and reproducible.
pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
