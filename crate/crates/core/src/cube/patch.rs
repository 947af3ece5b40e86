//! Patch extraction and its adjoint over one spatial band.
//!
//! Patches are rectangular windows placed on a stride grid; a final clamped
//! position is added along each axis so the windows always cover the full
//! extent. `assemble_patches` is the exact adjoint of `extract_patches`,
//! returning both the accumulated plane and the per-pixel overlap counts
//! (the diagonal of the stacked projector Gram matrix).

use super::{CubeError, HsiCube};
use ndarray::Array2;

/// Placement of patches over a `rows x cols` spatial extent.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PatchLayout {
    pub rows: usize,
    pub cols: usize,
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub stride_rows: usize,
    pub stride_cols: usize,
}

impl PatchLayout {
    pub fn new(
        rows: usize,
        cols: usize,
        patch_rows: usize,
        patch_cols: usize,
        stride_rows: usize,
        stride_cols: usize,
    ) -> Result<Self, CubeError> {
        if patch_rows == 0 || patch_cols == 0 || stride_rows == 0 || stride_cols == 0 {
            return Err(CubeError::InvalidArgument(
                "patch and stride sizes must be positive".into(),
            ));
        }
        if patch_rows > rows || patch_cols > cols {
            return Err(CubeError::InvalidArgument(format!(
                "patch {patch_rows}x{patch_cols} exceeds extent {rows}x{cols}"
            )));
        }
        // Coverage requires the stride not to exceed the patch size.
        if stride_rows > patch_rows || stride_cols > patch_cols {
            return Err(CubeError::InvalidArgument(
                "stride larger than patch leaves uncovered pixels".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            patch_rows,
            patch_cols,
            stride_rows,
            stride_cols,
        })
    }

    /// One patch spanning the whole spatial plane.
    pub fn full_plane(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            patch_rows: rows,
            patch_cols: cols,
            stride_rows: rows,
            stride_cols: cols,
        }
    }

    fn starts(extent: usize, patch: usize, stride: usize) -> Vec<usize> {
        let mut s: Vec<usize> = (0..=(extent - patch)).step_by(stride).collect();
        let last = extent - patch;
        if *s.last().unwrap() != last {
            s.push(last);
        }
        s
    }

    pub fn row_starts(&self) -> Vec<usize> {
        Self::starts(self.rows, self.patch_rows, self.stride_rows)
    }

    pub fn col_starts(&self) -> Vec<usize> {
        Self::starts(self.cols, self.patch_cols, self.stride_cols)
    }

    pub fn count(&self) -> usize {
        self.row_starts().len() * self.col_starts().len()
    }

    pub fn patch_len(&self) -> usize {
        self.patch_rows * self.patch_cols
    }

    /// Per-pixel overlap multiplicities over the spatial extent.
    pub fn overlap_counts(&self) -> Array2<f64> {
        let mut counts = Array2::<f64>::zeros((self.rows, self.cols));
        for &r0 in &self.row_starts() {
            for &c0 in &self.col_starts() {
                for r in r0..r0 + self.patch_rows {
                    for c in c0..c0 + self.patch_cols {
                        counts[[r, c]] += 1.0;
                    }
                }
            }
        }
        counts
    }
}

/// Vectorized patches of one band, row-major within each patch, ordered by
/// row start then column start.
pub fn extract_patches(
    cube: &HsiCube,
    layout: &PatchLayout,
    band: usize,
) -> Result<Vec<Vec<f64>>, CubeError> {
    if band >= cube.bands {
        return Err(CubeError::InvalidArgument(format!(
            "band {band} out of range (bands={})",
            cube.bands
        )));
    }
    if layout.rows != cube.rows || layout.cols != cube.cols {
        return Err(CubeError::ShapeMismatch(format!(
            "layout extent {}x{} vs cube {}x{}",
            layout.rows, layout.cols, cube.rows, cube.cols
        )));
    }
    let plane = cube.band(band);
    let mut patches = Vec::with_capacity(layout.count());
    for &r0 in &layout.row_starts() {
        for &c0 in &layout.col_starts() {
            let mut p = Vec::with_capacity(layout.patch_len());
            for r in r0..r0 + layout.patch_rows {
                let row = &plane[r * cube.cols..(r + 1) * cube.cols];
                p.extend_from_slice(&row[c0..c0 + layout.patch_cols]);
            }
            patches.push(p);
        }
    }
    Ok(patches)
}

/// Adjoint accumulation: `plane = sum_i P_i^T(patch_i)` plus the overlap
/// counts. Dividing `plane` by `counts` elementwise averages overlapping
/// patches back into an image.
pub fn assemble_patches(
    patches: &[Vec<f64>],
    layout: &PatchLayout,
) -> Result<(Array2<f64>, Array2<f64>), CubeError> {
    if patches.len() != layout.count() {
        return Err(CubeError::InvalidArgument(format!(
            "got {} patches, layout expects {}",
            patches.len(),
            layout.count()
        )));
    }
    if layout.count() == 0 {
        return Err(CubeError::InvalidArgument("empty layout".into()));
    }
    let plen = layout.patch_len();
    if let Some(bad) = patches.iter().position(|p| p.len() != plen) {
        return Err(CubeError::InvalidArgument(format!(
            "patch {bad} has length {}, expected {plen}",
            patches[bad].len()
        )));
    }
    let mut plane = Array2::<f64>::zeros((layout.rows, layout.cols));
    let mut counts = Array2::<f64>::zeros((layout.rows, layout.cols));
    let mut i = 0;
    for &r0 in &layout.row_starts() {
        for &c0 in &layout.col_starts() {
            let p = &patches[i];
            for pr in 0..layout.patch_rows {
                for pc in 0..layout.patch_cols {
                    plane[[r0 + pr, c0 + pc]] += p[pr * layout.patch_cols + pc];
                    counts[[r0 + pr, c0 + pc]] += 1.0;
                }
            }
            i += 1;
        }
    }
    Ok((plane, counts))
}
