//! Band-averaged quality metrics: MPSNR, MSSIM, and MSAM.

use super::{CubeError, HsiCube};
use serde::{Deserialize, Serialize};

/// Ceiling applied to per-band PSNR when the band MSE is zero (or tiny).
#[derive(Debug, Clone, Copy)]
pub struct MpsnrCeiling(pub f64);

impl Default for MpsnrCeiling {
    fn default() -> Self {
        MpsnrCeiling(100.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QualityReport {
    /// Mean over bands of PSNR in dB, capped.
    pub mpsnr: f64,
    /// Mean over bands of SSIM; absent when the spatial extent is smaller
    /// than the 11x11 window.
    pub mssim: Option<f64>,
    /// Mean spectral angle in radians over spatial pixels.
    pub msam: f64,
    /// Pixels skipped by MSAM because one of the spectra had zero norm.
    pub msam_skipped: usize,
    /// True when every pixel was skipped (msam reported as 0).
    pub msam_all_skipped: bool,
}

fn check_shapes(reference: &HsiCube, test: &HsiCube) -> Result<(), CubeError> {
    if !reference.same_shape(test) {
        return Err(CubeError::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            reference.rows, reference.cols, reference.bands, test.rows, test.cols, test.bands
        )));
    }
    Ok(())
}

/// Mean over bands of `10 log10(range^2 / MSE_band)`, each band capped at
/// the ceiling.
pub fn mpsnr(reference: &HsiCube, test: &HsiCube) -> Result<f64, CubeError> {
    mpsnr_with_ceiling(reference, test, MpsnrCeiling::default())
}

pub fn mpsnr_with_ceiling(
    reference: &HsiCube,
    test: &HsiCube,
    ceiling: MpsnrCeiling,
) -> Result<f64, CubeError> {
    check_shapes(reference, test)?;
    let range = reference.value_range.1 - reference.value_range.0;
    if range <= 0.0 {
        return Err(CubeError::InvalidArgument(format!(
            "degenerate value range {:?}",
            reference.value_range
        )));
    }
    let plane = reference.plane_len();
    let mut total = 0.0;
    for b in 0..reference.bands {
        let rb = reference.band(b);
        let tb = test.band(b);
        let mse = rb
            .iter()
            .zip(tb.iter())
            .map(|(r, t)| (r - t) * (r - t))
            .sum::<f64>()
            / plane as f64;
        let psnr = if mse == 0.0 {
            ceiling.0
        } else {
            (10.0 * (range * range / mse).log10()).min(ceiling.0)
        };
        total += psnr;
    }
    Ok(total / reference.bands as f64)
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for dy in -half..=half {
        for dx in -half..=half {
            let d2 = (dy * dy + dx * dx) as f64;
            w.push((-d2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

/// Mean over bands of SSIM with an 11x11 Gaussian window (sigma 1.5) and the
/// conventional stabilizers `C1 = (0.01 range)^2`, `C2 = (0.03 range)^2`.
/// Windows are evaluated only where they fit entirely inside the band.
pub fn mssim(reference: &HsiCube, test: &HsiCube) -> Result<f64, CubeError> {
    check_shapes(reference, test)?;
    if reference.rows < SSIM_WINDOW || reference.cols < SSIM_WINDOW {
        return Err(CubeError::InvalidArgument(format!(
            "spatial extent {}x{} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window",
            reference.rows, reference.cols
        )));
    }
    let range = reference.value_range.1 - reference.value_range.0;
    let c1 = (0.01 * range) * (0.01 * range);
    let c2 = (0.03 * range) * (0.03 * range);
    let w = gaussian_window();
    let (rows, cols) = (reference.rows, reference.cols);
    let mut band_total = 0.0;
    for b in 0..reference.bands {
        let rb = reference.band(b);
        let tb = test.band(b);
        let mut acc = 0.0;
        let mut n = 0usize;
        for y0 in 0..=(rows - SSIM_WINDOW) {
            for x0 in 0..=(cols - SSIM_WINDOW) {
                let mut mu_x = 0.0;
                let mut mu_y = 0.0;
                let mut xx = 0.0;
                let mut yy = 0.0;
                let mut xy = 0.0;
                let mut wi = 0usize;
                for dy in 0..SSIM_WINDOW {
                    let row = (y0 + dy) * cols + x0;
                    for dx in 0..SSIM_WINDOW {
                        let wv = w[wi];
                        wi += 1;
                        let xv = rb[row + dx];
                        let yv = tb[row + dx];
                        mu_x += wv * xv;
                        mu_y += wv * yv;
                        xx += wv * xv * xv;
                        yy += wv * yv * yv;
                        xy += wv * xv * yv;
                    }
                }
                let var_x = xx - mu_x * mu_x;
                let var_y = yy - mu_y * mu_y;
                let cov = xy - mu_x * mu_y;
                let ssim = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                    / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
                acc += ssim;
                n += 1;
            }
        }
        band_total += acc / n as f64;
    }
    Ok(band_total / reference.bands as f64)
}

/// Mean spectral angle over spatial pixels, skipping pixels where either
/// spectrum has zero norm. Returns (angle, skipped, all_skipped).
pub fn msam(reference: &HsiCube, test: &HsiCube) -> Result<(f64, usize, bool), CubeError> {
    check_shapes(reference, test)?;
    let plane = reference.plane_len();
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for pix in 0..plane {
        let mut dot = 0.0;
        let mut nr = 0.0;
        let mut nt = 0.0;
        for b in 0..reference.bands {
            let rv = reference.data[b * plane + pix];
            let tv = test.data[b * plane + pix];
            dot += rv * tv;
            nr += rv * rv;
            nt += tv * tv;
        }
        if nr == 0.0 || nt == 0.0 {
            skipped += 1;
            continue;
        }
        let cos = (dot / (nr.sqrt() * nt.sqrt())).clamp(-1.0, 1.0);
        total += cos.acos();
        used += 1;
    }
    if used == 0 {
        return Ok((0.0, skipped, true));
    }
    Ok((total / used as f64, skipped, false))
}

/// All three metrics in one report. MSSIM is omitted (None) when the spatial
/// extent is smaller than the SSIM window.
pub fn quality_report(reference: &HsiCube, test: &HsiCube) -> Result<QualityReport, CubeError> {
    let mpsnr = mpsnr(reference, test)?;
    let mssim = match mssim(reference, test) {
        Ok(v) => Some(v),
        Err(CubeError::InvalidArgument(_)) => None,
        Err(e) => return Err(e),
    };
    let (msam, msam_skipped, msam_all_skipped) = msam(reference, test)?;
    Ok(QualityReport {
        mpsnr,
        mssim,
        msam,
        msam_skipped,
        msam_all_skipped,
    })
}
