//! Synthetic ground truth and mask generators for desk-scale experiments.

use super::{CubeError, HsiCube, MaskCube};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Cube whose pixels-by-bands unfolding has rank at most `rank`, rescaled
/// into the value range.
///
/// The spatial factor always contains the constant vector, so the affine
/// rescale (which adds a constant offset) cannot raise the rank.
pub fn synth_lowrank_cube(
    rows: usize,
    cols: usize,
    bands: usize,
    rank: usize,
    seed: u64,
) -> Result<HsiCube, CubeError> {
    let npix = rows * cols;
    if rank == 0 || rank > npix.min(bands) {
        return Err(CubeError::InvalidArgument(format!(
            "rank {rank} not in 1..=min({npix}, {bands})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Spatial factor: constant column first, then random columns
    // orthonormalized against the previous ones.
    let mut u = vec![vec![0.0f64; npix]; rank];
    let c = 1.0 / (npix as f64).sqrt();
    u[0].iter_mut().for_each(|v| *v = c);
    for k in 1..rank {
        loop {
            let mut col: Vec<f64> = (0..npix).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for prev in u.iter().take(k) {
                let dot: f64 = col.iter().zip(prev.iter()).map(|(a, b)| a * b).sum();
                for (x, p) in col.iter_mut().zip(prev.iter()) {
                    *x -= dot * p;
                }
            }
            let n = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                col.iter_mut().for_each(|x| *x /= n);
                u[k] = col;
                break;
            }
        }
    }

    // Spectral factor: random orthonormal columns with smooth structure so
    // adjacent bands correlate the way real spectra do.
    let mut v = vec![vec![0.0f64; bands]; rank];
    for (k, vk) in v.iter_mut().enumerate() {
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let freq = 0.5 + k as f64;
        for (b, x) in vk.iter_mut().enumerate() {
            let t = b as f64 / bands as f64;
            *x = (freq * std::f64::consts::TAU * t + phase).sin() + 0.25 * rng.gen_range(-1.0..1.0);
        }
    }
    for k in 0..rank {
        for j in 0..k {
            let dot: f64 = v[k].iter().zip(v[j].iter()).map(|(a, b)| a * b).sum();
            let prev = v[j].clone();
            for (x, p) in v[k].iter_mut().zip(prev.iter()) {
                *x -= dot * p;
            }
        }
        let n = v[k].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            v[k].iter_mut().for_each(|x| *x /= n);
        }
    }

    let mut cube = HsiCube::zeros(rows, cols, bands);
    for b in 0..bands {
        for pix in 0..npix {
            let mut s = 0.0;
            for k in 0..rank {
                s += u[k][pix] * v[k][b];
            }
            cube.data[b * npix + pix] = s;
        }
    }

    // Affine rescale into the value range.
    let (lo, hi) = cube.value_range;
    let min = cube.data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = cube.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max - min < 1e-12 {
        let mid = 0.5 * (lo + hi);
        cube.data.iter_mut().for_each(|x| *x = mid);
    } else {
        let a = (hi - lo) / (max - min);
        for x in cube.data.iter_mut() {
            *x = lo + a * (*x - min);
        }
    }
    Ok(cube)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Stripes,
    Block,
    RandomPixels,
    Text,
}

impl std::str::FromStr for MaskKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stripes" => Ok(Self::Stripes),
            "block" => Ok(Self::Block),
            "random_pixels" => Ok(Self::RandomPixels),
            "text" => Ok(Self::Text),
            other => Err(format!(
                "unknown mask kind {other} (stripes|block|random_pixels|text)"
            )),
        }
    }
}

// 5x7 glyph bitmaps used by the text mask.
const GLYPHS: [[u8; 7]; 3] = [
    // H
    [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
    // S
    [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110],
    // I
    [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b11111],
];

/// One spatial masking pattern (zeros = missing) replicated across all
/// bands, so whole spectra go missing at the masked locations.
pub fn make_mask(
    rows: usize,
    cols: usize,
    bands: usize,
    kind: MaskKind,
    fraction: f64,
    seed: u64,
) -> Result<MaskCube, CubeError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CubeError::InvalidArgument(format!(
            "fraction {fraction} outside (0,1)"
        )));
    }
    let npix = rows * cols;
    if npix < 2 {
        return Err(CubeError::InvalidArgument(
            "spatial extent too small to mask".into(),
        ));
    }
    let target = ((fraction * npix as f64).round() as usize).clamp(1, npix - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plane = vec![1u8; npix];

    match kind {
        MaskKind::RandomPixels => {
            let mut order: Vec<usize> = (0..npix).collect();
            order.shuffle(&mut rng);
            for &i in order.iter().take(target) {
                plane[i] = 0;
            }
        }
        MaskKind::Stripes => {
            let n_cols = ((fraction * cols as f64).round() as usize).clamp(1, cols - 1);
            let mut order: Vec<usize> = (0..cols).collect();
            order.shuffle(&mut rng);
            for &c in order.iter().take(n_cols) {
                for r in 0..rows {
                    plane[r * cols + c] = 0;
                }
            }
        }
        MaskKind::Block => {
            let h = ((fraction.sqrt() * rows as f64).round() as usize).clamp(1, rows);
            let w = ((target as f64 / h as f64).round() as usize).clamp(1, cols);
            let r0 = rng.gen_range(0..=(rows - h));
            let c0 = rng.gen_range(0..=(cols - w));
            for r in r0..r0 + h {
                for c in c0..c0 + w {
                    plane[r * cols + c] = 0;
                }
            }
        }
        MaskKind::Text => {
            // Stamp glyphs until the target count is reached, then trim or
            // top up with random pixels so the fraction is exact.
            let mut masked = 0usize;
            let mut attempts = 0usize;
            while masked < target && attempts < 64 {
                attempts += 1;
                let g = &GLYPHS[attempts % GLYPHS.len()];
                if rows < 7 || cols < 5 {
                    break;
                }
                let r0 = rng.gen_range(0..=(rows - 7));
                let c0 = rng.gen_range(0..=(cols - 5));
                for (dr, bits) in g.iter().enumerate() {
                    for dc in 0..5 {
                        if bits >> (4 - dc) & 1 == 1 {
                            let i = (r0 + dr) * cols + (c0 + dc);
                            if plane[i] == 1 {
                                plane[i] = 0;
                                masked += 1;
                            }
                        }
                    }
                }
            }
            // Exact-count adjustment.
            let mut order: Vec<usize> = (0..npix).collect();
            order.shuffle(&mut rng);
            let mut masked = plane.iter().filter(|&&v| v == 0).count();
            for &i in &order {
                if masked == target {
                    break;
                }
                if masked < target && plane[i] == 1 {
                    plane[i] = 0;
                    masked += 1;
                } else if masked > target && plane[i] == 0 {
                    plane[i] = 1;
                    masked -= 1;
                }
            }
        }
    }

    MaskCube::from_spatial_pattern(rows, cols, bands, &plane)
}
