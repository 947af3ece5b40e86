//! Cube and mask file format: a JSON header next to a raw little-endian
//! payload. `<name>.json` holds shape/dtype/order/range, `<name>.bin` holds
//! the values in band-major order, 32-bit floats for cubes and single bytes
//! for masks.

use super::{CubeError, HsiCube, MaskCube};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    rows: usize,
    cols: usize,
    bands: usize,
    dtype: String,
    order: String,
    range: [f64; 2],
}

/// Accepts either `<name>`, `<name>.json`, or `<name>.bin` and returns the
/// header/payload pair.
fn resolve(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn io_err(path: &Path, source: std::io::Error) -> CubeError {
    CubeError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad(path: &Path, reason: impl Into<String>) -> CubeError {
    CubeError::BadFile {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn read_header(path: &Path, expect_dtype: &str) -> Result<Header, CubeError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let header: Header =
        serde_json::from_str(&text).map_err(|e| bad(path, format!("invalid header: {e}")))?;
    if header.dtype != expect_dtype {
        return Err(bad(
            path,
            format!("dtype {} (expected {expect_dtype})", header.dtype),
        ));
    }
    if header.order != "band-major" {
        return Err(bad(path, format!("unsupported order {}", header.order)));
    }
    if header.rows == 0 || header.cols == 0 || header.bands == 0 {
        return Err(bad(path, "zero dimension"));
    }
    Ok(header)
}

pub fn save_cube(cube: &HsiCube, path: &Path) -> Result<(), CubeError> {
    cube.assert_finite()?;
    let (hpath, bpath) = resolve(path);
    let header = Header {
        rows: cube.rows,
        cols: cube.cols,
        bands: cube.bands,
        dtype: "f32le".into(),
        order: "band-major".into(),
        range: [cube.value_range.0, cube.value_range.1],
    };
    let text = serde_json::to_string(&header).expect("header serializes");
    fs::write(&hpath, text).map_err(|e| io_err(&hpath, e))?;
    let mut payload = Vec::with_capacity(cube.len() * 4);
    for &v in &cube.data {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(&bpath, payload).map_err(|e| io_err(&bpath, e))
}

pub fn load_cube(path: &Path) -> Result<HsiCube, CubeError> {
    let (hpath, bpath) = resolve(path);
    let header = read_header(&hpath, "f32le")?;
    let bytes = fs::read(&bpath).map_err(|e| io_err(&bpath, e))?;
    let expect = header.rows * header.cols * header.bands * 4;
    if bytes.len() != expect {
        return Err(bad(
            &bpath,
            format!("payload {} bytes, header implies {expect}", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(bytes.len() / 4);
    for chunk in bytes.chunks_exact(4) {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
        if !v.is_finite() {
            return Err(bad(&bpath, format!("non-finite value at index {}", data.len())));
        }
        data.push(v);
    }
    let mut cube = HsiCube::from_data(header.rows, header.cols, header.bands, data)?;
    cube.value_range = (header.range[0], header.range[1]);
    Ok(cube)
}

pub fn save_mask(mask: &MaskCube, path: &Path) -> Result<(), CubeError> {
    let (hpath, bpath) = resolve(path);
    let header = Header {
        rows: mask.rows,
        cols: mask.cols,
        bands: mask.bands,
        dtype: "u8".into(),
        order: "band-major".into(),
        range: [0.0, 1.0],
    };
    let text = serde_json::to_string(&header).expect("header serializes");
    fs::write(&hpath, text).map_err(|e| io_err(&hpath, e))?;
    fs::write(&bpath, &mask.data).map_err(|e| io_err(&bpath, e))
}

pub fn load_mask(path: &Path) -> Result<MaskCube, CubeError> {
    let (hpath, bpath) = resolve(path);
    let header = read_header(&hpath, "u8")?;
    let bytes = fs::read(&bpath).map_err(|e| io_err(&bpath, e))?;
    let expect = header.rows * header.cols * header.bands;
    if bytes.len() != expect {
        return Err(bad(
            &bpath,
            format!("payload {} bytes, header implies {expect}", bytes.len()),
        ));
    }
    MaskCube::from_data(header.rows, header.cols, header.bands, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_cube_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cube = HsiCube::zeros(2, 2, 3);
        let path = dir.path().join("c");
        save_cube(&cube, &path).unwrap();
        assert_eq!(load_cube(&path).unwrap(), cube);
    }

    #[test]
    fn single_value_payload_is_le_f32() {
        let dir = tempfile::tempdir().unwrap();
        let cube = HsiCube::from_data(1, 1, 1, vec![0.5]).unwrap();
        let path = dir.path().join("one");
        save_cube(&cube, &path).unwrap();
        let payload = std::fs::read(dir.path().join("one.bin")).unwrap();
        assert_eq!(payload, 0.5f32.to_le_bytes().to_vec());
    }

    #[test]
    fn random_cube_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Generate values already representable in f32 so the round trip is
        // exact at the bit level.
        let data: Vec<f64> = (0..4 * 4 * 5)
            .map(|_| rng.gen_range(-1.0f32..1.0f32) as f64)
            .collect();
        let mut cube = HsiCube::from_data(4, 4, 5, data).unwrap();
        cube.value_range = (-1.0, 1.0);
        let path = dir.path().join("r");
        save_cube(&cube, &path).unwrap();
        let back = load_cube(&path).unwrap();
        assert_eq!(back, cube);
    }

    #[test]
    fn size_mismatch_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cube = HsiCube::zeros(3, 3, 2);
        let path = dir.path().join("m");
        save_cube(&cube, &path).unwrap();
        // Truncate the payload.
        let bin = dir.path().join("m.bin");
        let bytes = std::fs::read(&bin).unwrap();
        std::fs::write(&bin, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(load_cube(&path), Err(CubeError::BadFile { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_cube(&dir.path().join("nope")),
            Err(CubeError::Io { .. })
        ));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let cube = HsiCube::zeros(1, 1, 1);
        let path = Path::new("/nonexistent-dir-for-sure/x");
        assert!(matches!(save_cube(&cube, path), Err(CubeError::Io { .. })));
    }

    #[test]
    fn mask_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mask =
            MaskCube::from_spatial_pattern(2, 3, 2, &[1, 0, 1, 0, 1, 0]).unwrap();
        let path = dir.path().join("mask");
        save_mask(&mask, &path).unwrap();
        assert_eq!(load_mask(&path).unwrap(), mask);
    }
}
