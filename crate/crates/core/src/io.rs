//! On-disk formats. Every dataset is a directory holding `meta.json` and a raw
//! little-endian, row-major `data.bin`; complex samples are interleaved
//! `(re, im)` pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Result, WrtError};
use crate::fields::{Grid, ScalarField, SpectralField, CONVENTION};
use crate::forward::{PolarWRT, VSet, WRTData};
use crate::windows::WindowSpec;

pub const META_FILE: &str = "meta.json";
pub const DATA_FILE: &str = "data.bin";

/// Write `meta` and the raw samples into directory `dir` (created if needed).
pub fn write_dataset(dir: &Path, meta: &Value, data: &[f64]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(META_FILE), serde_json::to_string_pretty(meta)?)?;
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(dir.join(DATA_FILE), bytes)?;
    Ok(())
}

/// Read `meta.json` and `data.bin` from `dir`.
pub fn read_dataset(dir: &Path) -> Result<(Value, Vec<f64>)> {
    let meta_text = fs::read_to_string(dir.join(META_FILE))?;
    let meta: Value = serde_json::from_str(&meta_text)?;
    let bytes = fs::read(dir.join(DATA_FILE))?;
    if bytes.len() % 8 != 0 {
        return Err(WrtError::Format(format!("{DATA_FILE} length {} is not a multiple of 8", bytes.len())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((meta, data))
}

/// Format tag stored in `meta.json`.
pub fn format_of(dir: &Path) -> Result<String> {
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join(META_FILE))?)?;
    meta.get("format")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| WrtError::Format("meta.json has no \"format\" field".into()))
}

fn interleave(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|v| [v.re, v.im]).collect()
}

fn deinterleave(data: &[f64]) -> Vec<Complex64> {
    data.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn expect_field<'a>(meta: &'a Value, key: &str) -> Result<&'a Value> {
    meta.get(key).ok_or_else(|| WrtError::Format(format!("meta.json is missing \"{key}\"")))
}

fn expect_format(meta: &Value, format: &str) -> Result<()> {
    let got = expect_field(meta, "format")?.as_str().unwrap_or("");
    if got != format {
        return Err(WrtError::Format(format!("expected format {format}, found {got:?}")));
    }
    Ok(())
}

fn expect_len(data: &[f64], len: usize) -> Result<()> {
    if data.len() != len {
        return Err(WrtError::Format(format!("{DATA_FILE} holds {} numbers, expected {len}", data.len())));
    }
    Ok(())
}

/// GF1 grid description as stored in `meta.json`.
#[derive(Serialize, Deserialize)]
struct GridMeta {
    n: usize,
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
}

fn grid_from_meta(meta: &Value) -> Result<Grid> {
    let g: GridMeta = serde_json::from_value(meta.clone())?;
    if g.n != g.shape.len() {
        return Err(WrtError::Format(format!("n = {} but shape has {} entries", g.n, g.shape.len())));
    }
    Grid::new(g.shape, g.origin, g.spacing)
}

fn gf1_meta(grid: &Grid, kind: &str, dtype: &str) -> Value {
    json!({
        "format": "gf1",
        "kind": kind,
        "n": grid.n(),
        "shape": grid.shape,
        "origin": grid.origin,
        "spacing": grid.spacing,
        "dtype": dtype,
        "order": "C",
    })
}

pub fn write_scalar_field(dir: &Path, field: &ScalarField) -> Result<()> {
    write_dataset(dir, &gf1_meta(&field.grid, "scalar", "f64"), &field.values)
}

pub fn read_scalar_field(dir: &Path) -> Result<ScalarField> {
    let (meta, data) = read_dataset(dir)?;
    expect_format(&meta, "gf1")?;
    if expect_field(&meta, "kind")?.as_str() != Some("scalar") {
        return Err(WrtError::Format("GF1 dataset is not a scalar field".into()));
    }
    let grid = grid_from_meta(&meta)?;
    expect_len(&data, grid.len())?;
    ScalarField::new(grid, data)
}

pub fn write_spectral_field(dir: &Path, field: &SpectralField) -> Result<()> {
    let mut meta = gf1_meta(&field.grid, "spectral", "c128");
    meta["convention"] = json!(CONVENTION);
    write_dataset(dir, &meta, &interleave(&field.values))
}

pub fn read_spectral_field(dir: &Path) -> Result<SpectralField> {
    let (meta, data) = read_dataset(dir)?;
    expect_format(&meta, "gf1")?;
    if expect_field(&meta, "kind")?.as_str() != Some("spectral") {
        return Err(WrtError::Format("GF1 dataset is not a spectral field".into()));
    }
    let grid = grid_from_meta(&meta)?;
    expect_len(&data, 2 * grid.len())?;
    SpectralField::new(grid, deinterleave(&data))
}

fn grid_json(grid: &Grid) -> Value {
    json!({"n": grid.n(), "shape": grid.shape, "origin": grid.origin, "spacing": grid.spacing})
}

pub fn write_wrt(dir: &Path, data: &WRTData) -> Result<()> {
    let meta = json!({
        "format": "wrt1",
        "u_grid": grid_json(&data.u_grid),
        "vset": data.vset,
        "window": data.window,
        "dtype": data.dtype(),
        "order": "C",
    });
    let raw = if data.is_complex() {
        interleave(&data.values)
    } else {
        data.values.iter().map(|v| v.re).collect()
    };
    write_dataset(dir, &meta, &raw)
}

pub fn read_wrt(dir: &Path) -> Result<WRTData> {
    let (meta, data) = read_dataset(dir)?;
    expect_format(&meta, "wrt1")?;
    let u_grid = grid_from_meta(expect_field(&meta, "u_grid")?)?;
    let vset: VSet = serde_json::from_value(expect_field(&meta, "vset")?.clone())?;
    let window: WindowSpec = serde_json::from_value(expect_field(&meta, "window")?.clone())?;
    let count = u_grid.len() * vset.len();
    let values = match expect_field(&meta, "dtype")?.as_str() {
        Some("f64") => {
            expect_len(&data, count)?;
            data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
        }
        Some("c128") => {
            expect_len(&data, 2 * count)?;
            deinterleave(&data)
        }
        other => return Err(WrtError::Format(format!("unknown dtype {other:?}"))),
    };
    Ok(WRTData { u_grid, vset, window, values })
}

pub fn write_polar_wrt(dir: &Path, data: &PolarWRT) -> Result<()> {
    let complex = !data.window.is_real();
    let meta = json!({
        "format": "pwrt1",
        "rho": data.rho,
        "theta": data.theta,
        "window": data.window,
        "dtype": if complex { "c128" } else { "f64" },
        "order": "C",
    });
    let raw = if complex { interleave(&data.values) } else { data.values.iter().map(|v| v.re).collect() };
    write_dataset(dir, &meta, &raw)
}

pub fn read_polar_wrt(dir: &Path) -> Result<PolarWRT> {
    let (meta, data) = read_dataset(dir)?;
    expect_format(&meta, "pwrt1")?;
    let rho: Vec<f64> = serde_json::from_value(expect_field(&meta, "rho")?.clone())?;
    let theta: Vec<f64> = serde_json::from_value(expect_field(&meta, "theta")?.clone())?;
    let window: WindowSpec = serde_json::from_value(expect_field(&meta, "window")?.clone())?;
    let count = rho.len() * theta.len();
    let values = match expect_field(&meta, "dtype")?.as_str() {
        Some("f64") => {
            expect_len(&data, count)?;
            data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
        }
        Some("c128") => {
            expect_len(&data, 2 * count)?;
            deinterleave(&data)
        }
        other => return Err(WrtError::Format(format!("unknown dtype {other:?}"))),
    };
    Ok(PolarWRT { rho, theta, window, values })
}

/// Write complex samples with arbitrary metadata (used for debugging dumps).
pub fn write_complex_dataset(dir: &Path, meta: &Value, values: &[Complex64]) -> Result<()> {
    write_dataset(dir, meta, &interleave(values))
}

pub fn read_complex_dataset(dir: &Path) -> Result<(Value, Vec<Complex64>)> {
    let (meta, data) = read_dataset(dir)?;
    if data.len() % 2 != 0 {
        return Err(WrtError::Format("complex data has odd length".into()));
    }
    Ok((meta, deinterleave(&data)))
}

/// Binary 8-bit PGM of a 2-D field with linear min–max scaling. Writes
/// `<path>.json` next to it recording the scaling.
pub fn write_pgm(path: &Path, field: &ScalarField) -> Result<()> {
    if field.grid.n() != 2 {
        return Err(WrtError::Unsupported("PGM export needs a 2-D field".into()));
    }
    let (rows, cols) = (field.grid.shape[0], field.grid.shape[1]);
    let lo = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    bytes.extend(field.values.iter().map(|v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, bytes)?;
    let sidecar = json!({"scaling": "linear", "min": lo, "max": hi, "rows": rows, "cols": cols});
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    fs::write(side, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{continuous_ft, make_grid, sample_phantom, PhantomSpec};
    use crate::forward::{windowed_ray_transform, FieldSource};

    #[test]
    fn scalar_and_spectral_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(2, &[8, 6], &[4.0, 3.0], &[0.5, 0.0]).unwrap();
        let f = sample_phantom(&PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 1.0), &g).unwrap();
        write_scalar_field(&dir.path().join("f"), &f).unwrap();
        assert_eq!(read_scalar_field(&dir.path().join("f")).unwrap(), f);
        let bytes = fs::read(dir.path().join("f").join(DATA_FILE)).unwrap();
        assert_eq!(&bytes[..8], &f.values[0].to_le_bytes());

        let s = continuous_ft(&f, 1);
        write_spectral_field(&dir.path().join("s"), &s).unwrap();
        assert_eq!(read_spectral_field(&dir.path().join("s")).unwrap(), s);
        assert!(read_scalar_field(&dir.path().join("s")).is_err());
    }

    #[test]
    fn wrt_roundtrip_real_and_complex() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(2, &[4, 4], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = FieldSource::Phantom(PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 1.0));
        for w in [WindowSpec::gaussian(1.0), WindowSpec::AnalyticSignal] {
            let d = windowed_ray_transform(&src, &w, &g, &VSet::polar_2d(2, 0.0, vec![1.0, 2.0]), Default::default())
                .unwrap();
            let p = dir.path().join(w.name());
            write_wrt(&p, &d).unwrap();
            assert_eq!(read_wrt(&p).unwrap(), d);
            let meta: Value = serde_json::from_str(&fs::read_to_string(p.join(META_FILE)).unwrap()).unwrap();
            assert_eq!(meta["dtype"], if w.is_real() { "f64" } else { "c128" });
        }
    }

    #[test]
    fn truncated_data_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(1, &[4], &[4.0], &[0.0]).unwrap();
        write_scalar_field(dir.path(), &ScalarField::zeros(g)).unwrap();
        fs::write(dir.path().join(DATA_FILE), [0u8; 16]).unwrap();
        assert!(matches!(read_scalar_field(dir.path()), Err(WrtError::Format(_))));
    }

    #[test]
    fn pgm_export() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(2, &[3, 5], &[3.0, 5.0], &[0.0, 0.0]).unwrap();
        let f = ScalarField::new(g, (0..15).map(|i| i as f64).collect()).unwrap();
        let p = dir.path().join("img.pgm");
        write_pgm(&p, &f).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(*bytes.last().unwrap(), 255);
        assert!(dir.path().join("img.pgm.json").exists());
    }
}
