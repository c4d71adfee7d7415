//! Fourier-slice inversion from data with `v = (v₁, v')` (n = 2).
//!
//! Transforming `P_h f(u₁, u', v₁, v')` in `(u₁, v₁)` and reading it on the
//! line `τ = aσ` gives
//!
//! ```text
//! |σ| P̂_h f(σ, u', aσ, v') = 2π F₁f(σ, u' + a v') h(a)
//! ```
//!
//! where `F₁` transforms the first coordinate only. The `v₁` integral is cut
//! to `[-V, V]` and tapered, which smears the δ in `τ/σ - a` over a width of
//! about `π/(V|σ|)`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::fields::{Grid, ScalarField};
use crate::forward::{analytic_wrt, line_integral, FieldSource, QuadratureParams, VSet, WRTData};
use crate::windows::WindowSpec;

/// Taper applied over `v₁ ∈ [-V, V]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Apodization {
    None,
    Hann,
    Kaiser { beta: f64 },
}

impl Apodization {
    pub fn weight(&self, v: f64, extent: f64) -> f64 {
        let x = v / extent;
        if x.abs() > 1.0 {
            return 0.0;
        }
        match *self {
            Apodization::None => 1.0,
            Apodization::Hann => (0.5 * PI * x).cos().powi(2),
            Apodization::Kaiser { beta } => bessel_i0(beta * (1.0 - x * x).sqrt()) / bessel_i0(beta),
        }
    }
}

impl FromStr for Apodization {
    type Err = WrtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Apodization::None),
            "hann" => Ok(Apodization::Hann),
            _ => {
                let beta = s
                    .strip_prefix("kaiser:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .filter(|b| b.is_finite() && *b >= 0.0)
                    .ok_or_else(|| WrtError::InvalidParameter(format!("unknown apodization '{s}'")))?;
                Ok(Apodization::Kaiser { beta })
            }
        }
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `P_h f(u₁, u'_p, v₁, v')` for fixed `v'`, stored `[(p·V + j)·U + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceDataset {
    /// u₁ samples `u1_origin + i·u1_step`.
    pub u1_origin: f64,
    pub u1_step: f64,
    pub u1_count: usize,
    pub u_perp: Vec<f64>,
    pub v1: Vec<f64>,
    pub v_perp: f64,
    pub values: Vec<f64>,
    pub apodization: Apodization,
}

/// Symmetric uniform v₁ samples on `[-V, V]` at midpoints, so that `v₁ = 0` is
/// never sampled.
pub fn v1_samples(extent: f64, step: f64) -> Vec<f64> {
    let half = (extent / step).round().max(1.0) as usize;
    let h = extent / half as f64;
    (0..2 * half).map(|j| -extent + (j as f64 + 0.5) * h).collect()
}

impl SliceDataset {
    pub fn u1(&self, i: usize) -> f64 {
        self.u1_origin + i as f64 * self.u1_step
    }

    pub fn v1_extent(&self) -> f64 {
        let h = self.v1_step();
        self.v1.last().map_or(0.0, |v| v + 0.5 * h)
    }

    fn v1_step(&self) -> f64 {
        if self.v1.len() >= 2 {
            self.v1[1] - self.v1[0]
        } else {
            0.0
        }
    }

    pub fn get(&self, p: usize, j: usize, i: usize) -> f64 {
        self.values[(p * self.v1.len() + j) * self.u1_count + i]
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.v1.len();
        if nv < 2 || self.u1_count < 2 || self.u_perp.is_empty() || !(self.u1_step > 0.0) {
            return Err(WrtError::InvalidParameter("slice dataset needs ≥ 2 samples in u₁ and v₁".into()));
        }
        let h = self.v1_step();
        let scale = self.v1_extent();
        if !(h > 0.0) || scale <= 0.0 {
            return Err(WrtError::InvalidParameter("v₁ samples must increase and span V > 0".into()));
        }
        for j in 0..nv {
            if (self.v1[j] + self.v1[nv - 1 - j]).abs() > 1e-9 * scale {
                return Err(WrtError::InvalidParameter("v₁ grid not symmetric about 0".into()));
            }
            if j > 0 && ((self.v1[j] - self.v1[j - 1]) - h).abs() > 1e-9 * scale {
                return Err(WrtError::InvalidParameter("v₁ grid not uniform".into()));
            }
        }
        if self.values.len() != self.u_perp.len() * nv * self.u1_count {
            return Err(WrtError::InvalidParameter("slice dataset size mismatch".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(WrtError::NonFinite("slice dataset".into()));
        }
        Ok(())
    }

    /// Sample `P_h f` directly (closed form where available).
    pub fn generate(
        source: &FieldSource,
        window: &WindowSpec,
        u1: (f64, f64, usize),
        u_perp: &[f64],
        v1: &[f64],
        v_perp: f64,
        apodization: Apodization,
    ) -> Result<Self> {
        source.validate(2)?;
        window.validate()?;
        if !window.is_real() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        let (u1_origin, u1_step, u1_count) = u1;
        let nv = v1.len();
        let values: Vec<f64> = (0..u_perp.len() * nv)
            .into_par_iter()
            .flat_map_iter(|pj| {
                let (p, j) = (pj / nv, pj % nv);
                let v = [v1[j], v_perp];
                let up = u_perp[p];
                (0..u1_count).map(move |i| {
                    let u = [u1_origin + i as f64 * u1_step, up];
                    match source {
                        FieldSource::Phantom(ph) => match analytic_wrt(ph, window, &u, &v) {
                            Some(x) => x,
                            None => line_integral(source, window, &u, &v, QuadratureParams::default()).re,
                        },
                        FieldSource::Sampled(_) => line_integral(source, window, &u, &v, QuadratureParams::default()).re,
                    }
                })
            })
            .collect();
        let ds = Self { u1_origin, u1_step, u1_count, u_perp: u_perp.to_vec(), v1: v1.to_vec(), v_perp, values, apodization };
        ds.validate()?;
        Ok(ds)
    }

    /// View of WRT data on a 2-D `(u₁, u₂)` grid with a v₁-line v-set.
    pub fn from_wrt(data: &WRTData, apodization: Apodization) -> Result<Self> {
        let VSet::V1Line { v1, v_perp } = &data.vset else {
            return Err(WrtError::Unsupported(format!("slice inversion needs v1-line data, got {}", data.vset.mode())));
        };
        let g = &data.u_grid;
        if g.n() != 2 || v_perp.len() != 1 {
            return Err(WrtError::Unsupported("slice inversion is implemented for n = 2".into()));
        }
        if data.is_complex() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        let (n1, n2) = (g.shape[0], g.shape[1]);
        let nv = v1.len();
        let mut values = vec![0.0; n2 * nv * n1];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for j in 0..nv {
                    values[(i2 * nv + j) * n1 + i1] = data.get(i1 * n2 + i2, j).re;
                }
            }
        }
        let ds = Self {
            u1_origin: g.origin[0],
            u1_step: g.spacing[0],
            u1_count: n1,
            u_perp: g.axis_coords(1),
            v1: v1.clone(),
            v_perp: v_perp[0],
            values,
            apodization,
        };
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceMode {
    /// Vary u' with `v' = 0`.
    Full,
    /// u on the x₁-axis, one dataset per `v'`; needs `a ≠ 0`.
    Restricted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceParams {
    pub a: f64,
    pub sigmas: Vec<f64>,
    pub mode: SliceMode,
}

/// Estimated `F₁f(σ_k, ζ_p)`, stored `[p·K + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpectrum {
    pub sigmas: Vec<f64>,
    pub zetas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// True when some σ = 0 entries were filled by even extrapolation.
    pub dc_extrapolated: bool,
}

impl SliceSpectrum {
    pub fn get(&self, p: usize, k: usize) -> Complex64 {
        self.values[p * self.sigmas.len() + k]
    }
}

/// Minimum accepted `|h(a)|`.
pub const MIN_WINDOW_VALUE: f64 = 1e-12;

fn check_params(ds: &SliceDataset, window: &WindowSpec, p: &SliceParams) -> Result<f64> {
    window.require_invertible()?;
    ds.validate()?;
    let ha = window.eval_real(p.a);
    if !(ha.abs() > MIN_WINDOW_VALUE) {
        return Err(WrtError::WindowVanishesAt { a: p.a, value: ha.abs() });
    }
    if p.mode == SliceMode::Restricted && p.a == 0.0 {
        return Err(WrtError::InvalidParameter("restricted mode needs a ≠ 0 (ζ = a·v' collapses to 0)".into()));
    }
    if p.mode == SliceMode::Full && ds.v_perp != 0.0 {
        return Err(WrtError::InvalidParameter("full mode expects v' = 0".into()));
    }
    let nyq_u = PI / ds.u1_step;
    let nyq_v = PI / ds.v1_step();
    for &s in &p.sigmas {
        if s.abs() > nyq_u * (1.0 + 1e-12) {
            return Err(WrtError::BeyondNyquist { requested: s.abs(), nyquist: nyq_u });
        }
        if (p.a * s).abs() > nyq_v * (1.0 + 1e-12) {
            return Err(WrtError::BeyondNyquist { requested: (p.a * s).abs(), nyquist: nyq_v });
        }
    }
    Ok(ha)
}

/// `P̂_h f(σ, u'_p, aσ, v')` for every row p, by direct summation over the
/// samples with the v₁ taper applied.
fn transform_on_line(ds: &SliceDataset, a: f64, sigma: f64) -> Vec<Complex64> {
    let nv = ds.v1.len();
    let extent = ds.v1_extent();
    let dv = ds.v1_step();
    let taper: Vec<f64> = ds.v1.iter().map(|&v| ds.apodization.weight(v, extent)).collect();
    (0..ds.u_perp.len())
        .into_par_iter()
        .map(|p| {
            let step = Complex64::from_polar(1.0, -sigma * ds.u1_step);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nv {
                if taper[j] == 0.0 {
                    continue;
                }
                let row = &ds.values[(p * nv + j) * ds.u1_count..(p * nv + j + 1) * ds.u1_count];
                let mut ph = Complex64::from_polar(1.0, -sigma * ds.u1_origin);
                let mut s = Complex64::new(0.0, 0.0);
                for &x in row {
                    s += ph * x;
                    ph *= step;
                }
                acc += s * Complex64::from_polar(taper[j], -a * sigma * ds.v1[j]);
            }
            acc * (ds.u1_step * dv)
        })
        .collect()
}

/// Estimate `F₁f(σ, u' + a v')` on every row of `ds` for each requested σ.
/// σ = 0 is filled by even extrapolation `(4F(Δσ) - F(2Δσ))/3` from the
/// smallest nonzero |σ| in the grid.
pub fn slice_extract(ds: &SliceDataset, window: &WindowSpec, p: &SliceParams) -> Result<SliceSpectrum> {
    let ha = check_params(ds, window, p)?;
    let estimate = |s: f64| -> Vec<Complex64> {
        transform_on_line(ds, p.a, s).into_iter().map(|q| q * (s.abs() / (2.0 * PI * ha))).collect()
    };
    let k_total = p.sigmas.len();
    let rows = ds.u_perp.len();
    let mut values = vec![Complex64::new(0.0, 0.0); rows * k_total];
    let mut dc_extrapolated = false;
    let ds_min = p.sigmas.iter().map(|s| s.abs()).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let mut dc: Option<Vec<Complex64>> = None;
    for (k, &s) in p.sigmas.iter().enumerate() {
        let col = if s == 0.0 {
            if !ds_min.is_finite() {
                return Err(WrtError::InvalidParameter("σ grid has no nonzero sample to extrapolate from".into()));
            }
            dc_extrapolated = true;
            dc.get_or_insert_with(|| {
                let f1 = estimate(ds_min);
                let f2 = estimate(2.0 * ds_min);
                // Real parts are even in σ, imaginary parts odd.
                f1.iter().zip(&f2).map(|(a, b)| Complex64::new((4.0 * a.re - b.re) / 3.0, 0.0)).collect()
            })
            .clone()
        } else {
            estimate(s)
        };
        for (row, v) in col.into_iter().enumerate() {
            values[row * k_total + k] = v;
        }
    }
    let zetas = ds.u_perp.iter().map(|u| u + p.a * ds.v_perp).collect();
    Ok(SliceSpectrum { sigmas: p.sigmas.clone(), zetas, values, dc_extrapolated })
}

/// Frequencies `2πk/(NΔ)`, `k = -⌊N/2⌋ … ⌈N/2⌉-1`, for an output axis.
pub fn sigma_grid_for(count: usize, spacing: f64) -> Vec<f64> {
    let ds = 2.0 * PI / (count as f64 * spacing);
    let lo = -((count / 2) as i64);
    (0..count).map(|k| (lo + k as i64) as f64 * ds).collect()
}

/// Reconstruct f on `grid` from a full-mode dataset whose u' rows coincide
/// with the grid's second axis. Frequencies above the u₁ Nyquist limit of the
/// data are taken as zero.
pub fn reconstruct_slice(ds: &SliceDataset, window: &WindowSpec, a: f64, grid: &Grid) -> Result<(ScalarField, SliceSpectrum)> {
    if grid.n() != 2 {
        return Err(WrtError::Unsupported("slice reconstruction is implemented for n = 2".into()));
    }
    let ys = grid.axis_coords(1);
    let tol = 1e-9 * grid.spacing[1];
    let rows: Vec<usize> = ys
        .iter()
        .map(|y| {
            ds.u_perp
                .iter()
                .position(|u| (u - y).abs() <= tol)
                .ok_or_else(|| WrtError::Coverage(format!("no data row at u' = {y}")))
        })
        .collect::<Result<_>>()?;
    let all = sigma_grid_for(grid.shape[0], grid.spacing[0]);
    let nyq = PI / ds.u1_step;
    let usable: Vec<f64> = all.iter().copied().filter(|s| s.abs() <= nyq).collect();
    let spec = slice_extract(ds, window, &SliceParams { a, sigmas: usable.clone(), mode: SliceMode::Full })?;
    let dsig = all[1] - all[0];
    let xs = grid.axis_coords(0);
    let n1 = grid.shape[0];
    let mut values = vec![0.0; grid.len()];
    for (i2, &row) in rows.iter().enumerate() {
        for (i1, &x) in xs.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &s) in usable.iter().enumerate() {
                acc += spec.get(row, k) * Complex64::from_polar(1.0, s * x);
            }
            values[i1 * grid.shape[1] + i2] = acc.re * dsig / (2.0 * PI);
        }
    }
    debug_assert_eq!(values.len(), n1 * grid.shape[1]);
    Ok((ScalarField::new(grid.clone(), values)?, spec))
}

/// Relative L2 misfit of an estimated spectrum against `reference(σ, ζ)` over
/// samples with `lo ≤ |σ| ≤ hi`.
pub fn identity_residual<F: Fn(f64, f64) -> Complex64>(spec: &SliceSpectrum, lo: f64, hi: f64, reference: F) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (p, &z) in spec.zetas.iter().enumerate() {
        for (k, &s) in spec.sigmas.iter().enumerate() {
            if s.abs() < lo || s.abs() > hi {
                continue;
            }
            let r = reference(s, z);
            num += (spec.get(p, k) - r).norm_sqr();
            den += r.norm_sqr();
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// u₁ sampling `(origin, step, count)` that contains the data support for
/// objects within `object_radius` of the origin and `|v₁| ≤ V`.
pub fn u1_sampling(object_radius: f64, window: &WindowSpec, extent_v: f64, step: f64) -> Result<(f64, f64, usize)> {
    let t = window
        .support_radius()
        .ok_or_else(|| WrtError::InvalidWindow("window without numerical support".into()))?;
    let half = object_radius + t * extent_v;
    let count = (2.0 * half / step).ceil() as usize + 1;
    Ok((-((count - 1) as f64) * step / 2.0, step, count))
}
