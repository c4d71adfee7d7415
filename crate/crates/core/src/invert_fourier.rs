//! Polar frequency-domain inversion.
//!
//! Along `v = rθ` parallel to `ξ = σθ` the transformed data factor as
//! `P̂_h f(σθ, rθ) = f̂(σθ) ĥ(-rσ)`, so
//!
//! ```text
//! ∫₀^∞ P̂_h f(σθ, rθ) ĥ(rσ) dr = f̂(σθ) σ⁻¹ ∫₀^∞ |ĥ(η)|² dη
//! f(x) = (2π)^{-n} (∫₀^∞|ĥ|²)^{-1} ∫_{S^{n-1}} ∫₀^∞ [inner] e^{iσθ·x} σⁿ dσ dθ
//! ```

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, WrtError};
use crate::fields::{continuous_ft_complex, Grid, ScalarField};
use crate::forward::{VSet, WRTData};
use crate::invert_bp::{sphere_area, ConstantMode, RaySource};
use crate::windows::WindowSpec;

/// `P̂_h f(σ_k θ_j, r_m θ_j)`, stored `[(j·K + k)·M + m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarSpectralSamples {
    pub directions: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl PolarSpectralSamples {
    pub fn n(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn index(&self, j: usize, k: usize, m: usize) -> usize {
        (j * self.sigmas.len() + k) * self.radii.len() + m
    }

    pub fn get(&self, j: usize, k: usize, m: usize) -> Complex64 {
        self.values[self.index(j, k, m)]
    }

    /// Keep only the listed directions and σ indices.
    pub fn subset(&self, dirs: &[usize], sigmas: &[usize]) -> Self {
        let mut values = Vec::with_capacity(dirs.len() * sigmas.len() * self.radii.len());
        for &j in dirs {
            for &k in sigmas {
                for m in 0..self.radii.len() {
                    values.push(self.get(j, k, m));
                }
            }
        }
        Self {
            directions: dirs.iter().map(|&j| self.directions[j].clone()).collect(),
            sigmas: sigmas.iter().map(|&k| self.sigmas[k]).collect(),
            radii: self.radii.clone(),
            values,
        }
    }
}

/// How `P̂` is read off the u-transform along the radial line `ξ = σθ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineMethod {
    /// Direct DFT of the u-samples evaluated exactly at `σθ`.
    Exact,
    /// Zero-padded (×2) FFT followed by multilinear interpolation.
    Bilinear,
}

/// `(2π)^{-n} / ∫₀^∞|ĥ|²`.
pub fn derived_constant(n: usize, window: &WindowSpec) -> Result<f64> {
    Ok((2.0 * PI).powi(-(n as i32)) / window.constants()?.c_hat_half)
}

/// Published normalisation `2^{-n-1} π^{-n} (∫|h|²)^{-1}`.
pub fn published_constant(n: usize, window: &WindowSpec) -> Result<f64> {
    Ok(2f64.powi(-(n as i32) - 1) * PI.powi(-(n as i32)) / window.constants()?.c_h2)
}

pub fn constant_for(mode: ConstantMode, n: usize, window: &WindowSpec) -> Result<f64> {
    match mode {
        ConstantMode::Published => published_constant(n, window),
        ConstantMode::Derived => derived_constant(n, window),
        ConstantMode::Calibrated(a) => Ok(a),
    }
}

/// Sum `Σ_u values(u) Π_k phase_k[u_k]` over a row-major array by contracting
/// one axis at a time from the last.
fn separable_contract(values: &[Complex64], shape: &[usize], phases: &[Vec<Complex64>]) -> Complex64 {
    let mut cur: Vec<Complex64> = values.to_vec();
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        let outer = cur.len() / len;
        let ph = &phases[axis];
        cur = (0..outer)
            .map(|o| cur[o * len..(o + 1) * len].iter().zip(ph).map(|(a, b)| a * b).sum())
            .collect();
    }
    cur[0]
}

/// Transform each polar column of `data` over u and sample it on the radial
/// lines `ξ = σθ`.
pub fn extract_polar_spectrum(data: &WRTData, sigmas: &[f64], method: LineMethod) -> Result<PolarSpectralSamples> {
    let VSet::Polar { directions, radii } = &data.vset else {
        return Err(WrtError::Unsupported(format!("fourier inversion needs polar data, got {}", data.vset.mode())));
    };
    if sigmas.is_empty() {
        return Err(WrtError::InvalidParameter("empty σ grid".into()));
    }
    let g = &data.u_grid;
    let n = g.n();
    let sigma_max = sigmas.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    for d in directions {
        for k in 0..n {
            let nyq = PI / g.spacing[k];
            if sigma_max * d[k].abs() > nyq * (1.0 + 1e-12) {
                return Err(WrtError::BeyondNyquist { requested: sigma_max, nyquist: nyq / d[k].abs() });
            }
        }
    }
    let nr = radii.len();
    let ns = sigmas.len();
    let cells = g.cell_volume();
    let columns: Vec<Vec<Complex64>> = (0..directions.len() * nr)
        .into_par_iter()
        .map(|col| {
            let theta = &directions[col / nr];
            let values = data.column(col);
            match method {
                LineMethod::Exact => sigmas
                    .iter()
                    .map(|&s| {
                        let phases: Vec<Vec<Complex64>> = (0..n)
                            .map(|k| {
                                (0..g.shape[k])
                                    .map(|i| Complex64::from_polar(1.0, -s * theta[k] * g.coord(k, i)))
                                    .collect()
                            })
                            .collect();
                        separable_contract(&values, &g.shape, &phases) * cells
                    })
                    .collect(),
                LineMethod::Bilinear => {
                    let spec = continuous_ft_complex(g, &values, 2);
                    sigmas
                        .iter()
                        .map(|&s| {
                            let xi: Vec<f64> = theta.iter().map(|t| t * s).collect();
                            multilinear(&spec.grid, &spec.values, &xi)
                        })
                        .collect()
                }
            }
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); directions.len() * ns * nr];
    for (col, vals) in columns.into_iter().enumerate() {
        let (j, m) = (col / nr, col % nr);
        for (k, v) in vals.into_iter().enumerate() {
            values[(j * ns + k) * nr + m] = v;
        }
    }
    Ok(PolarSpectralSamples { directions: directions.clone(), sigmas: sigmas.to_vec(), radii: radii.clone(), values })
}

fn multilinear(grid: &Grid, values: &[Complex64], x: &[f64]) -> Complex64 {
    let n = grid.n();
    let strides = grid.strides();
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0; n];
    for k in 0..n {
        let fi = grid.fractional_index(k, x[k]);
        let i0 = fi.floor().clamp(0.0, (grid.shape[k] - 2) as f64);
        base[k] = i0 as usize;
        frac[k] = (fi - i0).clamp(0.0, 1.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut flat = 0;
        for k in 0..n {
            let bit = corner >> k & 1;
            w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            flat += (base[k] + bit) * strides[k];
        }
        acc += values[flat] * w;
    }
    acc
}

/// Sample `P_h f(·, rθ)` on a frame aligned with θ (n = 2) and transform it on
/// the radial line, one column at a time, without storing the full dataset.
///
/// `object_radius` bounds the support of f around the origin and `du` is the
/// sampling step that resolves f. Along θ the column is a convolution with
/// `h(·/r)`, so the step there grows with r.
pub fn extract_polar_spectrum_on_demand<S: RaySource + ?Sized>(
    source: &S,
    window: &WindowSpec,
    angles: &[f64],
    radii: &[f64],
    sigmas: &[f64],
    object_radius: f64,
    du: f64,
) -> Result<PolarSpectralSamples> {
    if source.dim() != 2 {
        return Err(WrtError::Unsupported("on-demand polar extraction is implemented for n = 2".into()));
    }
    window.require_invertible()?;
    if sigmas.is_empty() || radii.is_empty() || angles.is_empty() {
        return Err(WrtError::InvalidParameter("empty sample set".into()));
    }
    let t_h = window
        .support_radius()
        .ok_or_else(|| WrtError::InvalidWindow("window without numerical support".into()))?;
    let eta_max = window.spectral_radius();
    if !(du > 0.0 && object_radius > 0.0) {
        return Err(WrtError::InvalidParameter("sampling step and object radius must be positive".into()));
    }
    let sigma_max = sigmas.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if sigma_max > PI / du {
        return Err(WrtError::BeyondNyquist { requested: sigma_max, nyquist: PI / du });
    }
    let dw = du;
    let nw = (2.0 * object_radius / dw).ceil() as usize + 1;
    let ws: Vec<f64> = (0..nw).map(|i| -object_radius + i as f64 * (2.0 * object_radius / (nw - 1) as f64)).collect();
    let dw = ws[1] - ws[0];
    let nr = radii.len();
    let ns = sigmas.len();
    let columns: Vec<Vec<Complex64>> = (0..angles.len() * nr)
        .into_par_iter()
        .map(|col| {
            let (j, m) = (col / nr, col % nr);
            let (st, ct) = angles[j].sin_cos();
            let r = radii[m];
            let band = sigma_max.min(eta_max / r);
            let s_ext = object_radius + t_h * r;
            let ds_target = du.max(0.8 * PI * r / eta_max);
            let nsamp = (2.0 * s_ext / ds_target).ceil() as usize + 1;
            let ds = 2.0 * s_ext / (nsamp - 1) as f64;
            let v = [r * ct, r * st];
            // Project onto the θ axis.
            let proj: Vec<f64> = (0..nsamp)
                .map(|i| {
                    let s = -s_ext + i as f64 * ds;
                    ws.iter()
                        .map(|&w| source.eval(&[s * ct - w * st, s * st + w * ct], &v, col))
                        .sum::<f64>()
                        * dw
                })
                .collect();
            sigmas
                .iter()
                .map(|&sig| {
                    if sig.abs() > band * (1.0 + 1e-12) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let step = Complex64::from_polar(1.0, -sig * ds);
                    let mut ph = Complex64::from_polar(1.0, sig * s_ext);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &p in &proj {
                        acc += ph * p;
                        ph *= step;
                    }
                    acc * ds
                })
                .collect()
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); angles.len() * ns * nr];
    for (col, vals) in columns.into_iter().enumerate() {
        let (j, m) = (col / nr, col % nr);
        for (k, v) in vals.into_iter().enumerate() {
            values[(j * ns + k) * nr + m] = v;
        }
    }
    Ok(PolarSpectralSamples {
        directions: angles.iter().map(|a| vec![a.cos(), a.sin()]).collect(),
        sigmas: sigmas.to_vec(),
        radii: radii.to_vec(),
        values,
    })
}

/// Minimum number of radii used in each inner integral.
pub const MIN_INNER_NODES: usize = 8;

/// `∫₀^∞ P̂_h f(σθ, rθ) ĥ(rσ) dr` for direction `j` and σ index `k`.
///
/// Trapezoid in `ln r` over the radii where `|ĥ(rσ)|` has not yet decayed below
/// 1e-14 of its peak (at least [`MIN_INNER_NODES`]), plus the piece `[0, r₁]` from an even
/// fit `A + B r²` through the first two nodes.
pub fn inner_integral(samples: &PolarSpectralSamples, window: &WindowSpec, j: usize, k: usize) -> Complex64 {
    let sigma = samples.sigmas[k];
    let radii = &samples.radii;
    let eta_max = window.spectral_radius();
    let mut active = radii.iter().take_while(|&&r| r * sigma.abs() <= eta_max).count();
    active = active.max(MIN_INNER_NODES).min(radii.len());
    let g: Vec<Complex64> = (0..active)
        .map(|m| samples.get(j, k, m) * window.ft(radii[m] * sigma))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..active.saturating_sub(1) {
        let h = (radii[m + 1] / radii[m]).ln();
        acc += (g[m] * radii[m] + g[m + 1] * radii[m + 1]) * (0.5 * h);
    }
    if active >= 2 {
        let (r1, r2) = (radii[0], radii[1]);
        let b = (g[1] - g[0]) / (r2 * r2 - r1 * r1);
        let a = g[0] - b * r1 * r1;
        acc += a * r1 + b * (r1 * r1 * r1 / 3.0);
        // Endpoint term of the log-trapezoid: d/du[r g] ≈ A r + 3B r³.
        let h = (r2 / r1).ln();
        acc += (a * r1 + b * (3.0 * r1 * r1 * r1)) * (h * h / 12.0);
    }
    if active == radii.len() && sigma > 0.0 {
        acc += radial_tail(window, sigma, radii[active - 1], samples.get(j, k, active - 1));
    }
    acc
}

/// `∫_{r_M}^∞ P̂ ĥ(rσ) dr` past the last stored radius. There the data are
/// `f̂(σθ) ĥ(-rσ)`, so `f̂` is read off the last sample and the remainder is
/// `f̂ σ⁻¹ ∫_{r_M σ}^∞ |ĥ(η)|² dη`. Skipped once `ĥ` has decayed.
fn radial_tail(window: &WindowSpec, sigma: f64, r_last: f64, last: Complex64) -> Complex64 {
    let eta0 = r_last * sigma;
    let eta_max = window.spectral_radius();
    let h_last = window.ft(-eta0);
    let mean_energy = window.constants().map(|c| c.c_hat_half / eta_max).unwrap_or(0.0);
    if eta0 >= eta_max || h_last.norm_sqr() < 1e-12 * mean_energy {
        return Complex64::new(0.0, 0.0);
    }
    let panels = (((eta_max - eta0) * 4.0).ceil() as usize).clamp(4, 256);
    let energy = crate::quadrature::integrate(|e| window.ft(e).norm_sqr(), eta0, eta_max, panels);
    last / h_last * (energy / sigma)
}

fn trapezoid_nonuniform(x: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; x.len()];
    for i in 0..x.len().saturating_sub(1) {
        let h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Synthesis `f(x) = C Σ_θ Σ_σ [inner] e^{iσθ·x} σⁿ Δσ Δθ` on `grid`.
pub fn reconstruct_t2(
    samples: &PolarSpectralSamples,
    window: &WindowSpec,
    grid: &Grid,
    constant_mode: ConstantMode,
) -> Result<ScalarField> {
    window.require_invertible()?;
    if samples.directions.is_empty() || samples.sigmas.is_empty() || samples.radii.is_empty() {
        return Err(WrtError::InvalidParameter("empty polar spectral sample set".into()));
    }
    let n = grid.n();
    if samples.n() != n {
        return Err(WrtError::DimensionMismatch { expected: n, got: samples.n() });
    }
    let constant = constant_for(constant_mode, n, window)?;
    let nd = samples.directions.len();
    let ns = samples.sigmas.len();
    let dtheta = sphere_area(n) / nd as f64;
    let sig_w = trapezoid_nonuniform(&samples.sigmas);

    let coeffs: Vec<Complex64> = (0..nd * ns)
        .into_par_iter()
        .map(|jk| {
            let (j, k) = (jk / ns, jk % ns);
            let s = samples.sigmas[k];
            inner_integral(samples, window, j, k) * (s.powi(n as i32) * sig_w[k] * dtheta)
        })
        .collect();

    // Per-axis phase tables e^{iσθ_k x_k} for every (θ, σ).
    let tables: Vec<Vec<Vec<Complex64>>> = (0..nd * ns)
        .map(|jk| {
            let (j, k) = (jk / ns, jk % ns);
            let s = samples.sigmas[k];
            (0..n)
                .map(|ax| {
                    let w = s * samples.directions[j][ax];
                    (0..grid.shape[ax]).map(|i| Complex64::from_polar(1.0, w * grid.coord(ax, i))).collect()
                })
                .collect()
        })
        .collect();
    let active: Vec<usize> = (0..nd * ns).filter(|&jk| coeffs[jk].norm() > 0.0).collect();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let mut acc = Complex64::new(0.0, 0.0);
            for &jk in &active {
                let mut p = coeffs[jk];
                for ax in 0..n {
                    p *= tables[jk][ax][idx[ax]];
                }
                acc += p;
            }
            constant * acc.re
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(WrtError::NonFinite("polar synthesis".into()));
    }
    ScalarField::new(grid.clone(), values)
}

/// Sampling of the polar spectrum for [`reconstruct_t2_from_source`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct T2Params {
    pub n_directions: usize,
    pub n_sigmas: usize,
    pub sigma_max: f64,
    pub r_min: f64,
    /// Radial nodes per unit of `ln r`.
    pub radii_per_log_unit: f64,
    /// Sampling step in u; must resolve `sigma_max`.
    pub du: f64,
    pub constant_mode: ConstantMode,
}

impl Default for T2Params {
    fn default() -> Self {
        Self {
            n_directions: 180,
            n_sigmas: 128,
            sigma_max: 12.0,
            r_min: 0.01,
            radii_per_log_unit: 5.0,
            du: 0.25,
            constant_mode: ConstantMode::Derived,
        }
    }
}

impl T2Params {
    pub fn validate(&self) -> Result<()> {
        if self.n_directions < 2 || self.n_sigmas < 2 {
            return Err(WrtError::InvalidParameter("need at least two directions and two σ samples".into()));
        }
        if !(self.sigma_max > 0.0 && self.r_min > 0.0 && self.radii_per_log_unit > 0.0 && self.du > 0.0) {
            return Err(WrtError::InvalidParameter("σ_max, r_min, radial density and du must be positive".into()));
        }
        Ok(())
    }

    /// `σ_k = k·σ_max/K`, `k = 0 … K-1`.
    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.n_sigmas).map(|k| self.sigma_max * k as f64 / self.n_sigmas as f64).collect()
    }

    /// Log-uniform radii from `r_min` out to where `ĥ(rσ)` has decayed for the
    /// smallest nonzero σ.
    pub fn radii(&self, window: &WindowSpec) -> Vec<f64> {
        let ds = self.sigma_max / self.n_sigmas as f64;
        let r_max = (window.spectral_radius() / ds).max(2.0 * self.r_min);
        let count = ((r_max / self.r_min).ln() * self.radii_per_log_unit).ceil() as usize + 1;
        crate::quadrature::log_uniform(self.r_min, r_max, count.max(MIN_INNER_NODES))
    }
}

/// Sample the polar spectrum from `source` and synthesise f on `grid`.
pub fn reconstruct_t2_from_source<S: RaySource + ?Sized>(
    source: &S,
    window: &WindowSpec,
    object_radius: f64,
    grid: &Grid,
    params: &T2Params,
) -> Result<(ScalarField, PolarSpectralSamples)> {
    params.validate()?;
    let angles = crate::quadrature::uniform_angles(params.n_directions, 0.0);
    let samples = extract_polar_spectrum_on_demand(
        source,
        window,
        &angles,
        &params.radii(window),
        &params.sigmas(),
        object_radius,
        params.du,
    )?;
    let field = reconstruct_t2(&samples, window, grid, params.constant_mode)?;
    Ok((field, samples))
}

/// Dump samples in the `pss1` debugging format.
pub fn write_pss(dir: &Path, samples: &PolarSpectralSamples) -> Result<()> {
    let meta = json!({
        "format": "pss1",
        "directions": samples.directions,
        "sigmas": samples.sigmas,
        "radii": samples.radii,
        "dtype": "c128",
        "order": "C",
        "layout": ["direction", "sigma", "radius"],
    });
    crate::io::write_complex_dataset(dir, &meta, &samples.values)
}

pub fn read_pss(dir: &Path) -> Result<PolarSpectralSamples> {
    let (meta, values) = crate::io::read_complex_dataset(dir)?;
    if meta.get("format").and_then(|v| v.as_str()) != Some("pss1") {
        return Err(WrtError::Format("not a pss1 dataset".into()));
    }
    let get = |k: &str| meta.get(k).cloned().ok_or_else(|| WrtError::Format(format!("pss1 meta missing {k}")));
    let samples = PolarSpectralSamples {
        directions: serde_json::from_value(get("directions")?)?,
        sigmas: serde_json::from_value(get("sigmas")?)?,
        radii: serde_json::from_value(get("radii")?)?,
        values,
    };
    if samples.values.len() != samples.directions.len() * samples.sigmas.len() * samples.radii.len() {
        return Err(WrtError::Format("pss1 data length does not match its axes".into()));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
    use crate::forward::{windowed_ray_transform, FieldSource};
    use crate::invert_bp::ClosedFormRays;
    use crate::quadrature::{log_uniform, uniform_angles};

    fn phantom() -> PhantomSpec {
        PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0)
    }

    #[test]
    fn constants_ratio() {
        let w = WindowSpec::gaussian(1.0);
        let ratio = derived_constant(2, &w).unwrap() / published_constant(2, &w).unwrap();
        assert!((ratio - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn grid_extraction_matches_identity() {
        let f = phantom();
        let w = WindowSpec::gaussian(1.0);
        let g = make_grid(2, &[96, 96], &[24.0, 24.0], &[0.0, 0.0]).unwrap();
        let vset = VSet::polar_2d(3, 0.1, vec![0.2, 0.7, 1.5]);
        let d = windowed_ray_transform(&FieldSource::Phantom(f.clone()), &w, &g, &vset, Default::default()).unwrap();
        let sigmas: Vec<f64> = (0..24).map(|k| 0.25 * k as f64).collect();
        let fmax = f.fourier(&[0.0, 0.0]).unwrap().norm();
        for method in [LineMethod::Exact, LineMethod::Bilinear] {
            let s = extract_polar_spectrum(&d, &sigmas, method).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..3 {
                for (k, &sig) in sigmas.iter().enumerate() {
                    for (m, &r) in s.radii.iter().enumerate() {
                        let th = &s.directions[j];
                        let exact = f.fourier(&[sig * th[0], sig * th[1]]).unwrap() * w.ft(-r * sig);
                        worst = worst.max((s.get(j, k, m) - exact).norm() / fmax);
                    }
                }
            }
            let tol = if method == LineMethod::Exact { 1e-6 } else { 5e-2 };
            assert!(worst < tol, "{method:?}: {worst}");
        }
        assert!(matches!(
            extract_polar_spectrum(&d, &[20.0], LineMethod::Exact),
            Err(WrtError::BeyondNyquist { .. })
        ));
    }

    #[test]
    fn sigma_zero_is_independent_of_r() {
        let f = phantom();
        let w = WindowSpec::gaussian(1.0);
        let src = ClosedFormRays::new(f.clone(), w.clone()).unwrap();
        let radii = [0.05, 0.5, 2.0, 10.0];
        let s = extract_polar_spectrum_on_demand(&src, &w, &[0.3], &radii, &[0.0, 1.0], 5.0, 0.25).unwrap();
        let expected = f.fourier(&[0.0, 0.0]).unwrap() * w.ft(0.0);
        for m in 0..radii.len() {
            assert!((s.get(0, 0, m) - expected).norm() < 1e-6 * expected.norm());
        }
    }

    #[test]
    fn on_demand_matches_identity() {
        let f = phantom();
        let w = WindowSpec::gaussian(1.0);
        let src = ClosedFormRays::new(f.clone(), w.clone()).unwrap();
        let radii = log_uniform(0.01, 50.0, 9);
        let sigmas: Vec<f64> = (0..32).map(|k| 0.375 * k as f64).collect();
        let angles = [0.0, 1.1, 2.5];
        let s = extract_polar_spectrum_on_demand(&src, &w, &angles, &radii, &sigmas, 5.0, 0.25).unwrap();
        let fmax = f.fourier(&[0.0, 0.0]).unwrap().norm() * w.ft(0.0).norm();
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            let th = &s.directions[j];
            for (k, &sig) in sigmas.iter().enumerate() {
                for (m, &r) in radii.iter().enumerate() {
                    let exact = f.fourier(&[sig * th[0], sig * th[1]]).unwrap() * w.ft(-r * sig);
                    worst = worst.max((s.get(j, k, m) - exact).norm() / fmax);
                }
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn inner_integral_scaling() {
        let w = WindowSpec::gaussian(1.0);
        let f = phantom();
        let radii = log_uniform(0.01, 85.0, 46);
        let sigmas = [0.5, 1.0, 2.0, 4.0];
        // Exact samples from the factorised identity.
        let th = [0.6f64.cos(), 0.6f64.sin()];
        let mut values = Vec::new();
        for &s in &sigmas {
            for &r in &radii {
                values.push(f.fourier(&[s * th[0], s * th[1]]).unwrap() * w.ft(-r * s));
            }
        }
        let samples = PolarSpectralSamples { directions: vec![th.to_vec()], sigmas: sigmas.to_vec(), radii, values };
        let c = w.constants().unwrap().c_hat_half;
        for (k, &s) in sigmas.iter().enumerate() {
            let inner = inner_integral(&samples, &w, 0, k);
            let exact = f.fourier(&[s * th[0], s * th[1]]).unwrap() * (c / s);
            assert!((inner - exact).norm() < 1e-7 * exact.norm(), "{s}: {inner} {exact}");
        }
    }

    #[test]
    fn zero_samples_give_zero_field() {
        let w = WindowSpec::gaussian(1.0);
        let g = make_grid(2, &[8, 8], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let s = PolarSpectralSamples {
            directions: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            sigmas: vec![0.0, 1.0],
            radii: vec![0.5, 1.0],
            values: vec![Complex64::new(0.0, 0.0); 8],
        };
        let f = reconstruct_t2(&s, &w, &g, ConstantMode::Derived).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        let empty = PolarSpectralSamples { directions: vec![], sigmas: vec![], radii: vec![], values: vec![] };
        assert!(reconstruct_t2(&empty, &w, &g, ConstantMode::Derived).is_err());
        assert!(matches!(
            reconstruct_t2(&s, &WindowSpec::AnalyticSignal, &g, ConstantMode::Derived),
            Err(WrtError::ForwardOnlyWindow)
        ));
    }

    #[test]
    fn small_reconstruction() {
        let f = phantom();
        let w = WindowSpec::gaussian(1.0);
        let src = ClosedFormRays::new(f.clone(), w.clone()).unwrap();
        let angles = uniform_angles(48, 0.0);
        let radii = log_uniform(0.01, 85.0, 46);
        let sigmas: Vec<f64> = (0..64).map(|k| 12.0 * k as f64 / 64.0).collect();
        let s = extract_polar_spectrum_on_demand(&src, &w, &angles, &radii, &sigmas, 5.0, 0.25).unwrap();
        let g = make_grid(2, &[24, 24], &[6.0, 6.0], &[0.0, 0.0]).unwrap();
        let rec = reconstruct_t2(&s, &w, &g, ConstantMode::Derived).unwrap();
        let truth = sample_phantom(&f, &g).unwrap();
        let err = rel_l2_error(&rec, &truth).unwrap();
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn pss_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = PolarSpectralSamples {
            directions: vec![vec![1.0, 0.0]],
            sigmas: vec![0.0, 1.0],
            radii: vec![0.5],
            values: vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)],
        };
        write_pss(dir.path(), &s).unwrap();
        assert_eq!(read_pss(dir.path()).unwrap(), s);
    }
}
