//! Circular-harmonic inversion of `g(ρ, θ) = P_h f(ρθ, ρθ^⊥)` (n = 2).
//!
//! With `f(r, φ) = Σ f_l(r) e^{ilφ}` and the points `ρθ + tρθ^⊥` at radius
//! `ρ√(1+t²)` and angle `θ + arctan t`,
//!
//! ```text
//! g_l(ρ) = ∫ f_l(ρ√(1+t²)) e^{il·arctan t} h(t) dt = ρ⁻¹ ∫_ρ^∞ f_l(r) H_l(ρ/r) dr
//! H_l(s) = [h(τ) e^{ilα} + h(-τ) e^{-ilα}] / √(1-s²),  τ = √(s⁻²-1), α = arccos s
//! ```
//!
//! so `ρ g_l` is a multiplicative convolution of `r f_l` with `H_l` and
//!
//! ```text
//! Mg_l(s) = Mf_l(s) · MH_l(s-1)
//! f_l(r)  = (2πi)⁻¹ ∫_{t-i∞}^{t+i∞} r^{-s} Mg_l(s) / MH_l(s-1) ds
//! ```
//!
//! Mellin transforms along `Re s = t` are continuous Fourier transforms in
//! `u = ln r`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::fields::{continuous_ft_complex, Grid, ScalarField};
use crate::forward::PolarWRT;
use crate::quadrature::{composite_nodes, GaussLegendre};
use crate::windows::{Parity, WindowSpec};

/// Coefficients `c_l(ρ_i)` for `l ∈ [-L, L]`, stored `[(l + L)·R + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSeries {
    pub lmax: usize,
    pub rho: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl HarmonicSeries {
    pub fn get(&self, l: i32, i: usize) -> Complex64 {
        self.coeffs[(l + self.lmax as i32) as usize * self.rho.len() + i]
    }

    pub fn harmonic(&self, l: i32) -> &[Complex64] {
        let start = (l + self.lmax as i32) as usize * self.rho.len();
        &self.coeffs[start..start + self.rho.len()]
    }
}

/// Samples `M(t + iy_k)` on a uniform symmetric y-grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinLine {
    pub t: f64,
    pub y: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `H_l` sampled on radii in (0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelH {
    pub l: i32,
    pub r: Vec<f64>,
    pub values: Vec<Complex64>,
    pub window: WindowSpec,
}

/// `ρ_i = exp(u0 + i·du)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub u0: f64,
    pub du: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && count >= 2) {
            return Err(WrtError::InvalidParameter("log grid needs 0 < r_min < r_max and ≥ 2 samples".into()));
        }
        let u0 = r_min.ln();
        Ok(Self { u0, du: (r_max.ln() - u0) / (count - 1) as f64, count })
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|i| (self.u0 + i as f64 * self.du).exp()).collect()
    }

    /// Recover the log-uniform structure of a radius list.
    pub fn from_radii(rho: &[f64]) -> Result<Self> {
        if rho.len() < 2 || rho.iter().any(|&r| !(r > 0.0)) {
            return Err(WrtError::InvalidParameter("radii must be positive, at least two".into()));
        }
        let g = Self::new(rho[0], *rho.last().unwrap(), rho.len())?;
        for (i, &r) in rho.iter().enumerate() {
            if ((r.ln() - g.u0) - i as f64 * g.du).abs() > 1e-9 * (1.0 + g.u0.abs()) {
                return Err(WrtError::InvalidParameter("radii are not log-uniform".into()));
            }
        }
        Ok(g)
    }
}

/// Reject windows outside the hypotheses of this path: real, not odd, and
/// compactly supported.
pub fn check_window(window: &WindowSpec) -> Result<()> {
    window.require_invertible()?;
    if window.parity() == Parity::Odd {
        return Err(WrtError::OddWindow);
    }
    if !window.is_compact() {
        return Err(WrtError::MellinWindow(format!(
            "{}; use the backprojection, polar-Fourier or slice inversions for non-compact windows",
            window.name()
        )));
    }
    Ok(())
}

/// `g_l(ρ) = (1/N) Σ_j g(ρ, θ_j) e^{-ilθ_j}` for `|l| ≤ L`.
pub fn circular_decompose(g: &PolarWRT, lmax: usize) -> Result<HarmonicSeries> {
    let nt = g.theta.len();
    if nt < 2 * lmax + 2 {
        return Err(WrtError::InvalidParameter(format!("{nt} angles cannot resolve harmonics up to {lmax}")));
    }
    let step = 2.0 * PI / nt as f64;
    for (j, &th) in g.theta.iter().enumerate() {
        if (th - g.theta[0] - j as f64 * step).abs() > 1e-9 {
            return Err(WrtError::InvalidParameter("θ samples must be uniform on the circle".into()));
        }
    }
    let nr = g.rho.len();
    let ls: Vec<i32> = (-(lmax as i32)..=lmax as i32).collect();
    let coeffs: Vec<Complex64> = ls
        .par_iter()
        .flat_map_iter(|&l| {
            (0..nr).map(move |i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &th) in g.theta.iter().enumerate() {
                    acc += g.get(i, j) * Complex64::from_polar(1.0, -(l as f64) * th);
                }
                acc / nt as f64
            })
        })
        .collect();
    let series = HarmonicSeries { lmax, rho: g.rho.clone(), coeffs };
    let peak = ls
        .iter()
        .map(|&l| series.harmonic(l).iter().fold(0.0f64, |m, c| m.max(c.norm())))
        .fold(0.0, f64::max);
    let top = series.harmonic(lmax as i32).iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if peak > 0.0 && top > 0.01 * peak {
        log::warn!("harmonic truncation: |g_L| is {:.1}% of the largest coefficient", 100.0 * top / peak);
    }
    Ok(series)
}

/// Pointwise `H_l(s)`, zero for `s ≥ 1`.
pub fn kernel_h(window: &WindowSpec, l: i32, r: &[f64]) -> Result<KernelH> {
    check_window(window)?;
    let values = r
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s < 1.0) {
                return Complex64::new(0.0, 0.0);
            }
            let tau = (1.0 / (s * s) - 1.0).sqrt();
            let alpha = s.acos();
            let root = (1.0 - s * s).sqrt();
            (Complex64::from_polar(window.eval_real(tau), l as f64 * alpha)
                + Complex64::from_polar(window.eval_real(-tau), -(l as f64) * alpha))
                / root
        })
        .collect();
    Ok(KernelH { l, r: r.to_vec(), values, window: window.clone() })
}

/// The kernel as printed in the original statement,
/// `[h(τ) + h(-τ)] e^{ilα} / √(1-s²)`; kept for comparison only.
pub fn kernel_h_literal(window: &WindowSpec, l: i32, s: f64) -> Complex64 {
    if !(s > 0.0 && s < 1.0) {
        return Complex64::new(0.0, 0.0);
    }
    let tau = (1.0 / (s * s) - 1.0).sqrt();
    Complex64::from_polar(window.eval_real(tau) + window.eval_real(-tau), l as f64 * s.acos()) / (1.0 - s * s).sqrt()
}

/// `MH_l(t + iy) = ∫₀¹ H_l(s) s^{t+iy-1} ds`, evaluated after `s = cos α` as
/// `∫ h(tan α) e^{ilα} cos^{t+iy-1} α dα` over `|tan α| ≤ R`, which removes
/// the endpoint singularity.
pub fn mellin_kernel(window: &WindowSpec, l: i32, t: f64, y: &[f64]) -> Result<MellinLine> {
    check_window(window)?;
    let radius = window.support_radius().unwrap_or(1.0);
    let a = radius.atan();
    let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let panels = 64 + (y_max * 0.5 + l.unsigned_abs() as f64).ceil() as usize;
    let (nodes, weights) = composite_nodes(-a, a, panels, GaussLegendre::sixteen());
    let base: Vec<(Complex64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&al, &w)| {
            let c = al.cos();
            (Complex64::from_polar(w * window.eval_real(al.tan()) * c.powf(t - 1.0), l as f64 * al), c.ln())
        })
        .collect();
    let values = y
        .par_iter()
        .map(|&yy| base.iter().map(|&(b, lc)| b * Complex64::from_polar(1.0, yy * lc)).sum())
        .collect();
    Ok(MellinLine { t, y: y.to_vec(), values })
}

/// Relative sample magnitude the Mellin integrand must fall below at both
/// ends of the log grid.
pub const END_DECAY: f64 = 1e-10;

/// `Mf(t + iy) = ∫ f(e^u) e^{tu} e^{iyu} du` for samples on a log grid,
/// at every transform frequency with `|y| ≤ y_max`.
pub fn mellin_transform(samples: &[Complex64], grid: &LogGrid, t: f64, y_max: f64) -> Result<MellinLine> {
    if samples.len() != grid.count {
        return Err(WrtError::InvalidParameter("sample count does not match the log grid".into()));
    }
    let weighted: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(i, v)| v * (t * (grid.u0 + i as f64 * grid.du)).exp())
        .collect();
    let peak = weighted.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak > 0.0 {
        let ends = weighted[0].norm().max(weighted[grid.count - 1].norm());
        if ends > END_DECAY * peak {
            return Err(WrtError::NoDecay(format!(
                "Mellin integrand at t = {t} is {:.2e} of its peak at the log-grid ends",
                ends / peak
            )));
        }
    }
    let g = Grid::new(vec![grid.count], vec![grid.u0], vec![grid.du])?;
    let spec = continuous_ft_complex(&g, &weighted, 2);
    let mut pairs: Vec<(f64, Complex64)> = (0..spec.grid.shape[0])
        .map(|k| (-spec.grid.coord(0, k), spec.values[k]))
        .filter(|(y, _)| y.abs() <= y_max * (1.0 + 1e-12))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Keep the set symmetric about y = 0.
    if let (Some(first), Some(last)) = (pairs.first(), pairs.last()) {
        if (first.0 + last.0).abs() > 1e-9 {
            if first.0.abs() > last.0.abs() {
                pairs.remove(0);
            } else {
                pairs.pop();
            }
        }
    }
    Ok(MellinLine { t, y: pairs.iter().map(|p| p.0).collect(), values: pairs.iter().map(|p| p.1).collect() })
}

/// `max_y |Mg(t+iy) - Mf(t+iy) MH(t-1+iy)| / max|Mg|` over `|y| ≤ y_band`.
pub fn mellin_convolution_residual(mg: &MellinLine, mf: &MellinLine, mh: &MellinLine, y_band: f64) -> f64 {
    let peak = mg.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let worst = (0..mg.y.len())
        .filter(|&k| mg.y[k].abs() <= y_band)
        .map(|k| (mg.values[k] - mf.values[k] * mh.values[k]).norm())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        worst
    } else {
        worst / peak
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    /// Tikhonov λ; `None` means `(1e-6·max|MH|)²`.
    pub lambda: Option<f64>,
    /// Relative level below which `|MH|` counts as negligible.
    pub eps_div: f64,
}

impl Default for RegParams {
    fn default() -> Self {
        Self { lambda: None, eps_div: 1e-6 }
    }
}

/// Regularised quotient `Mg · conj(MH) / (|MH|² + λ)` on a common y-grid.
pub fn regularized_quotient(mg: &MellinLine, mh: &MellinLine, reg: &RegParams) -> Result<Vec<Complex64>> {
    if mg.y.len() != mh.y.len() || mg.y.iter().zip(&mh.y).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(WrtError::GridMismatch("Mellin lines sampled on different y-grids".into()));
    }
    let peak = mh.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Err(WrtError::IllPosed { fraction: 100.0 });
    }
    let small = mh.values.iter().filter(|v| v.norm() < reg.eps_div * peak).count();
    let fraction = small as f64 / mh.values.len() as f64;
    if fraction > 0.5 {
        return Err(WrtError::IllPosed { fraction: 100.0 * fraction });
    }
    let lambda = reg.lambda.unwrap_or((1e-6 * peak).powi(2));
    Ok(mg.values.iter().zip(&mh.values).map(|(g, h)| g * h.conj() / (h.norm_sqr() + lambda)).collect())
}

/// `f(r) = (2π)⁻¹ ∫_{-T}^{T} r^{-t-iy} Q(t+iy) dy` by the trapezoid rule.
pub fn inverse_mellin(q: &[Complex64], t: f64, y: &[f64], big_t: f64, r: f64) -> Complex64 {
    let dy = if y.len() >= 2 { y[1] - y[0] } else { 0.0 };
    let lnr = r.ln();
    let mut acc = Complex64::new(0.0, 0.0);
    let kept: Vec<usize> = (0..y.len()).filter(|&k| y[k].abs() <= big_t * (1.0 + 1e-12)).collect();
    for (n, &k) in kept.iter().enumerate() {
        let w = if n == 0 || n + 1 == kept.len() { 0.5 } else { 1.0 };
        acc += q[k] * Complex64::from_polar(w, -y[k] * lnr);
    }
    acc * (r.powf(-t) * dy / (2.0 * PI))
}

/// Recover `f_l` at `r_out` from `Mg_l` on `Re s = t` and `MH_l` on
/// `Re s = t - 1`, truncating the contour at `|Im s| ≤ T`.
pub fn recover_fl(mg: &MellinLine, mh: &MellinLine, big_t: f64, r_out: &[f64], reg: &RegParams) -> Result<Vec<Complex64>> {
    if !(mg.t > 1.0) {
        return Err(WrtError::InvalidParameter(format!("contour abscissa must exceed 1, got {}", mg.t)));
    }
    if (mh.t - (mg.t - 1.0)).abs() > 1e-12 {
        return Err(WrtError::InvalidParameter("kernel line must sit at t - 1".into()));
    }
    let q = regularized_quotient(mg, mh, reg)?;
    Ok(r_out.iter().map(|&r| inverse_mellin(&q, mg.t, &mg.y, big_t, r)).collect())
}

/// `g_l(ρ) = ∫ f_l(ρ√(1+t²)) e^{il·arctan t} h(t) dt` for a known radial
/// profile (manufactured data).
pub fn manufacture_gl<F: Fn(f64) -> Complex64 + Sync>(f_l: F, window: &WindowSpec, l: i32, rho: &[f64]) -> Vec<Complex64> {
    let radius = window.support_radius().unwrap_or(8.0);
    let (nodes, weights) = composite_nodes(-radius, radius, 64, GaussLegendre::sixteen());
    rho.par_iter()
        .map(|&p| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| f_l(p * (1.0 + t * t).sqrt()) * Complex64::from_polar(w * window.eval_real(t), l as f64 * t.atan()))
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinParams {
    pub lmax: usize,
    /// Contour abscissa, > 1.
    pub t: f64,
    /// Contour half-height.
    pub big_t: f64,
    pub reg: RegParams,
}

impl Default for MellinParams {
    fn default() -> Self {
        Self { lmax: 16, t: 1.5, big_t: 40.0, reg: RegParams::default() }
    }
}

#[derive(Clone, Debug)]
pub struct MellinReconstruction {
    pub field: ScalarField,
    /// Largest relative change of the recovered harmonics between T and T/2.
    pub truncation_change: f64,
}

/// Decompose, recover each `f_l`, and sum the truncated series on `grid`.
pub fn reconstruct_mellin(g: &PolarWRT, grid: &Grid, params: &MellinParams) -> Result<MellinReconstruction> {
    check_window(&g.window)?;
    if grid.n() != 2 {
        return Err(WrtError::Unsupported("harmonic inversion is implemented for n = 2".into()));
    }
    if !(params.t > 1.0) {
        return Err(WrtError::InvalidParameter(format!("contour abscissa must exceed 1, got {}", params.t)));
    }
    if !(params.big_t > 0.0) {
        return Err(WrtError::InvalidParameter("contour half-height must be positive".into()));
    }
    let log_grid = LogGrid::from_radii(&g.rho)?;
    let series = circular_decompose(g, params.lmax)?;
    let lmax = params.lmax as i32;

    let points: Vec<(f64, f64)> = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            (p[0].hypot(p[1]), p[1].atan2(p[0]))
        })
        .collect();
    // Inside r_floor use the regular behaviour f_l(r) ∝ r^{|l|} instead of
    // the r^{-t}-amplified contour integral.
    let r_floor = (0.25 * grid.spacing.iter().fold(f64::INFINITY, |m, &s| m.min(s))).max(g.rho[0]);
    let radii: Vec<f64> = points.iter().map(|p| p.0.max(r_floor)).collect();
    let probe: Vec<f64> = log_grid.radii().into_iter().filter(|&r| r >= 0.1).step_by(8).collect();

    let per_l: Vec<(Vec<Complex64>, f64)> = (-lmax..=lmax)
        .into_par_iter()
        .map(|l| -> Result<(Vec<Complex64>, f64)> {
            let mg = mellin_transform(series.harmonic(l), &log_grid, params.t, params.big_t)?;
            let mh = mellin_kernel(&g.window, l, params.t - 1.0, &mg.y)?;
            let q = regularized_quotient(&mg, &mh, &params.reg)?;
            let fl: Vec<Complex64> =
                radii.iter().map(|&r| inverse_mellin(&q, params.t, &mg.y, params.big_t, r)).collect();
            let full: Vec<Complex64> =
                probe.iter().map(|&r| inverse_mellin(&q, params.t, &mg.y, params.big_t, r)).collect();
            let half: Vec<Complex64> =
                probe.iter().map(|&r| inverse_mellin(&q, params.t, &mg.y, 0.5 * params.big_t, r)).collect();
            let scale = full.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let diff = full.iter().zip(&half).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            Ok((fl, if scale > 0.0 { diff / scale } else { 0.0 }))
        })
        .collect::<Result<_>>()?;

    let global = per_l.iter().map(|(fl, _)| fl.iter().fold(0.0f64, |m, v| m.max(v.norm()))).fold(0.0, f64::max);
    let truncation_change = per_l
        .iter()
        .map(|(fl, d)| {
            let own = fl.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            if global > 0.0 {
                d * own / global
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    if truncation_change > 0.01 {
        log::warn!("contour truncation: T and T/2 recoveries differ by {:.2}%", 100.0 * truncation_change);
    }

    let values: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, &(_, phi))| {
            let mut acc = Complex64::new(0.0, 0.0);
            let r = points[i].0;
            for (k, l) in (-lmax..=lmax).enumerate() {
                let damp = if r < r_floor { (r / r_floor).powi(l.abs()) } else { 1.0 };
                acc += per_l[k].0[i] * Complex64::from_polar(damp, l as f64 * phi);
            }
            acc.re
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(WrtError::NonFinite("harmonic synthesis".into()));
    }
    Ok(MellinReconstruction { field: ScalarField::new(grid.clone(), values)?, truncation_change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PhantomSpec;
    use crate::forward::{wrt_polar_perp, FieldSource, QuadratureParams};
    use crate::quadrature::uniform_angles;

    fn log_grid() -> LogGrid {
        LogGrid::new((-16f64).exp(), 1.3f64.exp(), 512).unwrap()
    }

    #[test]
    fn window_hypotheses() {
        assert!(matches!(check_window(&WindowSpec::hermite1(1.0)), Err(WrtError::OddWindow)));
        assert!(matches!(check_window(&WindowSpec::gaussian(1.0)), Err(WrtError::MellinWindow(_))));
        assert!(matches!(check_window(&WindowSpec::AnalyticSignal), Err(WrtError::ForwardOnlyWindow)));
        assert!(check_window(&WindowSpec::bump(1.0)).is_ok());
        let msg = WrtError::OddWindow.to_string();
        assert!(msg.contains("h is odd (even part vanishes)"));
    }

    #[test]
    fn kernel_values() {
        let w = WindowSpec::bump(2.0);
        let s = 1.0 / 2f64.sqrt();
        let k = kernel_h(&w, 0, &[s, 1.0, 1.5]).unwrap();
        assert!((k.values[0].re - 2.0 * w.eval_real(1.0) * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(k.values[0].im, 0.0);
        assert_eq!(k.values[1], Complex64::new(0.0, 0.0));
        assert_eq!(k.values[2], Complex64::new(0.0, 0.0));
        // Even h: the two phases combine into 2h(τ)cos(lα).
        let k3 = kernel_h(&w, 3, &[0.8]).unwrap();
        let tau = (1.0f64 / 0.64 - 1.0).sqrt();
        let expect = 2.0 * w.eval_real(tau) * (3.0 * 0.8f64.acos()).cos() / 0.6;
        assert!((k3.values[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn kernel_mellin_matches_direct_quadrature() {
        let w = WindowSpec::bump(1.5);
        for l in [0, 2] {
            let line = mellin_kernel(&w, l, 0.7, &[0.0, 3.0, -11.0]).unwrap();
            for (k, &y) in line.y.iter().enumerate() {
                // ∫₀¹ H(r) r^{s-1} dr with r = √(1 - x²), which flattens r → 1.
                let s = Complex64::new(0.7, y);
                let direct = crate::quadrature::integrate_complex(
                    |x| {
                        let r = (1.0 - x * x).sqrt();
                        let h = kernel_h(&w, l, &[r]).unwrap().values[0];
                        h * Complex64::new(r, 0.0).powc(s - 1.0) * (x / r)
                    },
                    1e-9,
                    1.0 - 1e-12,
                    400,
                );
                assert!((direct - line.values[k]).norm() < 1e-6 * line.values[0].norm(), "{l} {y}");
            }
        }
    }

    #[test]
    fn gamma_oracle_and_shift() {
        let g = log_grid();
        let r = g.radii();
        let f: Vec<Complex64> = r.iter().map(|&x| Complex64::new((-x).exp() * (x < 3.5) as u8 as f64, 0.0)).collect();
        // e^{-r} is cut near e^{1.3}; use a wider grid for the Γ check.
        let wide = LogGrid::new((-16f64).exp(), 4f64.exp(), 1024).unwrap();
        let fw: Vec<Complex64> = wide.radii().iter().map(|&x| Complex64::new((-x).exp(), 0.0)).collect();
        let line = mellin_transform(&fw, &wide, 2.0, 5.0).unwrap();
        let k0 = line.y.iter().position(|&y| y == 0.0).unwrap();
        assert!((line.values[k0] - 1.0).norm() < 1e-10);
        assert!((line.y[0] + line.y[line.y.len() - 1]).abs() < 1e-12);
        // M[r f](s) = M f(s + 1).
        let bump = |x: f64| (-(x - 1.0).powi(2) / 0.08).exp();
        let a: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x * bump(x), 0.0)).collect();
        let b: Vec<Complex64> = r.iter().map(|&x| Complex64::new(bump(x), 0.0)).collect();
        let la = mellin_transform(&a, &g, 1.5, 20.0).unwrap();
        let lb = mellin_transform(&b, &g, 2.5, 20.0).unwrap();
        for k in 0..la.y.len() {
            assert!((la.values[k] - lb.values[k]).norm() < 1e-8);
        }
        let zero = mellin_transform(&vec![Complex64::new(0.0, 0.0); 512], &g, 1.5, 20.0).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
        assert!(matches!(mellin_transform(&f, &g, -1.0, 5.0), Err(WrtError::NoDecay(_))));
    }

    #[test]
    fn decomposition_orthogonality() {
        let theta = uniform_angles(16, 0.0);
        let w = WindowSpec::bump(1.0);
        let values: Vec<Complex64> = theta.iter().map(|&t| Complex64::new(t.cos(), 0.0)).collect();
        let g = PolarWRT { rho: vec![1.0], theta: theta.clone(), window: w.clone(), values };
        let s = circular_decompose(&g, 3).unwrap();
        for l in -3i32..=3 {
            let expect = if l.abs() == 1 { 0.5 } else { 0.0 };
            assert!((s.get(l, 0) - expect).norm() < 1e-14);
        }
        let flat = PolarWRT { rho: vec![1.0], theta, window: w, values: vec![Complex64::new(2.0, 0.0); 16] };
        let s = circular_decompose(&flat, 3).unwrap();
        assert!((s.get(0, 0) - 2.0).norm() < 1e-14 && s.get(2, 0).norm() < 1e-14);
        assert!(circular_decompose(&g, 8).is_err());
    }

    #[test]
    fn decomposition_matches_quadrature_oracle() {
        let f = PhantomSpec::mixture(vec![(vec![0.8, 0.1], 0.3, 1.0), (vec![-0.4, -0.6], 0.25, 0.7)]);
        let w = WindowSpec::bump(1.0);
        let rho = [0.3, 0.9];
        let theta = uniform_angles(256, 0.0);
        let g = wrt_polar_perp(&FieldSource::Phantom(f.clone()), &w, &rho, &theta, QuadratureParams::default()).unwrap();
        let s = circular_decompose(&g, 4).unwrap();
        for l in [0, 1, -3] {
            for (i, &p) in rho.iter().enumerate() {
                let oracle = manufacture_gl(|r| f.circular_harmonic(l, r), &w, l, &[p])[0];
                assert!((s.get(l, i) - oracle).norm() < 1e-10, "{l} {p}");
                assert!((s.get(-l, i) - s.get(l, i).conj()).norm() < 1e-10);
            }
        }
    }

    fn profile(l: i32) -> impl Fn(f64) -> Complex64 + Sync {
        move |r: f64| Complex64::new(r.powi(l.abs()) * (-(r - 1.2).powi(2) / (2.0 * 0.09)).exp(), 0.0)
    }

    #[test]
    fn convolution_identity_on_manufactured_data() {
        let w = WindowSpec::bump(1.0);
        let g = log_grid();
        let r = g.radii();
        for l in [0, 2, 4] {
            let gl = manufacture_gl(profile(l), &w, l, &r);
            let fl: Vec<Complex64> = r.iter().map(|&x| profile(l)(x)).collect();
            let mg = mellin_transform(&gl, &g, 1.5, 20.0).unwrap();
            let mf = mellin_transform(&fl, &g, 1.5, 20.0).unwrap();
            let mh = mellin_kernel(&w, l, 0.5, &mg.y).unwrap();
            let res = mellin_convolution_residual(&mg, &mf, &mh, 20.0);
            assert!(res < 1e-6, "{l}: {res}");
            if l == 0 {
                // The shift-free pairing Mf(s+1)·MH(s) does not factor g_l.
                let mf1 = mellin_transform(&fl, &g, 2.5, 20.0).unwrap();
                let mh1 = mellin_kernel(&w, l, 1.5, &mg.y).unwrap();
                assert!(mellin_convolution_residual(&mg, &mf1, &mh1, 20.0) > 0.1);
            }
        }
    }

    #[test]
    fn manufactured_recovery_and_contour_independence() {
        let w = WindowSpec::bump(1.0);
        let g = log_grid();
        let r = g.radii();
        let l = 2;
        let gl = manufacture_gl(profile(l), &w, l, &r);
        let r_out: Vec<f64> = (0..40).map(|i| 0.1 + i as f64 * 0.05).collect();
        let exact: Vec<Complex64> = r_out.iter().map(|&x| profile(l)(x)).collect();
        let norm = exact.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut recs = Vec::new();
        for t in [1.5, 2.0] {
            let mg = mellin_transform(&gl, &g, t, 40.0).unwrap();
            let mh = mellin_kernel(&w, l, t - 1.0, &mg.y).unwrap();
            let rec = recover_fl(&mg, &mh, 40.0, &r_out, &RegParams::default()).unwrap();
            let err = rec.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / norm;
            assert!(err < 0.05, "{t}: {err}");
            recs.push((rec, err));
        }
        let diff = recs[0].0.iter().zip(&recs[1].0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / norm;
        assert!(diff <= 2.0 * recs[0].1.max(recs[1].1) + 1e-12);
        let mg = mellin_transform(&gl, &g, 1.0, 40.0).unwrap();
        let mh = mellin_kernel(&w, l, 0.0, &mg.y).unwrap();
        assert!(recover_fl(&mg, &mh, 40.0, &r_out, &RegParams::default()).is_err());
    }

    #[test]
    fn zero_input_and_ill_posed_kernel() {
        let y: Vec<f64> = (-4..=4).map(|k| k as f64).collect();
        let zero = MellinLine { t: 1.5, y: y.clone(), values: vec![Complex64::new(0.0, 0.0); 9] };
        let mh = mellin_kernel(&WindowSpec::bump(1.0), 0, 0.5, &y).unwrap();
        let rec = recover_fl(&zero, &mh, 4.0, &[0.5, 1.0], &RegParams::default()).unwrap();
        assert!(rec.iter().all(|v| v.norm() == 0.0));
        let mut tiny = mh.clone();
        for v in tiny.values.iter_mut().skip(2) {
            *v *= 1e-9;
        }
        let err = recover_fl(&zero, &tiny, 4.0, &[0.5], &RegParams::default()).unwrap_err();
        assert!(matches!(err, WrtError::IllPosed { .. }));
        assert!(err.to_string().contains("ill-posed"));
    }
}
