//! The windowed ray transform `P_h f(u, v) = ∫ f(u + t v) h(t) dt`, evaluated
//! on the parametrised v-sets each inversion consumes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::fields::{continuous_ft_complex, Grid, PhantomSpec, ScalarField};
use crate::interp::cubic_eval;
use crate::quadrature::GaussLegendre;
use crate::windows::WindowSpec;

/// How the second argument `v` of `P_h f(u, v)` is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum VSet {
    /// Every point of a grid in v-space.
    FullGrid { grid: Grid },
    /// `v = r θ` for unit directions `θ_j` and radii `r_k > 0`; index `j·R + k`.
    Polar { directions: Vec<Vec<f64>>, radii: Vec<f64> },
    /// `v = (v₁, v')` with `v₁` from a list and `v'` fixed.
    V1Line { v1: Vec<f64>, v_perp: Vec<f64> },
    /// `v = u^⊥ = (-u₂, u₁)`, one sample per u (n = 2).
    Perp,
}

impl VSet {
    /// Uniform directions on the circle at angles `offset + 2πj/count`.
    pub fn polar_2d(count: usize, offset: f64, radii: Vec<f64>) -> Self {
        let directions = crate::quadrature::uniform_angles(count, offset)
            .into_iter()
            .map(|a| vec![a.cos(), a.sin()])
            .collect();
        VSet::Polar { directions, radii }
    }

    pub fn len(&self) -> usize {
        match self {
            VSet::FullGrid { grid } => grid.len(),
            VSet::Polar { directions, radii } => directions.len() * radii.len(),
            VSet::V1Line { v1, .. } => v1.len(),
            VSet::Perp => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> &'static str {
        match self {
            VSet::FullGrid { .. } => "full-grid",
            VSet::Polar { .. } => "polar",
            VSet::V1Line { .. } => "v1-line",
            VSet::Perp => "perp",
        }
    }

    /// Check the set against dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            VSet::FullGrid { grid } => {
                if grid.n() != n {
                    return Err(WrtError::DimensionMismatch { expected: n, got: grid.n() });
                }
                for i in 0..grid.len() {
                    if grid.point(i).iter().all(|&x| x == 0.0) {
                        return Err(WrtError::ZeroDirection);
                    }
                }
            }
            VSet::Polar { directions, radii } => {
                if directions.is_empty() || radii.is_empty() {
                    return Err(WrtError::InvalidParameter("polar v-set needs directions and radii".into()));
                }
                for d in directions {
                    if d.len() != n {
                        return Err(WrtError::DimensionMismatch { expected: n, got: d.len() });
                    }
                    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(WrtError::ZeroDirection);
                    }
                    if (norm - 1.0).abs() > 1e-9 {
                        return Err(WrtError::InvalidParameter(format!("polar direction not unit length: {d:?}")));
                    }
                }
                if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                    return Err(WrtError::ZeroDirection);
                }
            }
            VSet::V1Line { v1, v_perp } => {
                if v_perp.len() + 1 != n {
                    return Err(WrtError::DimensionMismatch { expected: n - 1, got: v_perp.len() });
                }
                if v1.is_empty() {
                    return Err(WrtError::InvalidParameter("v1-line needs samples".into()));
                }
                if v_perp.iter().all(|&x| x == 0.0) && v1.iter().any(|&x| x == 0.0) {
                    return Err(WrtError::ZeroDirection);
                }
            }
            VSet::Perp => {
                if n != 2 {
                    return Err(WrtError::Unsupported("perp v-set requires n = 2".into()));
                }
            }
        }
        Ok(())
    }

    /// The `index`-th v vector (not defined for `Perp`, which depends on u).
    pub fn vector(&self, index: usize) -> Vec<f64> {
        match self {
            VSet::FullGrid { grid } => grid.point(index),
            VSet::Polar { directions, radii } => {
                let d = &directions[index / radii.len()];
                let r = radii[index % radii.len()];
                d.iter().map(|x| x * r).collect()
            }
            VSet::V1Line { v1, v_perp } => {
                let mut v = vec![v1[index]];
                v.extend_from_slice(v_perp);
                v
            }
            VSet::Perp => panic!("perp v-set has no fixed vectors"),
        }
    }
}

/// Panel count for the composite 16-point Gauss–Legendre t-rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    pub panels: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { panels: 32 }
    }
}

/// The function being transformed: a closed-form phantom or samples on a grid.
#[derive(Clone, Debug)]
pub enum FieldSource {
    Phantom(PhantomSpec),
    /// Interpolated with tensor cubic convolution, zero outside the grid.
    Sampled(ScalarField),
}

impl FieldSource {
    pub fn dim(&self) -> Option<usize> {
        match self {
            FieldSource::Phantom(p) => p.dim(),
            FieldSource::Sampled(f) => Some(f.grid.n()),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            FieldSource::Phantom(p) => p.validate(n),
            FieldSource::Sampled(f) if f.grid.n() != n => {
                Err(WrtError::DimensionMismatch { expected: n, got: f.grid.n() })
            }
            FieldSource::Sampled(_) => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FieldSource::Phantom(p) => p.eval(x),
            FieldSource::Sampled(f) => cubic_eval(&f.grid, x, |i| f.values[i]),
        }
    }

    /// t-interval on which `f(u + t v)` can be nonzero.
    pub fn line_interval(&self, u: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        match self {
            FieldSource::Phantom(p) => p.line_interval(u, v),
            FieldSource::Sampled(f) => {
                let g = &f.grid;
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for k in 0..g.n() {
                    let a = g.origin[k] - 2.0 * g.spacing[k];
                    let b = g.origin[k] + (g.shape[k] as f64 + 1.0) * g.spacing[k];
                    if v[k] == 0.0 {
                        if u[k] <= a || u[k] >= b {
                            return None;
                        }
                    } else {
                        let (t0, t1) = ((a - u[k]) / v[k], (b - u[k]) / v[k]);
                        lo = lo.max(t0.min(t1));
                        hi = hi.min(t0.max(t1));
                    }
                }
                (lo < hi).then_some((lo, hi))
            }
        }
    }
}

/// `∫ f(u + t v) h(t) dt` by composite Gauss–Legendre over the intersection of
/// the window's numerical support and the field's support along the line.
pub fn line_integral(
    source: &FieldSource,
    window: &WindowSpec,
    u: &[f64],
    v: &[f64],
    quad: QuadratureParams,
) -> Complex64 {
    let (mut lo, mut hi) = match source.line_interval(u, v) {
        Some(iv) => iv,
        None => return Complex64::new(0.0, 0.0),
    };
    if let Some(t) = window.support_radius() {
        lo = lo.max(-t);
        hi = hi.min(t);
    }
    if !(lo < hi) {
        return Complex64::new(0.0, 0.0);
    }
    let rule = GaussLegendre::sixteen();
    let panels = quad.panels.max(1);
    let h = (hi - lo) / panels as f64;
    let mut x = vec![0.0; u.len()];
    let real = window.is_real();
    let mut acc_re = 0.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + 0.5 * h * node;
            for k in 0..u.len() {
                x[k] = u[k] + t * v[k];
            }
            let fv = source.eval(&x);
            if fv == 0.0 {
                continue;
            }
            let wt = 0.5 * h * w * fv;
            if real {
                acc_re += wt * window.eval_real(t);
            } else {
                acc += window.eval(t) * wt;
            }
        }
    }
    if real {
        Complex64::new(acc_re, 0.0)
    } else {
        acc
    }
}

/// Samples of `P_h f` over a u-grid and a v-set, u-major and v-minor.
#[derive(Clone, Debug, PartialEq)]
pub struct WRTData {
    pub u_grid: Grid,
    pub vset: VSet,
    pub window: WindowSpec,
    pub values: Vec<Complex64>,
}

impl WRTData {
    pub fn nv(&self) -> usize {
        self.vset.len()
    }

    pub fn is_complex(&self) -> bool {
        !self.window.is_real()
    }

    pub fn dtype(&self) -> &'static str {
        if self.is_complex() {
            "c128"
        } else {
            "f64"
        }
    }

    pub fn get(&self, u_flat: usize, v_index: usize) -> Complex64 {
        self.values[u_flat * self.nv() + v_index]
    }

    /// The u-slice `P_h f(·, v_index)` as complex samples on `u_grid`.
    pub fn column(&self, v_index: usize) -> Vec<Complex64> {
        let nv = self.nv();
        (0..self.u_grid.len()).map(|i| self.values[i * nv + v_index]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Evaluate `P_h f` at every (u, v) pair of `u_grid × vset`.
pub fn windowed_ray_transform(
    source: &FieldSource,
    window: &WindowSpec,
    u_grid: &Grid,
    vset: &VSet,
    quad: QuadratureParams,
) -> Result<WRTData> {
    let n = u_grid.n();
    window.validate()?;
    source.validate(n)?;
    vset.validate(n)?;
    let nv = vset.len();
    let vs: Vec<Vec<f64>> = match vset {
        VSet::Perp => Vec::new(),
        _ => (0..nv).map(|j| vset.vector(j)).collect(),
    };
    let values: Vec<Complex64> = (0..u_grid.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = u_grid.point(i);
            let row: Vec<Complex64> = match vset {
                VSet::Perp => {
                    let v = [-u[1], u[0]];
                    vec![line_integral(source, window, &u, &v, quad)]
                }
                _ => vs.iter().map(|v| line_integral(source, window, &u, v, quad)).collect(),
            };
            row.into_iter()
        })
        .collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(WrtError::NonFinite("windowed ray transform output".into()));
    }
    Ok(WRTData { u_grid: u_grid.clone(), vset: vset.clone(), window: window.clone(), values })
}

/// Closed form of `P_h f(u, v)` for a Gaussian (or mixture) phantom and a
/// Gaussian or first-Hermite window. `v = 0` is allowed. Returns `None` for
/// other combinations.
///
/// With `d = u - c`, the exponent of `f(u+tv)h(t)` is `-(αt² + 2βt + γ)/2` where
/// `α = |v|²/σ² + 1/s²`, `β = d·v/σ²`, `γ = |d|²/σ²`.
pub fn analytic_wrt(phantom: &PhantomSpec, window: &WindowSpec, u: &[f64], v: &[f64]) -> Option<f64> {
    let comps = phantom.gaussian_components()?;
    let (s, amp_w, odd) = match *window {
        WindowSpec::Gaussian { sigma, amplitude } => (sigma, amplitude, false),
        WindowSpec::Hermite1 { sigma, amplitude } => (sigma, amplitude, true),
        _ => return None,
    };
    let mut total = 0.0;
    for c in comps {
        let s2 = c.sigma * c.sigma;
        let mut vv = 0.0;
        let mut dv = 0.0;
        let mut dd = 0.0;
        for k in 0..u.len() {
            let d = u[k] - c.center[k];
            vv += v[k] * v[k];
            dv += d * v[k];
            dd += d * d;
        }
        let alpha = vv / s2 + 1.0 / (s * s);
        let beta = dv / s2;
        let gamma = dd / s2;
        let base = c.amplitude * amp_w * (2.0 * PI / alpha).sqrt() * (-(gamma - beta * beta / alpha) / 2.0).exp();
        total += if odd { base * (-beta / alpha) } else { base };
    }
    Some(total)
}

/// [`analytic_wrt`] for a single Gaussian phantom `A·exp(-|x-c|²/(2σ²))` and
/// a Gaussian window of width `window_sigma`.
pub fn analytic_wrt_gaussian(center: &[f64], sigma: f64, amplitude: f64, window_sigma: f64, u: &[f64], v: &[f64]) -> f64 {
    analytic_wrt(
        &PhantomSpec::gaussian(center, sigma, amplitude),
        &WindowSpec::gaussian(window_sigma),
        u,
        v,
    )
    .expect("gaussian pair has a closed form")
}

/// `g(ρ, θ) = P_h f(ρθ, ρθ^⊥)` on a polar grid (n = 2), ρ-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarWRT {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub window: WindowSpec,
    pub values: Vec<Complex64>,
}

impl PolarWRT {
    pub fn get(&self, i_rho: usize, j_theta: usize) -> Complex64 {
        self.values[i_rho * self.theta.len() + j_theta]
    }
}

pub fn wrt_polar_perp(
    source: &FieldSource,
    window: &WindowSpec,
    rho: &[f64],
    theta: &[f64],
    quad: QuadratureParams,
) -> Result<PolarWRT> {
    window.validate()?;
    source.validate(2)?;
    if let Some(r) = rho.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(WrtError::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if theta.is_empty() || rho.is_empty() {
        return Err(WrtError::InvalidParameter("polar grid must be non-empty".into()));
    }
    let nt = theta.len();
    let values: Vec<Complex64> = (0..rho.len() * nt)
        .into_par_iter()
        .map(|idx| {
            let r = rho[idx / nt];
            let (s, c) = theta[idx % nt].sin_cos();
            line_integral(source, window, &[r * c, r * s], &[-r * s, r * c], quad)
        })
        .collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(WrtError::NonFinite("polar windowed ray transform".into()));
    }
    Ok(PolarWRT { rho: rho.to_vec(), theta: theta.to_vec(), window: window.clone(), values })
}

/// Largest `|FT_u P_h f(ξ, v) - f̂(ξ) ĥ(-ξ·v)|` over the sampled spectrum and
/// every v of the set, relative to `max |f̂|`.
pub fn fourier_identity_residual(data: &WRTData, phantom: &PhantomSpec, window: &WindowSpec) -> Result<f64> {
    if !matches!(data.vset, VSet::FullGrid { .. } | VSet::Polar { .. }) {
        return Err(WrtError::Unsupported(format!(
            "fourier identity needs a full-grid or polar v-set, got {}",
            data.vset.mode()
        )));
    }
    let probe = vec![0.0; data.u_grid.n()];
    if phantom.fourier(&probe).is_none() {
        return Err(WrtError::Unsupported("phantom has no closed-form transform".into()));
    }
    let per_v: Vec<(f64, f64)> = (0..data.nv())
        .into_par_iter()
        .map(|j| {
            let v = data.vset.vector(j);
            let spec = continuous_ft_complex(&data.u_grid, &data.column(j), 1);
            let mut worst: f64 = 0.0;
            let mut fmax: f64 = 0.0;
            let mut xi = vec![0.0; v.len()];
            for (flat, val) in spec.values.iter().enumerate() {
                spec.grid.point_into(flat, &mut xi);
                let fh = phantom.fourier(&xi).unwrap();
                let xv: f64 = xi.iter().zip(&v).map(|(a, b)| a * b).sum();
                let expected = fh * window.ft(-xv);
                worst = worst.max((val - expected).norm());
                fmax = fmax.max(fh.norm());
            }
            (worst, fmax)
        })
        .collect();
    let worst = per_v.iter().map(|p| p.0).fold(0.0, f64::max);
    let fmax = per_v.iter().map(|p| p.1).fold(0.0, f64::max);
    if fmax == 0.0 {
        return Ok(worst);
    }
    Ok(worst / fmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample_phantom};
    use crate::quadrature::integrate_adaptive;

    fn unit_gaussian() -> PhantomSpec {
        PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 1.0)
    }

    #[test]
    fn closed_form_examples() {
        let s2pi = (2.0 * PI).sqrt();
        let v = [0.6, -1.1];
        let vv = v[0] * v[0] + v[1] * v[1];
        let got = analytic_wrt_gaussian(&[0.0, 0.0], 1.0, 1.0, 1.0, &[0.0, 0.0], &v);
        assert!((got - s2pi / (vv + 1.0).sqrt()).abs() < 1e-14);

        assert_eq!(analytic_wrt_gaussian(&[0.0, 0.0], 1.0, 0.0, 1.0, &[0.3, 0.1], &v), 0.0);

        // u - c orthogonal to v.
        let d = [1.1, 0.6];
        let got = analytic_wrt_gaussian(&[0.0, 0.0], 1.0, 1.0, 1.0, &d, &v);
        let dd = d[0] * d[0] + d[1] * d[1];
        assert!((got - (-dd / 2.0f64).exp() * s2pi / (vv + 1.0).sqrt()).abs() < 1e-14);

        // v = 0: f(u) ∫ h.
        let got = analytic_wrt_gaussian(&[0.0, 0.0], 1.0, 1.0, 1.0, &d, &[0.0, 0.0]);
        assert!((got - (-dd / 2.0f64).exp() * s2pi).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_adaptive_quadrature() {
        let f = PhantomSpec::mixture(vec![(vec![0.4, -0.2], 0.7, 1.3), (vec![-1.0, 0.5], 0.4, -0.6)]);
        for w in [WindowSpec::gaussian(0.8), WindowSpec::hermite1(1.2)] {
            for (u, v) in [([0.1, 0.2], [1.0, 0.3]), ([-0.7, 1.4], [-0.2, 2.5]), ([2.0, -1.0], [0.05, 0.0])] {
                let oracle = integrate_adaptive(
                    |t| f.eval(&[u[0] + t * v[0], u[1] + t * v[1]]) * w.eval_real(t),
                    -30.0,
                    30.0,
                    1e-14,
                    1 << 14,
                );
                let got = analytic_wrt(&f, &w, &u, &v).unwrap();
                assert!((got - oracle).abs() < 1e-12, "{got} {oracle}");
            }
        }
    }

    #[test]
    fn zero_phantom_gives_zero_data() {
        let g = make_grid(2, &[8, 8], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = FieldSource::Phantom(PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 0.0));
        let d = windowed_ray_transform(
            &src,
            &WindowSpec::gaussian(1.0),
            &g,
            &VSet::polar_2d(4, 0.0, vec![0.5, 1.0]),
            QuadratureParams::default(),
        )
        .unwrap();
        assert!(d.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn quadrature_matches_oracle() {
        let g = make_grid(2, &[16, 16], &[8.0, 8.0], &[0.0, 0.0]).unwrap();
        let phantom = PhantomSpec::gaussian(&[0.3, -0.2], 0.8, 1.0);
        let w = WindowSpec::gaussian(1.0);
        let vset = VSet::polar_2d(8, 0.1, vec![0.1, 0.5, 1.0, 3.0]);
        let d = windowed_ray_transform(&FieldSource::Phantom(phantom.clone()), &w, &g, &vset, Default::default())
            .unwrap();
        let peak = d.max_abs();
        for i in 0..g.len() {
            for j in 0..vset.len() {
                let exact = analytic_wrt(&phantom, &w, &g.point(i), &vset.vector(j)).unwrap();
                let got = d.get(i, j).re;
                assert!((got - exact).abs() <= 1e-8 * exact.abs().max(1e-6 * peak), "{got} {exact}");
            }
        }
    }

    #[test]
    fn even_window_symmetric_in_v() {
        let src = FieldSource::Phantom(PhantomSpec::mixture(vec![(vec![0.5, 0.1], 0.6, 1.0), (vec![-0.4, 0.3], 0.3, 2.0)]));
        let w = WindowSpec::bump(1.5);
        for (u, v) in [([0.1, 0.0], [0.3, 0.7]), ([-0.5, 0.4], [1.3, -0.2])] {
            let a = line_integral(&src, &w, &u, &v, Default::default());
            let b = line_integral(&src, &w, &u, &[-v[0], -v[1]], Default::default());
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn perp_mode_matches_polar_helper() {
        let src = FieldSource::Phantom(PhantomSpec::mixture(vec![(vec![0.5, 0.1], 0.6, 1.0)]));
        let w = WindowSpec::gaussian(0.7);
        let g = make_grid(2, &[6, 6], &[3.0, 3.0], &[0.1, 0.0]).unwrap();
        let d = windowed_ray_transform(&src, &w, &g, &VSet::Perp, Default::default()).unwrap();
        for i in 0..g.len() {
            let u = g.point(i);
            let direct = line_integral(&src, &w, &u, &[-u[1], u[0]], Default::default());
            assert_eq!(d.get(i, 0), direct);
        }
    }

    #[test]
    fn polar_perp_radial_phantom_is_theta_independent() {
        let src = FieldSource::Phantom(PhantomSpec::smoothed_disk(&[0.0, 0.0], 1.0, 0.1, 1.0));
        let theta = crate::quadrature::uniform_angles(16, 0.0);
        let p = wrt_polar_perp(&src, &WindowSpec::bump(1.0), &[0.3, 0.8, 1.2], &theta, Default::default()).unwrap();
        let peak = p.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for i in 0..3 {
            let row: Vec<f64> = (0..16).map(|j| p.get(i, j).re).collect();
            let mean = row.iter().sum::<f64>() / 16.0;
            let sd = (row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 16.0).sqrt();
            assert!(sd <= 1e-9 * peak, "{sd}");
        }
        assert!(wrt_polar_perp(&src, &WindowSpec::bump(1.0), &[0.0], &theta, Default::default()).is_err());
    }

    #[test]
    fn polar_perp_matches_closed_form() {
        let f = PhantomSpec::gaussian(&[0.4, -0.3], 0.5, 1.0);
        let w = WindowSpec::gaussian(1.0);
        let theta = crate::quadrature::uniform_angles(8, 0.2);
        let rho = [0.2, 0.7, 1.5];
        let p = wrt_polar_perp(&FieldSource::Phantom(f.clone()), &w, &rho, &theta, Default::default()).unwrap();
        for (i, &r) in rho.iter().enumerate() {
            for (j, &t) in theta.iter().enumerate() {
                let u = [r * t.cos(), r * t.sin()];
                let exact = analytic_wrt(&f, &w, &u, &[-u[1], u[0]]).unwrap();
                assert!((p.get(i, j).re - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn analytic_signal_data_is_complex() {
        let g = make_grid(2, &[4, 4], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let d = windowed_ray_transform(
            &FieldSource::Phantom(unit_gaussian()),
            &WindowSpec::AnalyticSignal,
            &g,
            &VSet::polar_2d(4, 0.0, vec![1.0]),
            Default::default(),
        )
        .unwrap();
        assert_eq!(d.dtype(), "c128");
        assert!(d.values.iter().any(|v| v.im.abs() > 1e-3));
        // u = c, v = e₁: (1/2π)∫ e^{-t²/2} / (1 + it) dt is real by symmetry.
        let center = line_integral(
            &FieldSource::Phantom(unit_gaussian()),
            &WindowSpec::AnalyticSignal,
            &[0.0, 0.0],
            &[1.0, 0.0],
            QuadratureParams { panels: 64 },
        );
        let oracle = integrate_adaptive(|t| (-t * t / 2.0).exp() / (1.0 + t * t), -40.0, 40.0, 1e-14, 1 << 12) / (2.0 * PI);
        assert!((center.re - oracle).abs() < 1e-12 && center.im.abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_direction() {
        let g = make_grid(2, &[4, 4], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = FieldSource::Phantom(unit_gaussian());
        let w = WindowSpec::gaussian(1.0);
        let bad = VSet::Polar { directions: vec![vec![0.0, 0.0]], radii: vec![1.0] };
        assert!(matches!(windowed_ray_transform(&src, &w, &g, &bad, Default::default()), Err(WrtError::ZeroDirection)));
        let bad = VSet::polar_2d(4, 0.0, vec![0.0]);
        assert!(matches!(windowed_ray_transform(&src, &w, &g, &bad, Default::default()), Err(WrtError::ZeroDirection)));
    }

    #[test]
    fn sampled_field_close_to_phantom() {
        let phantom = PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 1.0);
        let fg = make_grid(2, &[128, 128], &[16.0, 16.0], &[0.0, 0.0]).unwrap();
        let sampled = FieldSource::Sampled(sample_phantom(&phantom, &fg).unwrap());
        let w = WindowSpec::gaussian(1.0);
        for (u, v) in [([0.2, 0.1], [0.5, 0.5]), ([-1.0, 0.7], [2.0, 0.1])] {
            let a = line_integral(&sampled, &w, &u, &v, QuadratureParams { panels: 64 }).re;
            let b = analytic_wrt(&phantom, &w, &u, &v).unwrap();
            assert!((a - b).abs() < 2e-4 * b.abs(), "{a} {b}");
        }
    }

    #[test]
    fn identity_residual_small_and_zero_for_zero() {
        let g = make_grid(2, &[64, 64], &[24.0, 24.0], &[0.0, 0.0]).unwrap();
        let f = PhantomSpec::gaussian(&[0.3, 0.0], 1.0, 1.0);
        let w = WindowSpec::gaussian(1.0);
        let vset = VSet::polar_2d(3, 0.2, vec![0.5, 1.5]);
        let d = windowed_ray_transform(&FieldSource::Phantom(f.clone()), &w, &g, &vset, Default::default()).unwrap();
        let r = fourier_identity_residual(&d, &f, &w).unwrap();
        assert!(r < 1e-3, "{r}");
        let zero = PhantomSpec::gaussian(&[0.3, 0.0], 1.0, 0.0);
        let dz = windowed_ray_transform(&FieldSource::Phantom(zero.clone()), &w, &g, &vset, Default::default()).unwrap();
        assert_eq!(fourier_identity_residual(&dz, &zero, &w).unwrap(), 0.0);
    }
}
