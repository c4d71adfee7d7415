//! Filtered backprojection over the full `(t, v)` data:
//!
//! ```text
//! f(x) = C ∫_{S^{n-1}} ∫₀^∞ ∫_ℝ P_h f(x - rθt, rθ) I⁻¹h(t) dt (dr/r) dθ
//! ```
//!
//! Fourier transforming in x turns the inner integrals into
//! `f̂(ξ) |ĥ(ξ·v)|² |ξ·v|`; the r-integral is then `f̂(ξ) ∫₀^∞ |ĥ|²` for every
//! direction with `ξ·θ ≠ 0`, so `C = 1 / (|S^{n-1}| ∫₀^∞ |ĥ(η)|² dη)`.
//! No admissibility (`ĥ(0) = 0`) is needed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::fields::{Grid, PhantomSpec, ScalarField};
use crate::forward::{analytic_wrt, line_integral, FieldSource, QuadratureParams, VSet, WRTData};
use crate::interp::cubic_eval;
use crate::quadrature::{composite_nodes, GaussLegendre};
use crate::windows::WindowSpec;

/// Which normalisation multiplies the backprojected integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "alpha", rename_all = "kebab-case")]
pub enum ConstantMode {
    /// `π^{-(n+1)/2} Γ(n/2) / ∫|ĥ|²`, the published normalisation.
    Published,
    /// `1 / (|S^{n-1}| ∫₀^∞ |ĥ|²)`, obtained from the Fourier-domain computation.
    Derived,
    /// Raw integral times a fitted scalar.
    Calibrated(f64),
}

/// Area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / libm::tgamma(n as f64 / 2.0)
}

/// Published normalisation `π^{-(n+1)/2} Γ(n/2) (∫|ĥ|²)^{-1}`.
pub fn published_constant(n: usize, window: &WindowSpec) -> Result<f64> {
    let c = window.constants()?;
    Ok(PI.powf(-(n as f64 + 1.0) / 2.0) * libm::tgamma(n as f64 / 2.0) / c.c_hat_full)
}

/// Normalisation under the crate's Fourier convention.
pub fn derived_constant(n: usize, window: &WindowSpec) -> Result<f64> {
    let c = window.constants()?;
    Ok(1.0 / (sphere_area(n) * c.c_hat_half))
}

pub fn constant_for(mode: ConstantMode, n: usize, window: &WindowSpec) -> Result<f64> {
    match mode {
        ConstantMode::Published => published_constant(n, window),
        ConstantMode::Derived => derived_constant(n, window),
        ConstantMode::Calibrated(alpha) => Ok(alpha),
    }
}

/// Quadrature settings for the backprojection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BPParams {
    pub r_min: f64,
    pub r_max: f64,
    /// Log-uniform radii in `[r_min, r_max]`.
    pub n_radii: usize,
    /// Directions on `S^{n-1}` (n = 2: uniform angles; n = 3: rounded to a product rule).
    pub n_directions: usize,
    /// Trapezoid step of the t-integral.
    pub dt: f64,
    pub constant_mode: ConstantMode,
}

impl Default for BPParams {
    fn default() -> Self {
        Self {
            r_min: 0.05,
            r_max: 16.0,
            n_radii: 36,
            n_directions: 8,
            dt: 0.25,
            constant_mode: ConstantMode::Derived,
        }
    }
}

impl BPParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(WrtError::InvalidParameter(format!(
                "need 0 < r_min < r_max, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        if self.n_directions < 4 {
            return Err(WrtError::InvalidParameter("at least 4 directions are required".into()));
        }
        if self.n_radii < 2 {
            return Err(WrtError::InvalidParameter("at least 2 radii are required".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(WrtError::InvalidParameter("dt must be positive".into()));
        }
        Ok(())
    }
}

/// Quadrature nodes in v-space: `v = r_k θ_j`, flattened as `j·R + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BpNodes {
    pub directions: Vec<Vec<f64>>,
    pub direction_weights: Vec<f64>,
    pub radii: Vec<f64>,
    /// Weights for `∫ q(r) dr/r`, including the end corrections.
    pub radius_weights: Vec<f64>,
}

impl BpNodes {
    pub fn from_params(n: usize, p: &BPParams) -> Result<Self> {
        p.validate()?;
        let (directions, direction_weights) = sphere_rule(n, p.n_directions)?;
        let radii = crate::quadrature::log_uniform(p.r_min, p.r_max, p.n_radii);
        Ok(Self { directions, direction_weights, radius_weights: log_radius_weights(&radii), radii })
    }

    /// Nodes taken from a polar v-set; directions are weighted equally.
    pub fn from_vset(n: usize, vset: &VSet) -> Result<Self> {
        let VSet::Polar { directions, radii } = vset else {
            return Err(WrtError::Unsupported(format!("backprojection needs polar data, got {}", vset.mode())));
        };
        vset.validate(n)?;
        if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WrtError::InvalidParameter("polar radii must be increasing with at least 2 entries".into()));
        }
        let w = sphere_area(n) / directions.len() as f64;
        Ok(Self {
            directions: directions.clone(),
            direction_weights: vec![w; directions.len()],
            radius_weights: log_radius_weights(radii),
            radii: radii.clone(),
        })
    }

    pub fn vset(&self) -> VSet {
        VSet::Polar { directions: self.directions.clone(), radii: self.radii.clone() }
    }
}

/// Trapezoid weights in `ln r`, plus unit weight at each end: near `r = 0`
/// the filtered integral grows linearly in r and for large r it decays like
/// `1/r`, so both truncated tails of `∫ q dr/r` equal the end value.
pub fn log_radius_weights(radii: &[f64]) -> Vec<f64> {
    let m = radii.len();
    let mut w = vec![0.0; m];
    for k in 0..m - 1 {
        let h = (radii[k + 1] / radii[k]).ln();
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w[0] += 1.0;
    w[m - 1] += 1.0;
    w
}

/// Direction nodes and weights summing to `|S^{n-1}|`.
pub fn sphere_rule(n: usize, count: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match n {
        1 => Ok((vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0])),
        2 => {
            let dirs = crate::quadrature::uniform_angles(count, 0.0)
                .into_iter()
                .map(|a| vec![a.cos(), a.sin()])
                .collect();
            Ok((dirs, vec![2.0 * PI / count as f64; count]))
        }
        3 => {
            // Gauss–Legendre in cos(polar angle) × uniform azimuth.
            let m = ((count as f64 / 2.0).sqrt().round() as usize).max(2);
            let rule = GaussLegendre::new(m);
            let naz = 2 * m;
            let mut dirs = Vec::with_capacity(m * naz);
            let mut weights = Vec::with_capacity(m * naz);
            for (z, wz) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - z * z).sqrt();
                for a in crate::quadrature::uniform_angles(naz, 0.0) {
                    dirs.push(vec![s * a.cos(), s * a.sin(), *z]);
                    weights.push(wz * 2.0 * PI / naz as f64);
                }
            }
            Ok((dirs, weights))
        }
        _ => Err(WrtError::Unsupported(format!("direction rule for n = {n}"))),
    }
}

/// Values of `P_h f(u, v)` at arbitrary u for the backprojection's v-nodes.
pub trait RaySource: Sync {
    fn dim(&self) -> usize;
    /// `P_h f(u, v)`; `node` is the flat v-node index of `v`.
    fn eval(&self, u: &[f64], v: &[f64], node: usize) -> f64;
    /// t-range outside of which `P_h f(x - vt, v)` vanishes, if known.
    fn t_interval(&self, x: &[f64], v: &[f64]) -> Option<(f64, f64)>;
}

fn phantom_t_interval(phantom: &PhantomSpec, window: &WindowSpec, x: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    // f(x - vt + sv) ≠ 0 needs s - t ∈ [τ₀, τ₁]; |s| ≤ T.
    let (t0, t1) = phantom.line_interval(x, v)?;
    let t = window.support_radius()?;
    Some((-t - t1, t - t0))
}

/// Closed-form Gaussian data evaluated on demand.
pub struct ClosedFormRays {
    pub phantom: PhantomSpec,
    pub window: WindowSpec,
}

impl ClosedFormRays {
    pub fn new(phantom: PhantomSpec, window: WindowSpec) -> Result<Self> {
        let n = phantom.dim().unwrap_or(2);
        phantom.validate(n)?;
        if analytic_wrt(&phantom, &window, &vec![0.0; n], &vec![1.0; n]).is_none() {
            return Err(WrtError::Unsupported(format!(
                "no closed form for this phantom with a {} window",
                window.name()
            )));
        }
        Ok(Self { phantom, window })
    }
}

impl RaySource for ClosedFormRays {
    fn dim(&self) -> usize {
        self.phantom.dim().unwrap_or(2)
    }

    fn eval(&self, u: &[f64], v: &[f64], _node: usize) -> f64 {
        analytic_wrt(&self.phantom, &self.window, u, v).unwrap_or(0.0)
    }

    fn t_interval(&self, x: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        phantom_t_interval(&self.phantom, &self.window, x, v)
    }
}

/// Forward quadrature evaluated on demand for each requested (u, v).
pub struct QuadratureRays {
    pub source: FieldSource,
    pub window: WindowSpec,
    pub quad: QuadratureParams,
}

impl RaySource for QuadratureRays {
    fn dim(&self) -> usize {
        self.source.dim().unwrap_or(2)
    }

    fn eval(&self, u: &[f64], v: &[f64], _node: usize) -> f64 {
        line_integral(&self.source, &self.window, u, v, self.quad).re
    }

    fn t_interval(&self, x: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        match &self.source {
            FieldSource::Phantom(p) => phantom_t_interval(p, &self.window, x, v),
            FieldSource::Sampled(_) => {
                let (t0, t1) = self.source.line_interval(x, v)?;
                let t = self.window.support_radius()?;
                Some((-t - t1, t - t0))
            }
        }
    }
}

/// Stored polar data, cubic in u and exact at the stored v-nodes.
/// Largest boundary value of stored data, relative to its peak, that
/// [`GridRays`] accepts.
pub const EDGE_LIMIT: f64 = 1e-3;

pub struct GridRays<'a> {
    data: &'a WRTData,
}

impl<'a> GridRays<'a> {
    /// Wrap polar data. Samples outside the u-grid are treated as zero, so
    /// every v-column must have decayed at the grid boundary.
    pub fn new(data: &'a WRTData) -> Result<Self> {
        if !matches!(data.vset, VSet::Polar { .. }) {
            return Err(WrtError::Unsupported(format!(
                "backprojection needs polar data, got {}",
                data.vset.mode()
            )));
        }
        if data.is_complex() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        let peak = data.max_abs();
        let g = &data.u_grid;
        let nv = data.nv();
        let mut edge: f64 = 0.0;
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            if idx.iter().zip(&g.shape).any(|(&i, &s)| i == 0 || i + 1 == s) {
                for j in 0..nv {
                    edge = edge.max(data.values[flat * nv + j].norm());
                }
            }
        }
        if peak > 0.0 && edge > EDGE_LIMIT * peak {
            return Err(WrtError::Coverage(format!(
                "data reaches {:.2e} of its peak on the u-grid boundary; enlarge the u-grid",
                edge / peak
            )));
        }
        if peak > 0.0 && edge > 1e-6 * peak {
            log::warn!("polar data reaches {:.2e} of its peak on the u-grid boundary", edge / peak);
        }
        Ok(Self { data })
    }
}

impl RaySource for GridRays<'_> {
    fn dim(&self) -> usize {
        self.data.u_grid.n()
    }

    fn eval(&self, u: &[f64], _v: &[f64], node: usize) -> f64 {
        let nv = self.data.nv();
        cubic_eval(&self.data.u_grid, u, |i| self.data.values[i * nv + node].re)
    }

    fn t_interval(&self, x: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        // x - vt inside the (slightly enlarged) u-grid box.
        let g = &self.data.u_grid;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..g.n() {
            let a = g.origin[k] - 2.0 * g.spacing[k];
            let b = g.origin[k] + (g.shape[k] as f64 + 1.0) * g.spacing[k];
            if v[k] == 0.0 {
                if x[k] <= a || x[k] >= b {
                    return None;
                }
            } else {
                let (t0, t1) = ((x[k] - a) / v[k], (x[k] - b) / v[k]);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// Backprojection of `source` onto `grid` over the given v-nodes.
pub fn reconstruct_t1_nodes<S: RaySource + ?Sized>(
    source: &S,
    window: &WindowSpec,
    grid: &Grid,
    nodes: &BpNodes,
    dt: f64,
    constant_mode: ConstantMode,
) -> Result<ScalarField> {
    window.require_invertible()?;
    let n = grid.n();
    if source.dim() != n {
        return Err(WrtError::DimensionMismatch { expected: n, got: source.dim() });
    }
    let constant = constant_for(constant_mode, n, window)?;

    // Largest |t| any node can need, to size the filter table.
    let mut t_max: f64 = 0.0;
    let corners: Vec<Vec<f64>> = (0..(1usize << n))
        .map(|mask| {
            (0..n)
                .map(|k| {
                    if mask >> k & 1 == 1 {
                        grid.origin[k] + (grid.shape[k] - 1) as f64 * grid.spacing[k]
                    } else {
                        grid.origin[k]
                    }
                })
                .collect()
        })
        .collect();
    for d in &nodes.directions {
        for &r in &nodes.radii {
            let v: Vec<f64> = d.iter().map(|c| c * r).collect();
            for x in &corners {
                if let Some((a, b)) = source.t_interval(x, &v) {
                    t_max = t_max.max(a.abs()).max(b.abs());
                }
            }
        }
    }
    if !t_max.is_finite() {
        return Err(WrtError::Coverage("unbounded t-range; data support unknown".into()));
    }
    let half = (t_max / dt).ceil() as i64 + 1;
    let ts: Vec<f64> = (-half..=half).map(|m| m as f64 * dt).collect();
    let filter = window.riesz_filter(&ts)?;

    let vs: Vec<(usize, Vec<f64>, f64)> = nodes
        .directions
        .iter()
        .enumerate()
        .flat_map(|(j, d)| {
            nodes.radii.iter().enumerate().map(move |(k, &r)| {
                (
                    j * nodes.radii.len() + k,
                    d.iter().map(|c| c * r).collect::<Vec<f64>>(),
                    nodes.direction_weights[j] * nodes.radius_weights[k],
                )
            })
        })
        .collect();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let x = grid.point(flat);
            let mut u = vec![0.0; n];
            let mut total = 0.0;
            for (node, v, weight) in &vs {
                let Some((a, b)) = source.t_interval(&x, v) else { continue };
                let m0 = ((a / dt).floor() as i64).max(-half);
                let m1 = ((b / dt).ceil() as i64).min(half);
                let mut acc = 0.0;
                for m in m0..=m1 {
                    let t = m as f64 * dt;
                    for k in 0..n {
                        u[k] = x[k] - v[k] * t;
                    }
                    let p = source.eval(&u, v, *node);
                    if p != 0.0 {
                        acc += p * filter[(m + half) as usize];
                    }
                }
                total += weight * acc * dt;
            }
            constant * total
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(WrtError::NonFinite("backprojection".into()));
    }
    ScalarField::new(grid.clone(), values)
}

/// Backprojection with nodes built from `params`, reading rays from `source`.
pub fn reconstruct_t1<S: RaySource + ?Sized>(
    source: &S,
    window: &WindowSpec,
    grid: &Grid,
    params: &BPParams,
) -> Result<ScalarField> {
    window.require_invertible()?;
    let nodes = BpNodes::from_params(grid.n(), params)?;
    reconstruct_t1_nodes(source, window, grid, &nodes, params.dt, params.constant_mode)
}

/// Backprojection of stored polar data, using its own v-nodes.
pub fn reconstruct_t1_data(data: &WRTData, grid: &Grid, dt: f64, constant_mode: ConstantMode) -> Result<ScalarField> {
    data.window.require_invertible()?;
    let nodes = BpNodes::from_vset(grid.n(), &data.vset)?;
    let rays = GridRays::new(data)?;
    reconstruct_t1_nodes(&rays, &data.window, grid, &nodes, dt, constant_mode)
}

/// Result of the Fourier-side check of the backprojection kernel.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyCheck {
    /// `∫ |ĥ(ξ·v)|² |ξ·v| |v|^{-n} dv` for each sample ξ.
    pub integrals: Vec<f64>,
    /// Mean integral divided by `∫|h|²`.
    pub fitted_c: f64,
    /// Largest relative deviation of an integral from the mean.
    pub max_deviation: f64,
}

/// Evaluate `∫ |ĥ(ξ·v)|² |ξ·v| |v|^{-n} dv` in polar form for each ξ and report
/// how far the values are from being ξ-independent.
///
/// `n_directions` directions on the sphere; the radial integral uses a
/// composite Gauss rule in `ln r` over `[r_lo, r_hi]`.
pub fn t1_frequency_check(
    window: &WindowSpec,
    xis: &[Vec<f64>],
    n_directions: usize,
    r_lo: f64,
    r_hi: f64,
) -> Result<FrequencyCheck> {
    window.require_invertible()?;
    if xis.is_empty() {
        return Err(WrtError::InvalidParameter("no frequency samples".into()));
    }
    let n = xis[0].len();
    // Half-step rotation keeps nodes off the measure-zero set ξ·θ = 0.
    let (dirs, dw) = if n == 2 {
        let dirs = crate::quadrature::uniform_angles(n_directions, PI / n_directions as f64)
            .into_iter()
            .map(|a| vec![a.cos(), a.sin()])
            .collect();
        (dirs, vec![2.0 * PI / n_directions as f64; n_directions])
    } else {
        sphere_rule(n, n_directions)?
    };
    let (ss, sw) = composite_nodes(r_lo.ln(), r_hi.ln(), 400, GaussLegendre::sixteen());
    let integrals: Vec<f64> = xis
        .iter()
        .map(|xi| {
            dirs.iter()
                .zip(&dw)
                .map(|(d, w)| {
                    let a: f64 = d.iter().zip(xi).map(|(p, q)| p * q).sum();
                    let radial: f64 = ss
                        .iter()
                        .zip(&sw)
                        .map(|(&s, &ws)| {
                            let r = s.exp();
                            window.ft(r * a).norm_sqr() * a.abs() * r * ws
                        })
                        .sum();
                    w * radial
                })
                .sum()
        })
        .collect();
    let mean = integrals.iter().sum::<f64>() / integrals.len() as f64;
    let max_deviation = integrals.iter().map(|v| (v - mean).abs() / mean.abs()).fold(0.0, f64::max);
    Ok(FrequencyCheck { fitted_c: mean / window.constants()?.c_h2, integrals, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, rel_l2_error, sample_phantom};
    use crate::forward::windowed_ray_transform;

    #[test]
    fn constants_n2() {
        let w = WindowSpec::gaussian(1.0);
        let c = w.constants().unwrap();
        let published = published_constant(2, &w).unwrap();
        assert!((published * c.c_hat_full - PI.powf(-1.5)).abs() < 1e-15);
        let ratio = derived_constant(2, &w).unwrap() / published;
        assert!((ratio - PI.sqrt()).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_rules_integrate_constants_and_quadratics() {
        for n in [2, 3] {
            let (d, w) = sphere_rule(n, 32).unwrap();
            assert!((w.iter().sum::<f64>() - sphere_area(n)).abs() < 1e-12);
            // ∫ θ₁² dθ = |S^{n-1}| / n
            let q: f64 = d.iter().zip(&w).map(|(p, w)| p[0] * p[0] * w).sum();
            assert!((q - sphere_area(n) / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn log_weights_cover_interval() {
        let r = crate::quadrature::log_uniform(0.1, 10.0, 11);
        let w = log_radius_weights(&r);
        assert!((w.iter().sum::<f64>() - (100f64.ln() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn frequency_check_isotropy_and_scaling() {
        for w in [WindowSpec::gaussian(1.0), WindowSpec::hermite1(1.0)] {
            let xis = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]];
            let iso = t1_frequency_check(&w, &xis, 64, 1e-8, 1e8).unwrap();
            assert!(iso.max_deviation < 1e-6, "{:?}", iso);
            let scaled = t1_frequency_check(&w, &[vec![0.3, 0.4], vec![0.6, 0.8]], 64, 1e-8, 1e8).unwrap();
            assert!(scaled.max_deviation < 1e-4);
            // Integral equals |S¹| ∫₀^∞|ĥ|² = 2π · π ∫|h|² under e^{-iξx}.
            assert!((iso.fitted_c - 2.0 * PI * PI).abs() < 1e-6 * 2.0 * PI * PI, "{}", iso.fitted_c);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = make_grid(2, &[8, 8], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = ClosedFormRays::new(PhantomSpec::gaussian(&[0.0, 0.0], 0.5, 0.0), WindowSpec::gaussian(1.0)).unwrap();
        let p = BPParams { n_radii: 8, ..Default::default() };
        let f = reconstruct_t1(&src, &WindowSpec::gaussian(1.0), &g, &p).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_forward_only_and_zero_windows() {
        let g = make_grid(2, &[8, 8], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = ClosedFormRays::new(PhantomSpec::gaussian(&[0.0, 0.0], 0.5, 1.0), WindowSpec::gaussian(1.0)).unwrap();
        let p = BPParams::default();
        assert!(matches!(
            reconstruct_t1(&src, &WindowSpec::AnalyticSignal, &g, &p),
            Err(WrtError::ForwardOnlyWindow)
        ));
        let zero = WindowSpec::Gaussian { sigma: 1.0, amplitude: 0.0 };
        assert!(matches!(reconstruct_t1(&src, &zero, &g, &p), Err(WrtError::ZeroWindow)));
        assert!(reconstruct_t1(&src, &WindowSpec::gaussian(1.0), &g, &BPParams { n_directions: 2, ..p }).is_err());
    }

    #[test]
    fn coarse_reconstruction_close_with_derived_constant() {
        let phantom = PhantomSpec::gaussian(&[0.2, -0.1], 0.5, 1.0);
        let w = WindowSpec::gaussian(1.0);
        let g = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let src = ClosedFormRays::new(phantom.clone(), w.clone()).unwrap();
        let rec = reconstruct_t1(&src, &w, &g, &BPParams::default()).unwrap();
        let truth = sample_phantom(&phantom, &g).unwrap();
        let err = rel_l2_error(&rec, &truth).unwrap();
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn grid_data_matches_on_demand_source() {
        let phantom = PhantomSpec::gaussian(&[0.0, 0.0], 0.5, 1.0);
        let w = WindowSpec::gaussian(1.0);
        let g = make_grid(2, &[6, 6], &[2.0, 2.0], &[0.0, 0.0]).unwrap();
        let params = BPParams { r_min: 0.3, r_max: 2.0, n_radii: 6, n_directions: 4, ..Default::default() };
        let nodes = BpNodes::from_params(2, &params).unwrap();
        let ug = make_grid(2, &[160, 160], &[40.0, 40.0], &[0.0, 0.0]).unwrap();
        let data = windowed_ray_transform(&FieldSource::Phantom(phantom.clone()), &w, &ug, &nodes.vset(), Default::default())
            .unwrap();
        let a = reconstruct_t1_data(&data, &g, 0.25, ConstantMode::Derived).unwrap();
        let b = reconstruct_t1_nodes(&ClosedFormRays::new(phantom, w.clone()).unwrap(), &w, &g, &nodes, 0.25, ConstantMode::Derived)
            .unwrap();
        assert!(rel_l2_error(&a, &b).unwrap() < 0.02, "{}", rel_l2_error(&a, &b).unwrap());

        let small = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let cut = windowed_ray_transform(
            &FieldSource::Phantom(PhantomSpec::gaussian(&[0.0, 0.0], 0.5, 1.0)),
            &w,
            &small,
            &nodes.vset(),
            Default::default(),
        )
        .unwrap();
        assert!(matches!(GridRays::new(&cut), Err(WrtError::Coverage(_))));
    }
}
