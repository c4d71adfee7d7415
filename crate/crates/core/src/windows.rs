//! Window functions `h`, their transforms `ĥ(η) = ∫ h(t) e^{-iηt} dt`, the
//! ramp-filtered window `I⁻¹h` (with transform `|η| ĥ(η)`), and the integral
//! constants used by the inversion formulas.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::quadrature::{integrate, integrate_adaptive, GaussLegendre};

/// Relative magnitude below which `h` or `ĥ` is treated as zero.
pub const DECAY_THRESHOLD: f64 = 1e-14;

fn one() -> f64 {
    1.0
}

/// The window `h`.
///
/// JSON form: `{"kind": "gaussian", "sigma": 1.0}`, `{"kind": "bump", "radius": 1.0}`,
/// `{"kind": "analytic-signal"}`. An optional `amplitude` (default 1) scales
/// the real kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowSpec {
    /// `A·exp(-t²/(2σ²))`.
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `A·t·exp(-t²/(2σ²))`, odd and admissible.
    Hermite1 {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `A·exp(1 - 1/(1 - (t/R)²))` on `|t| < R`, zero elsewhere.
    Bump {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `1 / (2πi(τ - i))`, the analytic-signal kernel. Forward only.
    AnalyticSignal,
}

/// Symmetry class of a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

/// Integral constants of a real window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    /// `∫ |h(t)|² dt`
    pub c_h2: f64,
    /// `∫₀^∞ |ĥ(η)|² dη`
    pub c_hat_half: f64,
    /// `∫ |ĥ(η)|² dη`
    pub c_hat_full: f64,
    /// `ĥ(0)`
    pub hat_at_zero: Complex64,
}

impl WindowSpec {
    pub fn gaussian(sigma: f64) -> Self {
        WindowSpec::Gaussian { sigma, amplitude: 1.0 }
    }

    pub fn hermite1(sigma: f64) -> Self {
        WindowSpec::Hermite1 { sigma, amplitude: 1.0 }
    }

    pub fn bump(radius: f64) -> Self {
        WindowSpec::Bump { radius, amplitude: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WindowSpec::Gaussian { .. } => "gaussian",
            WindowSpec::Hermite1 { .. } => "hermite1",
            WindowSpec::Bump { .. } => "bump",
            WindowSpec::AnalyticSignal => "analytic-signal",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, v, a) = match self {
            WindowSpec::Gaussian { sigma, amplitude } | WindowSpec::Hermite1 { sigma, amplitude } => {
                ("sigma", *sigma, *amplitude)
            }
            WindowSpec::Bump { radius, amplitude } => ("radius", *radius, *amplitude),
            WindowSpec::AnalyticSignal => return Ok(()),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(WrtError::InvalidWindow(format!("{name} must be positive, got {v}")));
        }
        if !a.is_finite() {
            return Err(WrtError::InvalidWindow(format!("amplitude must be finite, got {a}")));
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, WindowSpec::AnalyticSignal)
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, WindowSpec::Bump { .. })
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            WindowSpec::Gaussian { amplitude, .. }
            | WindowSpec::Hermite1 { amplitude, .. }
            | WindowSpec::Bump { amplitude, .. } => *amplitude,
            WindowSpec::AnalyticSignal => 1.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude() == 0.0
    }

    pub fn parity(&self) -> Parity {
        match self {
            WindowSpec::Gaussian { .. } | WindowSpec::Bump { .. } => Parity::Even,
            WindowSpec::Hermite1 { .. } => Parity::Odd,
            WindowSpec::AnalyticSignal => Parity::Neither,
        }
    }

    /// Fail unless the window may be used by an inversion routine.
    pub fn require_invertible(&self) -> Result<()> {
        self.validate()?;
        if !self.is_real() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        if self.is_zero() {
            return Err(WrtError::ZeroWindow);
        }
        Ok(())
    }

    /// `h(t)` for real kinds; `0` for the analytic-signal kernel (use [`eval`](Self::eval)).
    pub fn eval_real(&self, t: f64) -> f64 {
        match *self {
            WindowSpec::Gaussian { sigma, amplitude } => amplitude * (-t * t / (2.0 * sigma * sigma)).exp(),
            WindowSpec::Hermite1 { sigma, amplitude } => amplitude * t * (-t * t / (2.0 * sigma * sigma)).exp(),
            WindowSpec::Bump { radius, amplitude } => {
                let s = t / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
            WindowSpec::AnalyticSignal => 0.0,
        }
    }

    /// `h(t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            WindowSpec::AnalyticSignal => {
                // 1 / (2πi(t - i)) = 1 / (2π(1 + i t))
                Complex64::new(1.0, 0.0) / Complex64::new(2.0 * PI, 2.0 * PI * t)
            }
            _ => Complex64::new(self.eval_real(t), 0.0),
        }
    }

    /// `ĥ(η) = ∫ h(t) e^{-iηt} dt`.
    pub fn ft(&self, eta: f64) -> Complex64 {
        match *self {
            WindowSpec::Gaussian { sigma, amplitude } => {
                Complex64::new(amplitude * sigma * (2.0 * PI).sqrt() * (-sigma * sigma * eta * eta / 2.0).exp(), 0.0)
            }
            WindowSpec::Hermite1 { sigma, amplitude } => Complex64::new(
                0.0,
                -amplitude * (2.0 * PI).sqrt() * sigma.powi(3) * eta * (-sigma * sigma * eta * eta / 2.0).exp(),
            ),
            WindowSpec::Bump { radius, amplitude } => {
                if amplitude == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let panels = 48 + (eta.abs() * radius / 2.0).ceil() as usize;
                let v = 2.0 * integrate(|t| self.eval_real(t) * (eta * t).cos(), 0.0, radius, panels);
                Complex64::new(v, 0.0)
            }
            WindowSpec::AnalyticSignal => {
                if eta < 0.0 {
                    Complex64::new(eta.exp(), 0.0)
                } else if eta > 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.5, 0.0)
                }
            }
        }
    }

    /// Half-width `T` outside of which `|h| < 1e-14·max|h|`; `None` for the
    /// slowly decaying analytic-signal kernel.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            WindowSpec::Gaussian { sigma, .. } => Some(sigma * (2.0 * (1.0 / DECAY_THRESHOLD).ln()).sqrt()),
            WindowSpec::Hermite1 { sigma, .. } => {
                // max of s·e^{-s²/2} is e^{-1/2} at s = 1; solve s·e^{-s²/2} = 1e-14·e^{-1/2}.
                let target = DECAY_THRESHOLD * (-0.5f64).exp();
                let g = |s: f64| s * (-s * s / 2.0).exp() - target;
                let (mut lo, mut hi) = (1.0, 20.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(sigma * hi)
            }
            WindowSpec::Bump { radius, .. } => Some(radius),
            WindowSpec::AnalyticSignal => None,
        }
    }

    /// Frequency beyond which `|ĥ(η)| < 1e-14·max|ĥ|`.
    pub fn spectral_radius(&self) -> f64 {
        match *self {
            WindowSpec::Gaussian { sigma, .. } => (2.0 * (1.0 / DECAY_THRESHOLD).ln()).sqrt() / sigma,
            WindowSpec::Hermite1 { sigma, .. } => {
                // ĥ has the same profile as h with σ → 1/σ.
                WindowSpec::hermite1(1.0 / sigma).support_radius().unwrap()
            }
            WindowSpec::Bump { radius, .. } => bump_spectral_radius(radius),
            WindowSpec::AnalyticSignal => (1.0 / DECAY_THRESHOLD).ln(),
        }
    }

    /// Samples of `I⁻¹h(t) = (2π)⁻¹ ∫ |η| ĥ(η) e^{iηt} dη` for a real window.
    ///
    /// Uses `ĥ(-η) = conj ĥ(η)` to integrate over `η ≥ 0` only:
    /// `I⁻¹h(t) = π⁻¹ Re ∫₀^∞ η ĥ(η) e^{iηt} dη`, truncated where `|ĥ|`
    /// has decayed below 1e-14 of its maximum.
    pub fn riesz_filter(&self, t_grid: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if !self.is_real() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        if self.is_zero() {
            return Ok(vec![0.0; t_grid.len()]);
        }
        let eta_max = self.spectral_radius();
        let t_abs = t_grid.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let panels = 64.max((eta_max * t_abs / PI).ceil() as usize);
        let rule = GaussLegendre::sixteen();
        let (etas, weights) = crate::quadrature::composite_nodes(0.0, eta_max, panels, rule);
        let weighted: Vec<Complex64> = etas
            .iter()
            .zip(&weights)
            .map(|(&e, &w)| self.ft(e) * (e * w / PI))
            .collect();
        use rayon::prelude::*;
        Ok(t_grid
            .par_iter()
            .map(|&t| {
                etas.iter()
                    .zip(&weighted)
                    .map(|(&e, &c)| {
                        let (s, co) = (e * t).sin_cos();
                        c.re * co - c.im * s
                    })
                    .sum()
            })
            .collect())
    }

    /// Integral constants, cached per window.
    pub fn constants(&self) -> Result<WindowConstants> {
        self.validate()?;
        if !self.is_real() {
            return Err(WrtError::ForwardOnlyWindow);
        }
        if self.is_zero() {
            return Err(WrtError::ZeroWindow);
        }
        static CACHE: OnceLock<Mutex<HashMap<String, WindowConstants>>> = OnceLock::new();
        let key = serde_json::to_string(self)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().unwrap().get(&key) {
            return Ok(*c);
        }
        let c = self.compute_constants();
        cache.lock().unwrap().insert(key, c);
        Ok(c)
    }

    fn compute_constants(&self) -> WindowConstants {
        let a2 = self.amplitude() * self.amplitude();
        let (c_h2, c_hat_half) = match *self {
            WindowSpec::Gaussian { sigma, .. } => (a2 * sigma * PI.sqrt(), a2 * PI.powf(1.5) * sigma),
            WindowSpec::Hermite1 { sigma, .. } => (
                a2 * sigma.powi(3) * PI.sqrt() / 2.0,
                a2 * PI.powf(1.5) * sigma.powi(3) / 2.0,
            ),
            WindowSpec::Bump { radius, .. } => {
                let h2 = 2.0 * integrate_adaptive(|t| self.eval_real(t).powi(2), 0.0, radius, 1e-13, 1 << 12);
                let eta_max = self.spectral_radius();
                let hat = integrate_adaptive(|e| self.ft(e).norm_sqr(), 0.0, eta_max, 1e-11, 1 << 10);
                (h2, hat)
            }
            WindowSpec::AnalyticSignal => unreachable!("rejected before computing constants"),
        };
        WindowConstants {
            c_h2,
            c_hat_half,
            c_hat_full: 2.0 * c_hat_half,
            hat_at_zero: self.ft(0.0),
        }
    }
}

/// η beyond which the bump transform stays below 1e-14 of `ĥ(0)`.
fn bump_spectral_radius(radius: f64) -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    let unit = *CACHE.get_or_init(|| {
        let w = WindowSpec::bump(1.0);
        let h0 = w.ft(0.0).re;
        // The envelope decays like exp(-√(2η)); scan for the last crossing.
        let mut last = 1.0;
        let mut eta = 1.0;
        while eta < 4000.0 {
            let window_max = (0..8)
                .map(|k| w.ft(eta + k as f64 * 0.4).re.abs())
                .fold(0.0, f64::max);
            if window_max > DECAY_THRESHOLD * h0 {
                last = eta + 3.2;
            }
            eta += 3.2;
        }
        last
    });
    unit / radius
}
