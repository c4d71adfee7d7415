//! Empirical normalisation of the backprojection and polar-Fourier
//! inversions: reconstruct with unit constant, fit `α = ⟨f_rec, f_ref⟩/‖f_rec‖²`
//! against closed-form phantoms, and compare `α` with the published and
//! derived constants.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};
use crate::fields::{least_squares_scale, rel_l2_error, sample_phantom, Grid, PhantomSpec};
use crate::forward::{FieldSource, QuadratureParams};
use crate::invert_bp::{self, BPParams, ClosedFormRays, ConstantMode, QuadratureRays, RaySource};
use crate::invert_fourier::{self, T2Params};
use crate::windows::WindowSpec;

/// Coefficient of variation above which a calibration is rejected.
pub const CV_LIMIT: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    T1,
    T2,
}

impl std::str::FromStr for Method {
    type Err = WrtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t1" => Ok(Method::T1),
            "t2" => Ok(Method::T2),
            _ => Err(WrtError::InvalidParameter(format!("calibration method must be t1 or t2, got '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomFit {
    pub phantom: PhantomSpec,
    pub alpha: f64,
    /// rel-L2 error after scaling by this phantom's own α.
    pub rel_l2_own: f64,
    /// rel-L2 error after scaling by the mean α.
    pub rel_l2_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub method: Method,
    pub window: WindowSpec,
    pub fitted_alpha: f64,
    pub published_constant: f64,
    pub derived_constant: f64,
    /// `fitted_alpha / published_constant`.
    pub ratio: f64,
    /// `fitted_alpha / derived_constant`.
    pub ratio_derived: f64,
    pub per_phantom: Vec<PhantomFit>,
    /// Coefficient of variation of the per-phantom α (equal to that of the ratio).
    pub cv: f64,
}

/// Closed-form data where available, quadrature otherwise.
pub fn ray_source(phantom: &PhantomSpec, window: &WindowSpec) -> Result<Box<dyn RaySource>> {
    match ClosedFormRays::new(phantom.clone(), window.clone()) {
        Ok(src) => Ok(Box::new(src)),
        Err(WrtError::Unsupported(_)) => Ok(Box::new(QuadratureRays {
            source: FieldSource::Phantom(phantom.clone()),
            window: window.clone(),
            quad: QuadratureParams::default(),
        })),
        Err(e) => Err(e),
    }
}

/// Three well-separated Gaussian phantoms inside `[-4, 4]²`.
pub fn default_phantoms() -> Vec<PhantomSpec> {
    vec![
        PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0),
        PhantomSpec::gaussian(&[-0.8, 0.6], 0.7, 0.8),
        PhantomSpec::mixture(vec![(vec![0.9, 0.4], 0.45, 1.0), (vec![-0.5, -0.9], 0.6, 0.6)]),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSetup {
    pub bp: BPParams,
    pub t2: T2Params,
}

impl Default for CalibrationSetup {
    fn default() -> Self {
        Self { bp: BPParams::default(), t2: T2Params::default() }
    }
}

/// Reconstruct `phantom` with the constant fixed by `mode`.
pub fn reconstruct(
    method: Method,
    phantom: &PhantomSpec,
    window: &WindowSpec,
    grid: &Grid,
    setup: &CalibrationSetup,
    mode: ConstantMode,
) -> Result<crate::fields::ScalarField> {
    let source = ray_source(phantom, window)?;
    match method {
        Method::T1 => {
            let params = BPParams { constant_mode: mode, ..setup.bp.clone() };
            invert_bp::reconstruct_t1(source.as_ref(), window, grid, &params)
        }
        Method::T2 => {
            let params = T2Params { constant_mode: mode, ..setup.t2.clone() };
            let radius = phantom.support_radius();
            invert_fourier::reconstruct_t2_from_source(source.as_ref(), window, radius, grid, &params).map(|r| r.0)
        }
    }
}

pub fn calibrate(
    method: Method,
    window: &WindowSpec,
    phantoms: &[PhantomSpec],
    grid: &Grid,
    setup: &CalibrationSetup,
) -> Result<CalibrationReport> {
    if phantoms.len() < 3 {
        return Err(WrtError::InvalidParameter(format!("calibration needs at least 3 phantoms, got {}", phantoms.len())));
    }
    window.require_invertible()?;
    let n = grid.n();
    let mut raw = Vec::new();
    for p in phantoms {
        let rec = reconstruct(method, p, window, grid, setup, ConstantMode::Calibrated(1.0))?;
        let truth = sample_phantom(p, grid)?;
        if truth.max_abs() == 0.0 {
            return Err(WrtError::DegenerateCalibration("phantom is identically zero".into()));
        }
        let alpha = least_squares_scale(&rec, &truth)?;
        raw.push((p.clone(), rec, truth, alpha));
    }
    let alphas: Vec<f64> = raw.iter().map(|r| r.3).collect();
    let mean = alphas.iter().sum::<f64>() / alphas.len() as f64;
    let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / alphas.len() as f64;
    let cv = var.sqrt() / mean.abs();
    let per_phantom = raw
        .iter()
        .map(|(p, rec, truth, a)| {
            Ok(PhantomFit {
                phantom: p.clone(),
                alpha: *a,
                rel_l2_own: rel_l2_error(&rec.scaled(*a), truth)?,
                rel_l2_mean: rel_l2_error(&rec.scaled(mean), truth)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (published, derived) = match method {
        Method::T1 => (invert_bp::published_constant(n, window)?, invert_bp::derived_constant(n, window)?),
        Method::T2 => (invert_fourier::published_constant(n, window)?, invert_fourier::derived_constant(n, window)?),
    };
    if cv > CV_LIMIT {
        return Err(WrtError::CalibrationUnstable { cv, limit: CV_LIMIT });
    }
    Ok(CalibrationReport {
        method,
        window: window.clone(),
        fitted_alpha: mean,
        published_constant: published,
        derived_constant: derived,
        ratio: mean / published,
        ratio_derived: mean / derived,
        per_phantom,
        cv,
    })
}
