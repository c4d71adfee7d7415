//! Uniform grids, real and spectral fields, closed-form phantoms, and the
//! continuous Fourier transform approximation every other module relies on.
//!
//! The Fourier convention is fixed crate-wide:
//!
//! ```text
//! f̂(ξ) = ∫ f(x) e^{-iξ·x} dx,        f(x) = (2π)^{-n} ∫ f̂(ξ) e^{iξ·x} dξ
//! ```
//!
//! Spectral fields are stored in centred order: along each axis the frequency
//! index runs from `-⌊M/2⌋` to `⌈M/2⌉ - 1`, so a [`SpectralField`] grid is an
//! ordinary uniform [`Grid`] in ξ.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrtError};

/// Uniform sampling of a box in ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if n == 0 {
            return Err(WrtError::InvalidGrid("dimension must be positive".into()));
        }
        if origin.len() != n || spacing.len() != n {
            return Err(WrtError::InvalidGrid(format!(
                "shape/origin/spacing lengths differ: {}/{}/{}",
                n,
                origin.len(),
                spacing.len()
            )));
        }
        if let Some(s) = shape.iter().find(|&&s| s < 2) {
            return Err(WrtError::InvalidGrid(format!("axis with {s} samples; need at least 2")));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(WrtError::InvalidGrid(format!("spacing must be positive: {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(WrtError::InvalidGrid(format!("origin must be finite: {origin:?}")));
        }
        Ok(Self { shape, origin, spacing })
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Vec<f64> {
        self.shape.iter().zip(&self.spacing).map(|(&s, &h)| s as f64 * h).collect()
    }

    /// Product of spacings (cell volume).
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    /// Coordinates of every sample along `axis`.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Fractional index of physical coordinate `x` along `axis`.
    pub fn fractional_index(&self, axis: usize, x: f64) -> f64 {
        (x - self.origin[axis]) / self.spacing[axis]
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.n()];
        for k in (0..self.n().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    /// Physical coordinates of the sample with row-major index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n()];
        self.point_into(flat, &mut p);
        p
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for k in (0..self.n()).rev() {
            let i = flat % self.shape[k];
            flat /= self.shape[k];
            out[k] = self.coord(k, i);
        }
    }

    /// Half-length of the grid's diagonal measured from its centre.
    pub fn half_diagonal(&self) -> f64 {
        self.extent().iter().map(|e| 0.25 * e * e).sum::<f64>().sqrt()
    }

    /// Centre of the sampled box.
    pub fn center(&self) -> Vec<f64> {
        (0..self.n())
            .map(|k| self.origin[k] + 0.5 * self.shape[k] as f64 * self.spacing[k])
            .collect()
    }

    /// True when both grids describe the same samples up to `rel_tol`.
    pub fn approx_eq(&self, other: &Grid, rel_tol: f64) -> bool {
        if self.shape != other.shape {
            return false;
        }
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= rel_tol * scale.max(1e-300);
        self.spacing
            .iter()
            .zip(&other.spacing)
            .all(|(&a, &b)| close(a, b, a.abs()))
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .zip(&self.spacing)
                .all(|((&a, &b), &h)| close(a, b, h))
    }
}

/// Grid of `shape` samples covering `extent` per axis, centred on `center`.
///
/// Spacing is `extent / shape`; the first sample sits at `center - extent/2`.
pub fn make_grid(n: usize, shape: &[usize], extent: &[f64], center: &[f64]) -> Result<Grid> {
    if shape.len() != n || extent.len() != n || center.len() != n {
        return Err(WrtError::InvalidGrid(format!(
            "expected {n} entries for shape/extent/center, got {}/{}/{}",
            shape.len(),
            extent.len(),
            center.len()
        )));
    }
    if let Some(e) = extent.iter().find(|&&e| !(e.is_finite() && e > 0.0)) {
        return Err(WrtError::InvalidGrid(format!("extent must be positive, got {e}")));
    }
    let spacing: Vec<f64> = extent.iter().zip(shape).map(|(&e, &s)| e / s as f64).collect();
    let origin = center.iter().zip(extent).map(|(&c, &e)| c - 0.5 * e).collect();
    Grid::new(shape.to_vec(), origin, spacing)
}

/// Real samples on a grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(WrtError::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WrtError::NonFinite("scalar field values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, alpha: f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }

    /// Largest absolute value on the boundary faces of the grid.
    pub fn boundary_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for flat in 0..self.values.len() {
            let idx = self.grid.multi_index(flat);
            let on_edge = idx
                .iter()
                .zip(&self.grid.shape)
                .any(|(&i, &s)| i == 0 || i + 1 == s);
            if on_edge {
                m = m.max(self.values[flat].abs());
            }
        }
        m
    }
}

/// Tag for the single Fourier convention used throughout the crate.
pub const CONVENTION: &str = "e-minus";

/// Complex frequency-domain samples in centred order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(WrtError::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn convention(&self) -> &'static str {
        CONVENTION
    }

    /// Flat index of the sample at `-ξ` for the sample at `flat`, if present.
    pub fn mirror_index(&self, flat: usize) -> Option<usize> {
        let idx = self.grid.multi_index(flat);
        let mut mirror = Vec::with_capacity(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let m = self.grid.shape[k];
            let zero = m / 2;
            let signed = i as isize - zero as isize;
            let neg = zero as isize - signed;
            if neg < 0 || neg >= m as isize {
                return None;
            }
            mirror.push(neg as usize);
        }
        Some(self.grid.flat_index(&mirror))
    }

    /// Largest `|F(-ξ) - conj F(ξ)|` over samples whose mirror exists.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.values.len())
            .filter_map(|i| self.mirror_index(i).map(|j| (self.values[j] - self.values[i].conj()).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Nyquist frequency along `axis`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        (self.grid.shape[axis] / 2) as f64 * self.grid.spacing[axis]
    }
}

/// Signed DFT frequency index for centred position `i` of `m` samples.
fn centred_index(i: usize, m: usize) -> isize {
    i as isize - (m / 2) as isize
}

/// Apply an in-place 1-D FFT along `axis` of a row-major complex array.
pub(crate) fn fft_axis(
    data: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    inverse: bool,
    planner: &mut FftPlanner<f64>,
) {
    let len = shape[axis];
    let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * len * stride + s;
            for (k, b) in buf.iter_mut().enumerate() {
                *b = data[base + k * stride];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, b) in buf.iter().enumerate() {
                data[base + k * stride] = *b;
            }
        }
    }
}

/// Multiply a row-major array by a separable per-axis factor.
fn apply_separable(data: &mut [Complex64], shape: &[usize], factors: &[Vec<Complex64>]) {
    let n = shape.len();
    let mut idx = vec![0usize; n];
    for v in data.iter_mut() {
        let mut f = Complex64::new(1.0, 0.0);
        for k in 0..n {
            f *= factors[k][idx[k]];
        }
        *v *= f;
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Continuous Fourier transform approximation `f̂(ξ) = ∫ f(x) e^{-iξ·x} dx`.
///
/// The field is zero-padded to `pad × shape` along each axis (pad ≥ 1), the DFT
/// is taken, scaled by the cell volume, phase-corrected for the grid origin and
/// returned in centred order. Logs a warning when the field does not decay at
/// the grid boundary.
pub fn continuous_ft(field: &ScalarField, pad: usize) -> SpectralField {
    let complex: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let peak = field.max_abs();
    if peak > 0.0 && field.boundary_max() > 1e-6 * peak {
        log::warn!(
            "continuous_ft: field does not decay at the grid boundary ({:.3e} of peak)",
            field.boundary_max() / peak
        );
    }
    continuous_ft_complex(&field.grid, &complex, pad)
}

/// Complex-input variant of [`continuous_ft`].
pub fn continuous_ft_complex(grid: &Grid, values: &[Complex64], pad: usize) -> SpectralField {
    let pad = pad.max(1);
    let n = grid.n();
    let in_shape = &grid.shape;
    let shape: Vec<usize> = in_shape.iter().map(|s| s * pad).collect();
    let total: usize = shape.iter().product();
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    if pad == 1 {
        data.copy_from_slice(values);
    } else {
        let in_grid_strides = grid.strides();
        let mut out_strides = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            out_strides[k] = out_strides[k + 1] * shape[k + 1];
        }
        for (flat, v) in values.iter().enumerate() {
            let mut rem = flat;
            let mut out = 0;
            for k in 0..n {
                let i = rem / in_grid_strides[k];
                rem %= in_grid_strides[k];
                out += i * out_strides[k];
            }
            data[out] = *v;
        }
    }

    let mut planner = FftPlanner::new();
    for axis in 0..n {
        fft_axis(&mut data, &shape, axis, false, &mut planner);
    }

    // Reorder into centred frequency order and apply scale + origin phase.
    let dxi: Vec<f64> = (0..n).map(|k| 2.0 * PI / (shape[k] as f64 * grid.spacing[k])).collect();
    let mut centred = vec![Complex64::new(0.0, 0.0); total];
    let mut out_strides = vec![1; n];
    for k in (0..n.saturating_sub(1)).rev() {
        out_strides[k] = out_strides[k + 1] * shape[k + 1];
    }
    for (flat, v) in data.iter().enumerate() {
        let mut rem = flat;
        let mut out = 0;
        for k in 0..n {
            let i = rem / out_strides[k];
            rem %= out_strides[k];
            let m = shape[k];
            let centred_i = (i + m / 2) % m;
            out += centred_i * out_strides[k];
        }
        centred[out] = *v;
    }
    let factors: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            let m = shape[k];
            (0..m)
                .map(|i| {
                    let xi = centred_index(i, m) as f64 * dxi[k];
                    Complex64::from_polar(grid.spacing[k], -xi * grid.origin[k])
                })
                .collect()
        })
        .collect();
    apply_separable(&mut centred, &shape, &factors);

    let origin: Vec<f64> = (0..n).map(|k| -((shape[k] / 2) as f64) * dxi[k]).collect();
    let fgrid = Grid::new(shape, origin, dxi).expect("frequency grid is valid by construction");
    SpectralField { grid: fgrid, values: centred }
}

/// Inverse continuous transform `f(x) = (2π)^{-n} ∫ f̂(ξ) e^{iξ·x} dξ`, sampled on
/// `out_grid`, returned as complex samples.
///
/// `out_grid` must have the same shape as the spectrum and the spacing dual to
/// it (`Δx = 2π / (M Δξ)`); its origin is free.
pub fn continuous_ift_complex(spec: &SpectralField, out_grid: &Grid) -> Result<Vec<Complex64>> {
    let n = spec.grid.n();
    if out_grid.n() != n {
        return Err(WrtError::DimensionMismatch { expected: n, got: out_grid.n() });
    }
    if out_grid.shape != spec.grid.shape {
        return Err(WrtError::GridMismatch(format!(
            "output shape {:?} differs from spectrum shape {:?}",
            out_grid.shape, spec.grid.shape
        )));
    }
    for k in 0..n {
        let dual = 2.0 * PI / (spec.grid.shape[k] as f64 * spec.grid.spacing[k]);
        if (dual - out_grid.spacing[k]).abs() > 1e-9 * dual {
            return Err(WrtError::GridMismatch(format!(
                "axis {k}: output spacing {} is not dual to frequency spacing (expected {dual})",
                out_grid.spacing[k]
            )));
        }
    }
    let shape = spec.grid.shape.clone();
    let mut data = spec.values.clone();
    let pre: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            (0..shape[k])
                .map(|i| Complex64::from_polar(1.0, spec.grid.coord(k, i) * out_grid.origin[k]))
                .collect()
        })
        .collect();
    apply_separable(&mut data, &shape, &pre);
    let mut planner = FftPlanner::new();
    for axis in 0..n {
        fft_axis(&mut data, &shape, axis, true, &mut planner);
    }
    let scale = spec.grid.cell_volume() / (2.0 * PI).powi(n as i32);
    let post: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            let xi0 = spec.grid.origin[k];
            (0..shape[k])
                .map(|j| Complex64::from_polar(1.0, xi0 * j as f64 * out_grid.spacing[k]))
                .collect()
        })
        .collect();
    apply_separable(&mut data, &shape, &post);
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(data)
}

/// Real part of [`continuous_ift_complex`]; warns when the imaginary part is
/// not negligible (input not conjugate-symmetric).
pub fn continuous_ift(spec: &SpectralField, out_grid: &Grid) -> Result<ScalarField> {
    let data = continuous_ift_complex(spec, out_grid)?;
    let re_max = data.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let im_max = data.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if im_max > 1e-6 * re_max.max(f64::MIN_POSITIVE) && im_max > 1e-300 {
        log::warn!("continuous_ift: output has imaginary part {im_max:.3e} (real max {re_max:.3e})");
    }
    ScalarField::new(out_grid.clone(), data.into_iter().map(|v| v.re).collect())
}

/// `‖a − b‖₂ / ‖b‖₂` over grid samples.
pub fn rel_l2_error(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if !a.grid.approx_eq(&b.grid, 1e-12) {
        return Err(WrtError::GridMismatch("rel_l2_error: fields live on different grids".into()));
    }
    let denom = b.l2_norm();
    if denom == 0.0 {
        return Err(WrtError::ZeroReference);
    }
    let num = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Least-squares scale `α` minimising `‖α·a − b‖₂`.
pub fn least_squares_scale(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if !a.grid.approx_eq(&b.grid, 1e-12) {
        return Err(WrtError::GridMismatch("least_squares_scale: different grids".into()));
    }
    let aa: f64 = a.values.iter().map(|v| v * v).sum();
    if aa == 0.0 {
        return Err(WrtError::DegenerateCalibration("reconstruction is identically zero".into()));
    }
    let ab: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(ab / aa)
}

/// One isotropic Gaussian bump `A·exp(-|x-c|²/(2σ²))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub sigma: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Value below which a Gaussian factor is treated as zero when trimming
/// integration ranges: exp(-κ²/2) = 1e-17.
const GAUSS_CUTOFF_SIGMAS: f64 = 8.85;

impl GaussianBump {
    fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        self.amplitude * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn fourier(&self, xi: &[f64]) -> Complex64 {
        let n = self.center.len() as i32;
        let s2 = self.sigma * self.sigma;
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        let phase: f64 = xi.iter().zip(&self.center).map(|(k, c)| k * c).sum();
        let mag = self.amplitude * (2.0 * PI * s2).powf(n as f64 / 2.0) * (-s2 * k2 / 2.0).exp();
        Complex64::from_polar(mag, -phase)
    }
}

/// Closed-form test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhantomSpec {
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    GaussianMixture { components: Vec<GaussianBump> },
    /// Radial profile `A/2 [erf((R-r)/(√2 w)) + erf((R+r)/(√2 w))]`: a disk of
    /// radius `R` with edges blurred over width `w`. Smooth (the profile is even
    /// in `r`).
    SmoothedDisk {
        center: Vec<f64>,
        radius: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl PhantomSpec {
    pub fn gaussian(center: &[f64], sigma: f64, amplitude: f64) -> Self {
        PhantomSpec::Gaussian { center: center.to_vec(), sigma, amplitude }
    }

    pub fn mixture(components: Vec<(Vec<f64>, f64, f64)>) -> Self {
        PhantomSpec::GaussianMixture {
            components: components
                .into_iter()
                .map(|(center, sigma, amplitude)| GaussianBump { center, sigma, amplitude })
                .collect(),
        }
    }

    pub fn smoothed_disk(center: &[f64], radius: f64, width: f64, amplitude: f64) -> Self {
        PhantomSpec::SmoothedDisk { center: center.to_vec(), radius, width, amplitude }
    }

    /// Dimension implied by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            PhantomSpec::Gaussian { center, .. } | PhantomSpec::SmoothedDisk { center, .. } => Some(center.len()),
            PhantomSpec::GaussianMixture { components } => components.first().map(|c| c.center.len()),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let check_center = |c: &[f64]| -> Result<()> {
            if c.len() != n {
                return Err(WrtError::DimensionMismatch { expected: n, got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(WrtError::InvalidPhantom("center must be finite".into()));
            }
            Ok(())
        };
        let check_pos = |name: &str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(WrtError::InvalidPhantom(format!("{name} must be positive, got {v}")));
            }
            Ok(())
        };
        match self {
            PhantomSpec::Gaussian { center, sigma, amplitude } => {
                check_center(center)?;
                check_pos("sigma", *sigma)?;
                if !amplitude.is_finite() {
                    return Err(WrtError::InvalidPhantom("amplitude must be finite".into()));
                }
            }
            PhantomSpec::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(WrtError::InvalidPhantom("components: mixture needs at least one bump".into()));
                }
                for c in components {
                    check_center(&c.center)?;
                    check_pos("sigma", c.sigma)?;
                    if !c.amplitude.is_finite() {
                        return Err(WrtError::InvalidPhantom("amplitude must be finite".into()));
                    }
                }
            }
            PhantomSpec::SmoothedDisk { center, radius, width, amplitude } => {
                check_center(center)?;
                check_pos("radius", *radius)?;
                check_pos("width", *width)?;
                if !amplitude.is_finite() {
                    return Err(WrtError::InvalidPhantom("amplitude must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Pointwise closed-form value.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PhantomSpec::Gaussian { center, sigma, amplitude } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-d2 / (2.0 * sigma * sigma)).exp()
            }
            PhantomSpec::GaussianMixture { components } => components.iter().map(|c| c.eval(x)).sum(),
            PhantomSpec::SmoothedDisk { center, radius, width, amplitude } => {
                let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                let s = std::f64::consts::SQRT_2 * width;
                0.5 * amplitude * (libm::erf((radius - r) / s) + libm::erf((radius + r) / s))
            }
        }
    }

    /// Closed-form `f̂(ξ)` where available (Gaussian kinds).
    pub fn fourier(&self, xi: &[f64]) -> Option<Complex64> {
        match self {
            PhantomSpec::Gaussian { center, sigma, amplitude } => Some(
                GaussianBump { center: center.clone(), sigma: *sigma, amplitude: *amplitude }.fourier(xi),
            ),
            PhantomSpec::GaussianMixture { components } => Some(components.iter().map(|c| c.fourier(xi)).sum()),
            PhantomSpec::SmoothedDisk { .. } => None,
        }
    }

    /// Closed-form transform in the first coordinate only, evaluated at
    /// frequency `sigma` and transverse position `rest` (Gaussian kinds).
    pub fn fourier_first_axis(&self, sigma: f64, rest: &[f64]) -> Option<Complex64> {
        let bump = |b: &GaussianBump| {
            let s2 = b.sigma * b.sigma;
            let d2: f64 = rest.iter().zip(&b.center[1..]).map(|(a, c)| (a - c) * (a - c)).sum();
            let mag = b.amplitude * (2.0 * PI * s2).sqrt() * (-s2 * sigma * sigma / 2.0).exp() * (-d2 / (2.0 * s2)).exp();
            Complex64::from_polar(mag, -sigma * b.center[0])
        };
        match self {
            PhantomSpec::Gaussian { center, sigma: s, amplitude } => {
                Some(bump(&GaussianBump { center: center.clone(), sigma: *s, amplitude: *amplitude }))
            }
            PhantomSpec::GaussianMixture { components } => Some(components.iter().map(bump).sum()),
            PhantomSpec::SmoothedDisk { .. } => None,
        }
    }

    /// Gaussian components, if the phantom is a Gaussian or a mixture.
    pub fn gaussian_components(&self) -> Option<Vec<GaussianBump>> {
        match self {
            PhantomSpec::Gaussian { center, sigma, amplitude } => {
                Some(vec![GaussianBump { center: center.clone(), sigma: *sigma, amplitude: *amplitude }])
            }
            PhantomSpec::GaussianMixture { components } => Some(components.clone()),
            PhantomSpec::SmoothedDisk { .. } => None,
        }
    }

    /// Balls `(center, radius)` outside of which the phantom is below 1e-17 of
    /// its amplitude.
    pub fn support_balls(&self) -> Vec<(Vec<f64>, f64)> {
        match self {
            PhantomSpec::Gaussian { center, sigma, .. } => vec![(center.clone(), GAUSS_CUTOFF_SIGMAS * sigma)],
            PhantomSpec::GaussianMixture { components } => components
                .iter()
                .map(|c| (c.center.clone(), GAUSS_CUTOFF_SIGMAS * c.sigma))
                .collect(),
            PhantomSpec::SmoothedDisk { center, radius, width, .. } => vec![(center.clone(), radius + 9.0 * width)],
        }
    }

    /// Radius of a ball around the origin containing the numerical support.
    pub fn support_radius(&self) -> f64 {
        self.support_balls()
            .iter()
            .map(|(c, r)| c.iter().map(|v| v * v).sum::<f64>().sqrt() + r)
            .fold(0.0, f64::max)
    }

    /// Parameter interval of `t ↦ f(u + t v)` outside of which the phantom is
    /// negligible; `None` if the line misses the support entirely.
    pub fn line_interval(&self, u: &[f64], v: &[f64]) -> Option<(f64, f64)> {
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (c, rad) in self.support_balls() {
            let dv: f64 = u.iter().zip(&c).zip(v).map(|((a, b), w)| (a - b) * w).sum();
            let dd: f64 = u.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            let disc = rad * rad - dd + dv * dv / vv;
            if disc < 0.0 {
                continue;
            }
            let mid = -dv / vv;
            let half = (disc / vv).sqrt();
            lo = lo.min(mid - half);
            hi = hi.max(mid + half);
        }
        (lo < hi).then_some((lo, hi))
    }

    /// l-th circular harmonic `(1/2π)∫ f(r,φ) e^{-ilφ} dφ` (n = 2), by a
    /// 1024-point periodic trapezoid rule (spectrally accurate for smooth f).
    pub fn circular_harmonic(&self, l: i32, r: f64) -> Complex64 {
        const M: usize = 1024;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..M {
            let phi = 2.0 * PI * m as f64 / M as f64;
            let v = self.eval(&[r * phi.cos(), r * phi.sin()]);
            acc += Complex64::from_polar(v, -(l as f64) * phi);
        }
        acc / M as f64
    }
}

/// Evaluate the phantom at every grid sample.
pub fn sample_phantom(spec: &PhantomSpec, grid: &Grid) -> Result<ScalarField> {
    spec.validate(grid.n())?;
    use rayon::prelude::*;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.n()],
            |p, flat| {
                grid.point_into(flat, p);
                spec.eval(p)
            },
        )
        .collect();
    ScalarField::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss2(grid: &Grid, c: [f64; 2], s: f64) -> ScalarField {
        sample_phantom(&PhantomSpec::gaussian(&c, s, 1.0), grid).unwrap()
    }

    #[test]
    fn make_grid_spacing_and_origin() {
        let g = make_grid(2, &[64, 64], &[8.0, 8.0], &[0.0, 0.0]).unwrap();
        assert_eq!(g.spacing, vec![0.125, 0.125]);
        assert_eq!(g.origin, vec![-4.0, -4.0]);

        let g = make_grid(1, &[2], &[1.0], &[0.0]).unwrap();
        assert_eq!(g.origin, vec![-0.5]);
        assert_eq!(g.spacing, vec![0.5]);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(make_grid(1, &[1], &[1.0], &[0.0]).is_err());
        assert!(make_grid(1, &[4], &[0.0], &[0.0]).is_err());
        assert!(make_grid(1, &[4], &[-2.0], &[0.0]).is_err());
        assert!(make_grid(2, &[4], &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn coordinate_roundtrip_3d() {
        let g = make_grid(3, &[16, 16, 16], &[4.0, 4.0, 4.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.origin, vec![-1.0, -2.0, -2.0]);
        for flat in (0..g.len()).step_by(37) {
            let p = g.point(flat);
            let idx: Vec<usize> = (0..3).map(|k| g.fractional_index(k, p[k]).round() as usize).collect();
            assert_eq!(g.flat_index(&idx), flat);
            for k in 0..3 {
                assert!((g.fractional_index(k, p[k]) - idx[k] as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phantom_sampling() {
        let g = make_grid(2, &[64, 64], &[8.0, 8.0], &[0.0, 0.0]).unwrap();
        let zero = sample_phantom(&PhantomSpec::gaussian(&[0.0, 0.0], 1.0, 0.0), &g).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));

        let f = gauss2(&g, [0.0, 0.0], 1.0);
        let at_origin = f.values[g.flat_index(&[32, 32])];
        assert!((at_origin - 1.0).abs() < 1e-15);
        let at_one = f.values[g.flat_index(&[40, 32])];
        assert!((at_one - (-0.5f64).exp()).abs() < 1e-15);

        let mix = PhantomSpec::mixture(vec![(vec![1.0, 0.0], 0.5, 1.0), (vec![-1.0, 0.0], 0.5, 1.0)]);
        let fm = sample_phantom(&mix, &g).unwrap();
        for i in 1..64 {
            for j in 0..64 {
                let a = fm.values[g.flat_index(&[i, j])];
                let b = fm.values[g.flat_index(&[64 - i, j])];
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert!(sample_phantom(&PhantomSpec::gaussian(&[0.0; 3], 1.0, 1.0), &g).is_err());
    }

    #[test]
    fn smoothed_disk_profile() {
        let d = PhantomSpec::smoothed_disk(&[0.0, 0.0], 1.0, 0.05, 1.0);
        assert!((d.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((d.eval(&[1.0, 0.0]) - 0.5).abs() < 1e-6);
        assert!(d.eval(&[2.0, 0.0]) < 1e-15);
    }

    #[test]
    fn ft_of_zero_is_zero() {
        let g = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let s = continuous_ft(&ScalarField::zeros(g), 1);
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gaussian_ft_matches_closed_form() {
        let g = make_grid(2, &[128, 128], &[20.0, 20.0], &[0.0, 0.0]).unwrap();
        let f = gauss2(&g, [0.0, 0.0], 1.0);
        let s = continuous_ft(&f, 1);
        let mut worst: f64 = 0.0;
        for (flat, v) in s.values.iter().enumerate() {
            let xi = s.grid.point(flat);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1];
            if k2 <= 16.0 {
                let exact = 2.0 * PI * (-k2 / 2.0).exp();
                worst = worst.max((v - exact).norm() / exact);
            }
        }
        assert!(worst <= 1e-6, "max relative error {worst}");
    }

    #[test]
    fn shift_property() {
        let g = make_grid(2, &[128, 128], &[20.0, 20.0], &[0.0, 0.0]).unwrap();
        let c = [1.25, -0.5];
        let f0 = continuous_ft(&gauss2(&g, [0.0, 0.0], 1.0), 1);
        let f1 = continuous_ft(&gauss2(&g, c, 1.0), 1);
        let mut worst: f64 = 0.0;
        for flat in 0..f0.values.len() {
            let xi = f0.grid.point(flat);
            let expected = f0.values[flat] * Complex64::from_polar(1.0, -(xi[0] * c[0] + xi[1] * c[1]));
            worst = worst.max((f1.values[flat] - expected).norm());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn roundtrip_and_parseval() {
        let g = make_grid(2, &[64, 48], &[16.0, 12.0], &[0.3, -0.2]).unwrap();
        let f = gauss2(&g, [0.5, -0.3], 0.8);
        let s = continuous_ft(&f, 1);
        let back = continuous_ift(&s, &g).unwrap();
        assert!(rel_l2_error(&back, &f).unwrap() < 1e-12);

        let lhs: f64 = f.values.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let rhs: f64 =
            s.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * s.grid.cell_volume() / (2.0 * PI).powi(2);
        assert!((lhs - rhs).abs() < 1e-8 * lhs);
        assert!(s.conjugate_symmetry_defect() < 1e-12);
    }

    #[test]
    fn padded_ft_keeps_values_on_coarse_frequencies() {
        let g = make_grid(1, &[64], &[16.0], &[0.0]).unwrap();
        let f = sample_phantom(&PhantomSpec::gaussian(&[0.7], 1.0, 1.0), &g).unwrap();
        let s1 = continuous_ft(&f, 1);
        let s2 = continuous_ft(&f, 2);
        assert_eq!(s2.grid.shape, vec![128]);
        for i in 0..64 {
            // Frequency index i of the unpadded grid matches 2i of the padded one.
            let a = s1.values[i];
            let b = s2.values[2 * i];
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_bin_spectrum_is_complex_exponential() {
        let g = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let mut s = continuous_ft(&ScalarField::zeros(g.clone()), 1);
        let bin = s.grid.flat_index(&[10, 5]);
        s.values[bin] = Complex64::new(1.0, 0.0);
        let xi = s.grid.point(bin);
        let out = continuous_ift_complex(&s, &g).unwrap();
        let scale = s.grid.cell_volume() / (2.0 * PI).powi(2);
        for (flat, v) in out.iter().enumerate() {
            let x = g.point(flat);
            let expected = Complex64::from_polar(scale, xi[0] * x[0] + xi[1] * x[1]);
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn ift_rejects_mismatched_grid() {
        let g = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let s = continuous_ft(&ScalarField::zeros(g), 1);
        let wrong = make_grid(2, &[16, 16], &[5.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!(continuous_ift(&s, &wrong).is_err());
        let zero = continuous_ift(&s, &make_grid(2, &[16, 16], &[4.0, 4.0], &[1.0, 0.0]).unwrap()).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rel_l2_cases() {
        let g = make_grid(2, &[16, 16], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let f = gauss2(&g, [0.0, 0.0], 0.7);
        assert_eq!(rel_l2_error(&f, &f).unwrap(), 0.0);
        assert!((rel_l2_error(&f.scaled(2.0), &f).unwrap() - 1.0).abs() < 1e-14);
        // g with ‖g‖ = ‖f‖, orthogonal direction irrelevant for the norm of εg.
        let other = gauss2(&g, [0.5, 0.5], 0.4);
        let gn = other.scaled(f.l2_norm() / other.l2_norm());
        let eps = 0.03;
        let pert = ScalarField::new(
            g.clone(),
            f.values.iter().zip(&gn.values).map(|(a, b)| a + eps * b).collect(),
        )
        .unwrap();
        assert!((rel_l2_error(&pert, &f).unwrap() - eps).abs() < 1e-14);
        assert!(matches!(rel_l2_error(&f, &ScalarField::zeros(g)), Err(WrtError::ZeroReference)));
    }
}
