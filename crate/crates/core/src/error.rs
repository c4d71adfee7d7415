use thiserror::Error;

/// Errors raised by the transform and inversion routines.
///
/// Validation problems (bad shapes, rejected windows, violated hypotheses) are
/// distinguished from numerical failures so the CLI can map them onto its
/// exit codes.
#[derive(Debug, Error)]
pub enum WrtError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid phantom: {0}")]
    InvalidPhantom(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reference field is identically zero")]
    ZeroReference,
    #[error("window is identically zero")]
    ZeroWindow,
    #[error("analytic-signal window is forward-only and cannot be used for inversion")]
    ForwardOnlyWindow,
    #[error("window vanishes at a = {a} (|h(a)| = {value:e})")]
    WindowVanishesAt { a: f64, value: f64 },
    #[error("hypothesis violated: h is odd (even part vanishes)")]
    OddWindow,
    #[error("mellin inversion requires compactly supported, not-odd window (got {0})")]
    MellinWindow(String),
    #[error("zero-norm direction in v-set")]
    ZeroDirection,
    #[error("data does not cover the requested range: {0}")]
    Coverage(String),
    #[error("requested frequency {requested} beyond Nyquist limit {nyquist}")]
    BeyondNyquist { requested: f64, nyquist: f64 },
    #[error("kernel spectrum too small; inversion ill-posed on this band ({fraction:.0}% of samples below threshold)")]
    IllPosed { fraction: f64 },
    #[error("non-finite value produced: {0}")]
    NonFinite(String),
    #[error("samples do not decay at the grid ends: {0}")]
    NoDecay(String),
    #[error("calibration unstable: coefficient of variation {cv:.4} exceeds {limit}")]
    CalibrationUnstable { cv: f64, limit: f64 },
    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl WrtError {
    /// True for failures that happen during numerical work rather than input
    /// validation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WrtError::ZeroWindow
                | WrtError::ForwardOnlyWindow
                | WrtError::WindowVanishesAt { .. }
                | WrtError::OddWindow
                | WrtError::MellinWindow(_)
                | WrtError::Coverage(_)
                | WrtError::BeyondNyquist { .. }
                | WrtError::IllPosed { .. }
                | WrtError::NonFinite(_)
                | WrtError::NoDecay(_)
                | WrtError::CalibrationUnstable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, WrtError>;
