//! Command-line front end. Exit codes: 0 success, 1 usage or validation error,
//! 2 numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::calibrate::{self, CalibrationSetup, Method};
use crate::error::{Result, WrtError};
use crate::fields::{make_grid, rel_l2_error, sample_phantom, Grid, PhantomSpec, ScalarField};
use crate::forward::{analytic_wrt, windowed_ray_transform, wrt_polar_perp, FieldSource, QuadratureParams, VSet};
use crate::invert_bp::{self, ConstantMode};
use crate::invert_fourier::{self, LineMethod};
use crate::invert_mellin::{self, MellinParams, RegParams};
use crate::invert_slice::{self, Apodization};
use crate::io;
use crate::quadrature::{log_uniform, uniform_angles};
use crate::selftest::{self, SelftestOptions};
use crate::windows::WindowSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "wrtkit", version, about = "Windowed ray transform: forward simulation and inversion")]
pub struct Cli {
    /// Seed for randomised choices (direction jitter, selftest draws).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 picks automatically. Falls back to WRTKIT_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a closed-form phantom onto a grid (GF1).
    Phantom(PhantomArgs),
    /// Compute P_h f on a u-grid and a v-set (WRT1, or PWRT1 for perp mode).
    Forward(ForwardArgs),
    /// Reconstruct f from stored transform data (GF1).
    Invert(InvertArgs),
    /// Compare two GF1 fields.
    Compare(CompareArgs),
    /// Fit the inversion constant against closed-form phantoms.
    Calibrate(CalibrateArgs),
    /// Run the reduced-resolution property suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Points per axis: one value for every axis, or a comma list.
    #[arg(long, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,
    /// Side length per axis: one value or a comma list.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub extent: Option<Vec<f64>>,
    /// Grid centre, comma list (default origin).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Option<Vec<f64>>,
}

impl GridArgs {
    fn is_set(&self) -> bool {
        self.shape.is_some() || self.extent.is_some() || self.center.is_some()
    }

    fn build(&self, n: usize, default_shape: usize, default_extent: f64) -> Result<Grid> {
        let spread = |v: &Option<Vec<f64>>, d: f64, what: &str| -> Result<Vec<f64>> {
            match v {
                None => Ok(vec![d; n]),
                Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
                Some(v) if v.len() == n => Ok(v.clone()),
                Some(v) => Err(WrtError::InvalidParameter(format!("--{what} has {} entries, expected 1 or {n}", v.len()))),
            }
        };
        let shape = spread(&self.shape.as_ref().map(|s| s.iter().map(|&x| x as f64).collect()), default_shape as f64, "shape")?;
        let shape: Vec<usize> = shape.iter().map(|&x| x as usize).collect();
        let extent = spread(&self.extent, default_extent, "extent")?;
        let center = spread(&self.center, 0.0, "center")?;
        make_grid(n, &shape, &extent, &center)
    }
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    /// Phantom JSON: a file path or an inline object.
    #[arg(long)]
    pub spec: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VMode {
    Polar,
    FullGrid,
    V1Line,
    Perp,
}

#[derive(Args, Debug)]
pub struct ForwardArgs {
    /// Phantom JSON (file or inline); evaluated in closed form along each ray.
    #[arg(long, conflicts_with = "input")]
    pub phantom: Option<String>,
    /// Sampled field (GF1 directory) instead of a phantom.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Window JSON (file or inline).
    #[arg(long)]
    pub window: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = VMode::Polar)]
    pub vmode: VMode,
    /// polar: number of directions (perp: number of angles).
    #[arg(long, default_value_t = 8)]
    pub dirs: usize,
    /// polar: explicit radii, comma list.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// polar: log-spaced radii from r-min to r-max (used when --radii is absent).
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    #[arg(long, default_value_t = 16.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 4)]
    pub n_radii: usize,
    /// polar: rotate the direction set by a seeded random angle.
    #[arg(long)]
    pub jitter: bool,
    /// full-grid: v-grid shape and extent (one value per axis or a list).
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub v_shape: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub v_extent: Vec<f64>,
    /// v1-line: v₁ range half-width V and step (midpoint samples).
    #[arg(long, default_value_t = 16.0)]
    pub v1_extent: f64,
    #[arg(long, default_value_t = 0.125)]
    pub v1_step: f64,
    /// v1-line: fixed transverse component v'.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v_perp: f64,
    /// perp: log-spaced ρ range and count.
    #[arg(long, default_value_t = 1.1e-7)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 3.7)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 512)]
    pub n_rho: usize,
    /// Gauss–Legendre panels per ray.
    #[arg(long, default_value_t = 32)]
    pub panels: usize,
    /// Report the deviation from the closed-form transform.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InvertMethod {
    T1,
    T2,
    Slice,
    Mellin,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[arg(long, value_enum)]
    pub method: InvertMethod,
    /// WRT1 directory (PWRT1 for mellin).
    #[arg(long)]
    pub input: PathBuf,
    /// Optional window JSON; must match the one stored with the data.
    #[arg(long)]
    pub window: Option<String>,
    /// Output grid (defaults to the data u-grid; mellin: 64² over [-3, 3]²).
    #[command(flatten)]
    pub grid: GridArgs,
    /// published, derived, or a numeric constant.
    #[arg(long, default_value = "derived")]
    pub constant: String,
    /// t1: step of the t-quadrature.
    #[arg(long, default_value_t = 0.25)]
    pub dt: f64,
    /// t2: σ samples and cutoff (default just below the u-grid Nyquist frequency).
    #[arg(long, default_value_t = 128)]
    pub n_sigmas: usize,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    /// slice: none, hann, or kaiser:BETA.
    #[arg(long, default_value = "hann")]
    pub apodize: String,
    /// slice: point where h(a) ≠ 0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// mellin: harmonic cutoff L.
    #[arg(long, default_value_t = 16)]
    pub lmax: usize,
    /// mellin: contour abscissa t (> 1).
    #[arg(long = "mellin-t", default_value_t = 1.5)]
    pub mellin_t: f64,
    /// mellin: contour half-height T.
    #[arg(long = "mellin-T", default_value_t = 40.0)]
    pub mellin_big_t: f64,
    /// mellin: Tikhonov parameter for the spectral division.
    #[arg(long)]
    pub reg_lambda: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Field under test (GF1).
    pub a: PathBuf,
    /// Reference field (GF1).
    pub b: PathBuf,
    /// Write |a - b| as a PGM image.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub method: String,
    /// Window JSON (file or inline).
    #[arg(long, default_value = r#"{"kind":"gaussian","sigma":1.0}"#)]
    pub window: String,
    /// JSON array of phantoms (file or inline); defaults to three Gaussians.
    #[arg(long)]
    pub phantoms: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Fault injection: scale the inversion constants by 1.5.
    #[arg(long, hide = true)]
    pub corrupt_constant: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Error(WrtError),
    Failed(String),
}

impl From<WrtError> for Failure {
    fn from(e: WrtError) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Phantom(a) => cmd_phantom(&cli, a),
        Command::Forward(a) => cmd_forward(&cli, a),
        Command::Invert(a) => cmd_invert(&cli, a),
        Command::Compare(a) => cmd_compare(&cli, a),
        Command::Calibrate(a) => cmd_calibrate(&cli, a),
        Command::Selftest(a) => cmd_selftest(&cli, a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("{msg}");
            EXIT_NUMERICAL
        }
    }
}

fn configure_threads(flag: Option<usize>) -> std::result::Result<(), String> {
    let threads = match flag {
        Some(n) => n,
        None => match std::env::var("WRTKIT_THREADS") {
            Ok(s) => s.trim().parse().map_err(|_| format!("WRTKIT_THREADS must be an integer, got '{s}'"))?,
            Err(_) => 0,
        },
    };
    if threads > 0 {
        // A pool may already exist when run() is called more than once in a process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Inline JSON if it starts with `{` or `[`, otherwise a file path.
fn load_json(arg: &str, what: &str) -> std::result::Result<Value, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("cannot read {what} file '{arg}': {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed {what} JSON: {e}")))
}

fn parse_as<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> std::result::Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("invalid {what}: {e}")))
}

fn load_window(arg: &str) -> std::result::Result<WindowSpec, Failure> {
    let w: WindowSpec = parse_as(load_json(arg, "window")?, "window")?;
    w.validate()?;
    Ok(w)
}

fn load_phantom(arg: &str) -> std::result::Result<PhantomSpec, Failure> {
    parse_as(load_json(arg, "phantom")?, "phantom")
}

fn parse_constant(s: &str) -> std::result::Result<ConstantMode, Failure> {
    match s {
        "published" => Ok(ConstantMode::Published),
        "derived" => Ok(ConstantMode::Derived),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .map(ConstantMode::Calibrated)
            .ok_or_else(|| Failure::Usage(format!("--constant must be published, derived, or a number, got '{other}'"))),
    }
}

fn report(cli: &Cli, value: &Value, text: &str) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(value).unwrap_or_default());
    } else {
        print!("{text}");
    }
}

fn write_report(path: &Option<PathBuf>, value: &Value) -> Result<()> {
    if let Some(p) = path {
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(p, serde_json::to_string_pretty(value)?)?;
    }
    Ok(())
}

fn grid_summary(g: &Grid) -> String {
    format!("shape {:?}, origin {:?}, spacing {:?}", g.shape, g.origin, g.spacing)
}

fn cmd_phantom(cli: &Cli, a: &PhantomArgs) -> CmdResult {
    let spec = load_phantom(&a.spec)?;
    let n = spec.dim().or(a.grid.shape.as_ref().map(|s| s.len()).filter(|&l| l > 1)).unwrap_or(2);
    spec.validate(n)?;
    let grid = a.grid.build(n, 64, 8.0)?;
    let field = sample_phantom(&spec, &grid)?;
    io::write_scalar_field(&a.out, &field)?;
    let value = json!({"out": a.out, "shape": grid.shape, "origin": grid.origin, "spacing": grid.spacing, "max": field.max_abs()});
    report(cli, &value, &format!("phantom: {} -> {}\n", grid_summary(&grid), a.out.display()));
    Ok(())
}

fn cmd_forward(cli: &Cli, a: &ForwardArgs) -> CmdResult {
    let window = load_window(&a.window)?;
    let (source, phantom) = match (&a.phantom, &a.input) {
        (Some(p), None) => {
            let spec = load_phantom(p)?;
            (FieldSource::Phantom(spec.clone()), Some(spec))
        }
        (None, Some(dir)) => (FieldSource::Sampled(io::read_scalar_field(dir)?), None),
        _ => return Err(Failure::Usage("give exactly one of --phantom or --input".into())),
    };
    let n = match &source {
        FieldSource::Phantom(p) => p.dim().unwrap_or(2),
        FieldSource::Sampled(f) => f.grid.n(),
    };
    source.validate(n)?;
    let quad = QuadratureParams { panels: a.panels };
    if a.panels == 0 {
        return Err(Failure::Usage("--panels must be positive".into()));
    }

    if a.vmode == VMode::Perp {
        if n != 2 {
            return Err(WrtError::Unsupported("perp mode requires n = 2".into()).into());
        }
        let rho = log_uniform(a.rho_min, a.rho_max, a.n_rho);
        let theta = uniform_angles(a.dirs, 0.0);
        let data = wrt_polar_perp(&source, &window, &rho, &theta, quad)?;
        io::write_polar_wrt(&a.out, &data)?;
        let value = json!({"out": a.out, "format": "pwrt1", "n_rho": rho.len(), "n_theta": theta.len()});
        report(cli, &value, &format!("forward: perp, {} radii × {} angles -> {}\n", rho.len(), theta.len(), a.out.display()));
        return Ok(());
    }

    let u_grid = match &source {
        FieldSource::Sampled(f) if !a.grid.is_set() => f.grid.clone(),
        _ => a.grid.build(n, 64, 8.0)?,
    };
    let vset = match a.vmode {
        VMode::Polar => {
            let radii = match &a.radii {
                Some(r) => r.clone(),
                None => log_uniform(a.r_min, a.r_max, a.n_radii),
            };
            if n != 2 {
                let (directions, _) = invert_bp::sphere_rule(n, a.dirs)?;
                VSet::Polar { directions, radii }
            } else {
                let offset = if a.jitter {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    rng.gen_range(0.0..2.0 * std::f64::consts::PI / a.dirs.max(1) as f64)
                } else {
                    0.0
                };
                VSet::polar_2d(a.dirs, offset, radii)
            }
        }
        VMode::FullGrid => {
            let spread = |v: &Vec<f64>| if v.len() == 1 { vec![v[0]; n] } else { v.clone() };
            let shape: Vec<usize> = spread(&a.v_shape.iter().map(|&x| x as f64).collect()).iter().map(|&x| x as usize).collect();
            VSet::FullGrid { grid: make_grid(n, &shape, &spread(&a.v_extent), &vec![0.0; n])? }
        }
        VMode::V1Line => {
            let mut v_perp = vec![0.0; n - 1];
            if n > 1 {
                v_perp[0] = a.v_perp;
            }
            VSet::V1Line { v1: invert_slice::v1_samples(a.v1_extent, a.v1_step), v_perp }
        }
        VMode::Perp => unreachable!(),
    };
    let data = windowed_ray_transform(&source, &window, &u_grid, &vset, quad)?;
    io::write_wrt(&a.out, &data)?;

    let mut value = json!({
        "out": a.out,
        "format": "wrt1",
        "vmode": vset.mode(),
        "n_u": u_grid.len(),
        "n_v": data.nv(),
        "dtype": data.dtype(),
    });
    let mut text = format!(
        "forward: {} u-points × {} v-samples ({}, {}) -> {}\n",
        u_grid.len(),
        data.nv(),
        vset.mode(),
        data.dtype(),
        a.out.display()
    );
    if a.oracle {
        let deviation = match (&phantom, &vset) {
            (Some(p), VSet::Polar { .. } | VSet::FullGrid { .. } | VSet::V1Line { .. }) => oracle_deviation(&data, p, &window),
            _ => None,
        };
        match deviation {
            Some(d) => {
                value["oracle_max_rel_deviation"] = json!(d);
                text.push_str(&format!("oracle: max relative deviation {d:.3e}\n"));
            }
            None => {
                value["oracle_max_rel_deviation"] = Value::Null;
                text.push_str("oracle: no closed form for this phantom/window\n");
            }
        }
    }
    report(cli, &value, &text);
    Ok(())
}

/// Max relative deviation from the closed form, with a floor of 1e-6 of the
/// peak so that samples in the far tail do not dominate.
fn oracle_deviation(data: &crate::forward::WRTData, phantom: &PhantomSpec, window: &WindowSpec) -> Option<f64> {
    let peak = data.max_abs();
    let mut worst: f64 = 0.0;
    for j in 0..data.nv() {
        let v = data.vset.vector(j);
        for i in 0..data.u_grid.len() {
            let exact = analytic_wrt(phantom, window, &data.u_grid.point(i), &v)?;
            worst = worst.max((data.get(i, j).re - exact).abs() / exact.abs().max(1e-6 * peak));
        }
    }
    Some(worst)
}

/// Method/window/geometry compatibility, checked before any computation.
fn check_compatibility(method: InvertMethod, window: &WindowSpec, mode: &str) -> Result<()> {
    match method {
        InvertMethod::Mellin => invert_mellin::check_window(window)?,
        _ => window.require_invertible()?,
    }
    let needed = match method {
        InvertMethod::T1 | InvertMethod::T2 => "polar",
        InvertMethod::Slice => "v1-line",
        InvertMethod::Mellin => "perp",
    };
    if mode != needed {
        return Err(WrtError::Unsupported(format!("{method:?} inversion needs {needed} data, got {mode}").to_lowercase()));
    }
    Ok(())
}

fn cmd_invert(cli: &Cli, a: &InvertArgs) -> CmdResult {
    let format = io::format_of(&a.input)?;
    let (window, mode) = match format.as_str() {
        "wrt1" => {
            let meta: Value = serde_json::from_str(&std::fs::read_to_string(a.input.join(io::META_FILE)).map_err(WrtError::from)?)
                .map_err(WrtError::from)?;
            let w: WindowSpec = parse_as(meta["window"].clone(), "window in data")?;
            let m = meta["vset"]["mode"].as_str().unwrap_or("").to_string();
            (w, m)
        }
        "pwrt1" => (io::read_polar_wrt(&a.input)?.window, "perp".to_string()),
        other => return Err(Failure::Usage(format!("{} holds {other} data, not transform data", a.input.display()))),
    };
    if let Some(w) = &a.window {
        if load_window(w)? != window {
            return Err(Failure::Usage("--window differs from the window stored with the data".into()));
        }
    }
    check_compatibility(a.method, &window, &mode)?;
    let constant = parse_constant(&a.constant)?;

    let mut value = json!({"method": format!("{:?}", a.method).to_lowercase(), "window": window, "out": a.out});
    let mut text = String::new();
    let field: ScalarField = match a.method {
        InvertMethod::T1 | InvertMethod::T2 | InvertMethod::Slice => {
            let data = io::read_wrt(&a.input)?;
            let n = data.u_grid.n();
            let grid = if a.grid.is_set() { a.grid.build(n, 64, 8.0)? } else { data.u_grid.clone() };
            match a.method {
                InvertMethod::T1 => {
                    let c = invert_bp::constant_for(constant, n, &window)?;
                    text.push_str(&format!("constant: {constant:?} = {c:.6e}\n"));
                    value["constant"] = json!({"mode": constant, "value": c});
                    invert_bp::reconstruct_t1_data(&data, &grid, a.dt, constant)?
                }
                InvertMethod::T2 => {
                    let nyquist = data.u_grid.spacing.iter().map(|h| std::f64::consts::PI / h).fold(f64::INFINITY, f64::min);
                    let sigma_max = a.sigma_max.unwrap_or(0.999 * nyquist);
                    let sigmas: Vec<f64> = (0..a.n_sigmas).map(|k| sigma_max * k as f64 / a.n_sigmas as f64).collect();
                    let samples = invert_fourier::extract_polar_spectrum(&data, &sigmas, LineMethod::Exact)?;
                    let c = invert_fourier::constant_for(constant, n, &window)?;
                    text.push_str(&format!("constant: {constant:?} = {c:.6e}, σ_max {sigma_max:.4}\n"));
                    value["constant"] = json!({"mode": constant, "value": c});
                    value["sigma_max"] = json!(sigma_max);
                    invert_fourier::reconstruct_t2(&samples, &window, &grid, constant)?
                }
                _ => {
                    let apod: Apodization = a.apodize.parse().map_err(|e: WrtError| Failure::Usage(e.to_string()))?;
                    let ds = invert_slice::SliceDataset::from_wrt(&data, apod)?;
                    let v = ds.v1_extent();
                    text.push_str(&format!("apodization: {}, V = {v}, a = {}\n", a.apodize, a.a));
                    value["apodization"] = json!(apod);
                    value["v_extent"] = json!(v);
                    value["a"] = json!(a.a);
                    invert_slice::reconstruct_slice(&ds, &window, a.a, &grid)?.0
                }
            }
        }
        InvertMethod::Mellin => {
            let data = io::read_polar_wrt(&a.input)?;
            let grid = a.grid.build(2, 64, 6.0)?;
            let params = MellinParams {
                lmax: a.lmax,
                t: a.mellin_t,
                big_t: a.mellin_big_t,
                reg: RegParams { lambda: a.reg_lambda, ..RegParams::default() },
            };
            let rec = invert_mellin::reconstruct_mellin(&data, &grid, &params)?;
            text.push_str(&format!(
                "mellin: L = {}, t = {}, T = {}, T/2 change {:.3e}\n",
                a.lmax, a.mellin_t, a.mellin_big_t, rec.truncation_change
            ));
            value["lmax"] = json!(a.lmax);
            value["truncation_change"] = json!(rec.truncation_change);
            rec.field
        }
    };
    io::write_scalar_field(&a.out, &field)?;
    text.push_str(&format!("invert: {} -> {}\n", grid_summary(&field.grid), a.out.display()));
    report(cli, &value, &text);
    Ok(())
}

fn cmd_compare(cli: &Cli, a: &CompareArgs) -> CmdResult {
    let fa = io::read_scalar_field(&a.a)?;
    let fb = io::read_scalar_field(&a.b)?;
    let rel = rel_l2_error(&fa, &fb)?;
    let diff = ScalarField::new(fa.grid.clone(), fa.values.iter().zip(&fb.values).map(|(x, y)| (x - y).abs()).collect())?;
    let max_abs = diff.max_abs();
    if let Some(p) = &a.pgm {
        io::write_pgm(p, &diff)?;
    }
    let value = json!({"rel_l2": rel, "max_abs": max_abs, "a": a.a, "b": a.b});
    write_report(&a.out, &value)?;
    report(cli, &value, &format!("rel-L2 {rel:.6e}\nmax-abs {max_abs:.6e}\n"));
    Ok(())
}

fn cmd_calibrate(cli: &Cli, a: &CalibrateArgs) -> CmdResult {
    let method: Method = a.method.parse()?;
    let window = load_window(&a.window)?;
    let phantoms: Vec<PhantomSpec> = match &a.phantoms {
        Some(p) => parse_as(load_json(p, "phantom set")?, "phantom set")?,
        None => calibrate::default_phantoms(),
    };
    for p in &phantoms {
        p.validate(2)?;
    }
    let grid = a.grid.build(2, 32, 8.0)?;
    let rep = calibrate::calibrate(method, &window, &phantoms, &grid, &CalibrationSetup::default())?;
    let value = serde_json::to_value(&rep).map_err(WrtError::from)?;
    write_report(&a.out, &value)?;
    let mut text = format!(
        "method {:?}: fitted α {:.6e}, published constant {:.6e}, ratio {:.6}, derived constant {:.6e}, ratio {:.6}, CV {:.3e}\n",
        rep.method, rep.fitted_alpha, rep.published_constant, rep.ratio, rep.derived_constant, rep.ratio_derived, rep.cv
    );
    for (i, p) in rep.per_phantom.iter().enumerate() {
        text.push_str(&format!("  phantom {i}: α {:.6e}, rel-L2 {:.3e}\n", p.alpha, p.rel_l2_mean));
    }
    report(cli, &value, &text);
    Ok(())
}

fn cmd_selftest(cli: &Cli, a: &SelftestArgs) -> CmdResult {
    let rep = selftest::run(&SelftestOptions { seed: cli.seed, corrupt_constant: a.corrupt_constant });
    let value = serde_json::to_value(&rep).map_err(WrtError::from)?;
    write_report(&a.out, &value)?;
    report(cli, &value, &rep.table());
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Failed("selftest failed".into()))
    }
}
