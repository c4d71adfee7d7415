//! Gauss–Legendre rules and the composite/adaptive integrators built on them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The 16-point rule used by every composite integrator in the crate.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre nodes/weights on `[a, b]` with `panels` equal panels.
pub fn composite_nodes(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * rule.len());
    let mut ws = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Composite Gauss–Legendre integral of a real function.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = GaussLegendre::sixteen();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Composite Gauss–Legendre integral of a complex function.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let rule = GaussLegendre::sixteen();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += f(mid + 0.5 * h * x) * *w;
        }
        total += s * (0.5 * h);
    }
    total
}

/// Panel-doubling integration until two successive estimates agree to `rel_tol`.
///
/// Returns the finer estimate. Stops after `max_panels` regardless.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
) -> f64 {
    let mut panels = 4;
    let mut prev = integrate(&f, a, b, panels);
    loop {
        panels *= 2;
        let next = integrate(&f, a, b, panels);
        let scale = next.abs().max(f64::MIN_POSITIVE);
        if (next - prev).abs() <= rel_tol * scale || panels >= max_panels {
            return next;
        }
        prev = next;
    }
}

/// Trapezoid weights for a uniform grid of `n` points with step `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 2 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    w
}

/// `n` log-uniformly spaced points from `lo` to `hi` inclusive.
pub fn log_uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| (a + i as f64 * step).exp()).collect()
}

/// `n` uniformly spaced angles on [0, 2π) starting at `offset`.
pub fn uniform_angles(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|j| offset + 2.0 * PI * j as f64 / n as f64).collect()
}
