//! Polar-Fourier inversion: sample P̂_h f on (σθ, rθ), integrate over r, and
//! synthesise on a grid.

use std::time::Instant;

use wrtkit::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::invert_bp::ClosedFormRays;
use wrtkit::invert_fourier::{self, T2Params};
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0);
    let w = WindowSpec::gaussian(1.0);
    let grid = make_grid(2, &[64, 64], &[8.0, 8.0], &[0.0, 0.0])?;
    let rays = ClosedFormRays::new(f.clone(), w.clone())?;

    let start = Instant::now();
    let params = T2Params::default();
    let (rec, samples) = invert_fourier::reconstruct_t2_from_source(&rays, &w, f.support_radius(), &grid, &params)?;
    println!(
        "{} directions × {} σ × {} radii, {:.1}s",
        samples.directions.len(),
        samples.sigmas.len(),
        samples.radii.len(),
        start.elapsed().as_secs_f64()
    );
    println!("rel-L2 {:.3e}", rel_l2_error(&rec, &sample_phantom(&f, &grid)?)?);

    // σ·inner(σ) is f̂(σθ)·∫₀^∞|ĥ|².
    let c = w.constants()?.c_hat_half;
    for k in [8, 32, 64] {
        let s = samples.sigmas[k];
        let inner = invert_fourier::inner_integral(&samples, &w, 0, k);
        let fh = f.fourier(&[s, 0.0]).unwrap();
        println!("σ = {s:5.2}  σ·inner / (f̂ c) = {:.6}", inner * s / (fh * c));
    }
    Ok(())
}
