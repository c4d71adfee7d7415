//! Circular-harmonic inversion from data on v = u^⊥ with a compactly
//! supported window.

use std::time::Instant;

use wrtkit::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::forward::{wrt_polar_perp, FieldSource, QuadratureParams};
use wrtkit::invert_mellin::{self, LogGrid, MellinParams};
use wrtkit::quadrature::uniform_angles;
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::mixture(vec![(vec![1.6, 0.0], 0.25, 1.0), (vec![-0.8, 1.3856], 0.25, 0.7)]);
    let w = WindowSpec::bump(1.0);
    let lg = LogGrid::new((-16f64).exp(), 1.3f64.exp(), 512)?;
    let g = wrt_polar_perp(&FieldSource::Phantom(f.clone()), &w, &lg.radii(), &uniform_angles(128, 0.0), QuadratureParams::default())?;

    let series = invert_mellin::circular_decompose(&g, 4)?;
    for l in 0..=4 {
        let fl: Vec<_> = lg.radii().iter().map(|&r| f.circular_harmonic(l, r)).collect();
        let mg = invert_mellin::mellin_transform(series.harmonic(l), &lg, 1.5, 20.0)?;
        let mf = invert_mellin::mellin_transform(&fl, &lg, 1.5, 20.0)?;
        let mh = invert_mellin::mellin_kernel(&w, l, 0.5, &mg.y)?;
        println!("l = {l}  Mg = Mf·MH residual {:.2e}", invert_mellin::mellin_convolution_residual(&mg, &mf, &mh, 20.0));
    }

    let grid = make_grid(2, &[64, 64], &[8.0, 8.0], &[0.0, 0.0])?;
    let truth = sample_phantom(&f, &grid)?;
    for lmax in [8, 16, 24] {
        let start = Instant::now();
        let rec = invert_mellin::reconstruct_mellin(&g, &grid, &MellinParams { lmax, ..MellinParams::default() })?;
        println!(
            "L = {lmax:2}  rel-L2 {:.3e}  T/2 change {:.2e}  ({:.1}s)",
            rel_l2_error(&rec.field, &truth)?,
            rec.truncation_change,
            start.elapsed().as_secs_f64()
        );
    }

    match invert_mellin::check_window(&WindowSpec::hermite1(1.0)) {
        Err(e) => println!("hermite1: {e}"),
        Ok(()) => unreachable!(),
    }
    Ok(())
}
