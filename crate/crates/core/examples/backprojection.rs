//! Filtered backprojection with a non-admissible window (ĥ(0) ≠ 0).

use std::time::Instant;

use wrtkit::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::invert_bp::{self, BPParams, ClosedFormRays, ConstantMode};
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0);
    let w = WindowSpec::gaussian(1.0);
    let grid = make_grid(2, &[32, 32], &[8.0, 8.0], &[0.0, 0.0])?;
    let truth = sample_phantom(&f, &grid)?;
    let rays = ClosedFormRays::new(f, w.clone())?;
    println!("ĥ(0) = {:.4}", w.ft(0.0).re);

    for mode in [ConstantMode::Derived, ConstantMode::Published] {
        let start = Instant::now();
        let params = BPParams { constant_mode: mode, ..BPParams::default() };
        let rec = invert_bp::reconstruct_t1(&rays, &w, &grid, &params)?;
        println!(
            "{:<8?} C = {:.5e}  rel-L2 {:.3e}  ({:.1}s)",
            mode,
            invert_bp::constant_for(mode, 2, &w)?,
            rel_l2_error(&rec, &truth)?,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
