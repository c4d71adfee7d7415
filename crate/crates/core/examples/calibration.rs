//! Fit the normalising constant of both backprojection-type inversions and
//! compare it with the published and derived values.

use wrtkit::calibrate::{self, CalibrationSetup, Method};
use wrtkit::fields::make_grid;
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let grid = make_grid(2, &[24, 24], &[8.0, 8.0], &[0.0, 0.0])?;
    let w = WindowSpec::gaussian(1.0);
    for method in [Method::T1, Method::T2] {
        let r = calibrate::calibrate(method, &w, &calibrate::default_phantoms(), &grid, &CalibrationSetup::default())?;
        println!(
            "{method:?}: α = {:.6e}  α/published = {:.5}  α/derived = {:.5}  CV = {:.2e}",
            r.fitted_alpha, r.ratio, r.ratio_derived, r.cv
        );
        for p in &r.per_phantom {
            println!("    α = {:.6e}  rel-L2 {:.2e}", p.alpha, p.rel_l2_mean);
        }
    }
    Ok(())
}
