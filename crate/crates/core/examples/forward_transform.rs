//! Windowed ray transform of a Gaussian phantom on a polar v-set, checked
//! against the closed form and the Fourier identity.

use wrtkit::fields::{make_grid, PhantomSpec};
use wrtkit::forward::{analytic_wrt, fourier_identity_residual, windowed_ray_transform, FieldSource, QuadratureParams, VSet};
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::gaussian(&[0.3, 0.0], 1.0, 1.0);
    let w = WindowSpec::gaussian(1.0);
    let grid = make_grid(2, &[64, 64], &[24.0, 24.0], &[0.0, 0.0])?;
    let vset = VSet::polar_2d(8, 0.0, vec![0.5, 1.0, 2.0]);

    let data = windowed_ray_transform(&FieldSource::Phantom(f.clone()), &w, &grid, &vset, QuadratureParams::default())?;
    println!("{} u-points × {} v-samples, dtype {}", grid.len(), data.nv(), data.dtype());

    let peak = data.max_abs();
    let mut worst: f64 = 0.0;
    for j in 0..data.nv() {
        let v = vset.vector(j);
        for i in 0..grid.len() {
            let exact = analytic_wrt(&f, &w, &grid.point(i), &v).unwrap();
            worst = worst.max((data.get(i, j).re - exact).abs() / exact.abs().max(1e-6 * peak));
        }
    }
    println!("max rel deviation from closed form {worst:.2e}");
    println!("Fourier identity residual           {:.2e}", fourier_identity_residual(&data, &f, &w)?);
    Ok(())
}
