//! Slice inversion from data on v = (v₁, 0): residual of the slice identity
//! as the v₁ range grows, then a full reconstruction at two values of a.

use wrtkit::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::forward::FieldSource;
use wrtkit::invert_slice::{self, Apodization, SliceDataset, SliceMode, SliceParams};
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0);
    let w = WindowSpec::gaussian(1.0);
    let src = FieldSource::Phantom(f.clone());
    let sigmas: Vec<f64> = (1..=24).map(|k| 0.25 * k as f64).collect();

    for v in [2.0, 4.0, 8.0, 16.0] {
        let u1 = invert_slice::u1_sampling(4.0, &w, v, 0.25)?;
        let ds = SliceDataset::generate(&src, &w, u1, &[0.0], &invert_slice::v1_samples(v, 0.125), 0.0, Apodization::Hann)?;
        let spec = invert_slice::slice_extract(&ds, &w, &SliceParams { a: 0.0, sigmas: sigmas.clone(), mode: SliceMode::Full })?;
        let res = invert_slice::identity_residual(&spec, 0.5, 6.0, |s, z| f.fourier_first_axis(s, &[z]).unwrap());
        println!("V = {v:4}  identity residual {res:.3e}");
    }

    let grid = make_grid(2, &[48, 48], &[8.0, 8.0], &[0.0, 0.0])?;
    let truth = sample_phantom(&f, &grid)?;
    let u1 = invert_slice::u1_sampling(4.0, &w, 16.0, 0.25)?;
    let ds = SliceDataset::generate(&src, &w, u1, &grid.axis_coords(1), &invert_slice::v1_samples(16.0, 0.125), 0.0, Apodization::Hann)?;
    for a in [0.0, 0.5] {
        let (rec, spec) = invert_slice::reconstruct_slice(&ds, &w, a, &grid)?;
        println!(
            "a = {a}  h(a) = {:.4}  rel-L2 {:.3e}  dc extrapolated: {}",
            w.eval_real(a),
            rel_l2_error(&rec, &truth)?,
            spec.dc_extrapolated
        );
    }
    Ok(())
}
