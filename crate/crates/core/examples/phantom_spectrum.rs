//! Sample a Gaussian phantom, take its continuous FT, and compare with the
//! closed form.

use wrtkit::fields::{continuous_ft, continuous_ift, make_grid, rel_l2_error, sample_phantom, PhantomSpec};

fn main() -> wrtkit::error::Result<()> {
    let f = PhantomSpec::mixture(vec![(vec![0.5, 0.0], 0.6, 1.0), (vec![-1.0, 0.8], 0.9, 0.5)]);
    let grid = make_grid(2, &[96, 96], &[24.0, 24.0], &[0.0, 0.0])?;
    let field = sample_phantom(&f, &grid)?;
    let spec = continuous_ft(&field, 1);

    let mut worst: f64 = 0.0;
    for (i, v) in spec.values.iter().enumerate() {
        let exact = f.fourier(&spec.grid.point(i)).unwrap();
        worst = worst.max((v - exact).norm());
    }
    let back = continuous_ift(&spec, &grid)?;
    println!("convention       {}", spec.convention());
    println!("max |F - f̂|      {worst:.3e}");
    println!("roundtrip rel-L2 {:.3e}", rel_l2_error(&back, &field)?);
    println!("conj. symmetry   {:.3e}", spec.conjugate_symmetry_defect());
    Ok(())
}
