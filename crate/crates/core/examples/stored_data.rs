//! Write transform data to disk, read it back, and invert from the stored
//! samples (the path the command-line tool takes).

use wrtkit::fields::{make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::forward::{windowed_ray_transform, FieldSource, QuadratureParams, VSet};
use wrtkit::invert_bp::ConstantMode;
use wrtkit::invert_fourier::{self, LineMethod};
use wrtkit::io;
use wrtkit::quadrature::log_uniform;
use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let dir = std::env::temp_dir().join("wrtkit-stored-data");
    let f = PhantomSpec::gaussian(&[0.3, -0.2], 0.5, 1.0);
    let w = WindowSpec::gaussian(1.0);
    let ugrid = make_grid(2, &[48, 48], &[24.0, 24.0], &[0.0, 0.0])?;
    let vset = VSet::polar_2d(48, 0.0, log_uniform(0.05, 3.0, 16));

    let data = windowed_ray_transform(&FieldSource::Phantom(f.clone()), &w, &ugrid, &vset, QuadratureParams::default())?;
    io::write_wrt(&dir, &data)?;
    let data = io::read_wrt(&dir)?;
    println!("{} -> {} values", dir.display(), data.values.len());

    let sigmas: Vec<f64> = (0..128).map(|k| 6.28 * k as f64 / 128.0).collect();
    let samples = invert_fourier::extract_polar_spectrum(&data, &sigmas, LineMethod::Exact)?;
    let grid = make_grid(2, &[32, 32], &[8.0, 8.0], &[0.0, 0.0])?;
    let rec = invert_fourier::reconstruct_t2(&samples, &w, &grid, ConstantMode::Derived)?;
    println!("polar-Fourier rel-L2 {:.3e}", rel_l2_error(&rec, &sample_phantom(&f, &grid)?)?);

    io::write_pgm(&dir.join("reconstruction.pgm"), &rec)?;
    Ok(())
}
