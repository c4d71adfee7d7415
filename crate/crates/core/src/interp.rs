//! Tensor-product cubic convolution (Keys, a = -1/2) on uniform grids with
//! zero extension outside the sampled box.

use crate::fields::Grid;

/// Keys cubic convolution weights for the four samples around fractional offset `s ∈ [0,1)`.
#[inline]
pub fn keys_weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        -0.5 * s3 + s2 - 0.5 * s,
        1.5 * s3 - 2.5 * s2 + 1.0,
        -1.5 * s3 + 2.0 * s2 + 0.5 * s,
        0.5 * s3 - 0.5 * s2,
    ]
}

/// Cubic interpolation of grid samples at physical point `x`; `get(flat)`
/// returns the sample at a row-major grid index. Samples outside the grid
/// count as zero.
pub fn cubic_eval<F: Fn(usize) -> f64>(grid: &Grid, x: &[f64], get: F) -> f64 {
    let n = grid.n();
    debug_assert_eq!(x.len(), n);
    const MAX_DIM: usize = 4;
    assert!(n <= MAX_DIM, "cubic interpolation supports up to {MAX_DIM} dimensions");
    let mut base = [0isize; MAX_DIM];
    let mut w = [[0.0; 4]; MAX_DIM];
    for k in 0..n {
        let fi = grid.fractional_index(k, x[k]);
        if !(fi > -2.0 && fi < grid.shape[k] as f64 + 1.0) {
            return 0.0;
        }
        let i0 = fi.floor();
        base[k] = i0 as isize - 1;
        w[k] = keys_weights(fi - i0);
    }
    let strides = grid.strides();
    let mut total = 0.0;
    let combos = 4usize.pow(n as u32);
    'outer: for c in 0..combos {
        let mut rem = c;
        let mut flat = 0usize;
        let mut weight = 1.0;
        for k in 0..n {
            let o = rem % 4;
            rem /= 4;
            let i = base[k] + o as isize;
            if i < 0 || i >= grid.shape[k] as isize {
                continue 'outer;
            }
            flat += i as usize * strides[k];
            weight *= w[k][o];
        }
        if weight != 0.0 {
            total += weight * get(flat);
        }
    }
    total
}

/// One-dimensional cubic interpolation on samples `values` at `x0 + i·dx`.
pub fn cubic_eval_1d(values: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let fi = (x - x0) / dx;
    if !(fi > -2.0 && fi < values.len() as f64 + 1.0) {
        return 0.0;
    }
    let i0 = fi.floor();
    let w = keys_weights(fi - i0);
    let base = i0 as isize - 1;
    let mut total = 0.0;
    for (o, wo) in w.iter().enumerate() {
        let i = base + o as isize;
        if i >= 0 && (i as usize) < values.len() {
            total += wo * values[i as usize];
        }
    }
    total
}
