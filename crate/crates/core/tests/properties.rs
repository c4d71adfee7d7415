use proptest::prelude::*;

use wrtkit::fields::{continuous_ft, continuous_ift, make_grid, rel_l2_error, sample_phantom, PhantomSpec};
use wrtkit::forward::{line_integral, windowed_ray_transform, FieldSource, QuadratureParams, VSet};
use wrtkit::invert_bp::{self, BPParams, ConstantMode, QuadratureRays};
use wrtkit::windows::{Parity, WindowSpec};

fn window_strategy() -> impl Strategy<Value = WindowSpec> {
    prop_oneof![
        (0.4f64..2.0).prop_map(WindowSpec::gaussian),
        (0.4f64..2.0).prop_map(WindowSpec::hermite1),
        (0.5f64..2.0).prop_map(WindowSpec::bump),
    ]
}

fn bump_strategy() -> impl Strategy<Value = PhantomSpec> {
    ((-1.0f64..1.0), (-1.0f64..1.0), (0.5f64..1.0), (0.2f64..2.0))
        .prop_map(|(x, y, s, a)| PhantomSpec::gaussian(&[x, y], s, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ft_roundtrip_parseval_and_symmetry(f in bump_strategy()) {
        let g = make_grid(2, &[64, 64], &[20.0, 20.0], &[0.0, 0.0]).unwrap();
        let field = sample_phantom(&f, &g).unwrap();
        prop_assume!(field.boundary_max() < 1e-12);
        let spec = continuous_ft(&field, 1);
        let back = continuous_ift(&spec, &g).unwrap();
        prop_assert!(rel_l2_error(&back, &field).unwrap() <= 1e-9);

        let lhs: f64 = field.values.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let rhs: f64 = spec.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * spec.grid.cell_volume()
            / (2.0 * std::f64::consts::PI).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs);
        prop_assert!(spec.conjugate_symmetry_defect() <= 1e-12);
    }

    #[test]
    fn window_spectrum_symmetries(w in window_strategy(), eta in -20.0f64..20.0) {
        let (p, m) = (w.ft(eta), w.ft(-eta));
        prop_assert!((m - p.conj()).norm() <= 1e-12);
        match w.parity() {
            Parity::Even => {
                prop_assert!(p.im.abs() <= 1e-12);
                prop_assert!((p - m).norm() <= 1e-12);
            }
            Parity::Odd => {
                prop_assert!(p.re.abs() <= 1e-12);
                prop_assert!((p + m).norm() <= 1e-12);
            }
            Parity::Neither => {}
        }
    }

    #[test]
    fn forward_is_linear(f in bump_strategy(), g in bump_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0,
                         w in window_strategy()) {
        let grid = make_grid(2, &[6, 6], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let vset = VSet::polar_2d(3, 0.2, vec![0.6, 1.7]);
        let quad = QuadratureParams::default();
        let run = |p: PhantomSpec| windowed_ray_transform(&FieldSource::Phantom(p), &w, &grid, &vset, quad).unwrap();
        let parts = |p: &PhantomSpec| match p {
            PhantomSpec::Gaussian { center, sigma, amplitude } => (center.clone(), *sigma, *amplitude),
            _ => unreachable!(),
        };
        let (cf, sf, af) = parts(&f);
        let (cg, sg, ag) = parts(&g);
        let mix = PhantomSpec::mixture(vec![(cf, sf, a * af), (cg, sg, b * ag)]);
        let (df, dg, dm) = (run(f), run(g), run(mix));
        let scale = df.max_abs().max(dg.max_abs()).max(1e-300);
        for i in 0..dm.values.len() {
            let lin = df.values[i] * a + dg.values[i] * b;
            prop_assert!((dm.values[i] - lin).norm() <= 1e-12 * scale * (a.abs() + b.abs() + 1.0));
        }
    }

    #[test]
    fn forward_is_shift_equivariant(f in bump_strategy(), sx in -1.0f64..1.0, sy in -1.0f64..1.0,
                                    ux in -2.0f64..2.0, uy in -2.0f64..2.0, angle in 0.0f64..6.3, r in 0.2f64..3.0) {
        let w = WindowSpec::gaussian(1.0);
        let PhantomSpec::Gaussian { center, sigma, amplitude } = &f else { unreachable!() };
        let shifted = PhantomSpec::gaussian(&[center[0] + sx, center[1] + sy], *sigma, *amplitude);
        let v = [r * angle.cos(), r * angle.sin()];
        let quad = QuadratureParams::default();
        let moved = line_integral(&FieldSource::Phantom(shifted), &w, &[ux, uy], &v, quad);
        let orig = line_integral(&FieldSource::Phantom(f.clone()), &w, &[ux - sx, uy - sy], &v, quad);
        prop_assert!((moved - orig).norm() <= 1e-8 * orig.norm().max(1e-8));
    }

    #[test]
    fn panel_doubling_is_converged(f in bump_strategy(), ux in -2.0f64..2.0, uy in -2.0f64..2.0,
                                   angle in 0.0f64..6.3, r in 0.2f64..3.0, s in 0.5f64..2.0) {
        let w = WindowSpec::gaussian(s);
        let v = [r * angle.cos(), r * angle.sin()];
        let src = FieldSource::Phantom(f);
        let a = line_integral(&src, &w, &[ux, uy], &v, QuadratureParams { panels: 32 });
        let b = line_integral(&src, &w, &[ux, uy], &v, QuadratureParams { panels: 64 });
        prop_assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn backprojection_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let w = WindowSpec::gaussian(1.0);
        let grid = make_grid(2, &[6, 6], &[4.0, 4.0], &[0.0, 0.0]).unwrap();
        let params = BPParams { n_radii: 12, n_directions: 4, constant_mode: ConstantMode::Derived, ..BPParams::default() };
        let quad = QuadratureParams::default();
        let rec = |p: PhantomSpec| {
            let src = QuadratureRays { source: FieldSource::Phantom(p), window: w.clone(), quad };
            invert_bp::reconstruct_t1(&src, &w, &grid, &params).unwrap()
        };
        let rf = rec(PhantomSpec::gaussian(&[0.2, 0.0], 0.6, 1.0));
        let rg = rec(PhantomSpec::gaussian(&[-0.5, 0.4], 0.8, 1.0));
        let rm = rec(PhantomSpec::mixture(vec![(vec![0.2, 0.0], 0.6, a), (vec![-0.5, 0.4], 0.8, b)]));
        let scale = rf.max_abs().max(rg.max_abs());
        for i in 0..rm.values.len() {
            let lin = a * rf.values[i] + b * rg.values[i];
            prop_assert!((rm.values[i] - lin).abs() <= 1e-10 * scale * (a.abs() + b.abs() + 1.0));
        }
    }
}
