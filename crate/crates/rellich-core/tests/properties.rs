//! Property tests for the operator invariants and the report covariances.

use proptest::prelude::*;

use rellich_core::checks::{check_lp_bounds, check_slope_bounds};
use rellich_core::conformal::{theodorsen_solve, TheodorsenParams};
use rellich_core::dtn::dtn_conformal;
use rellich_core::field::{FourierSpec, PeriodicGrid, SampledField, TWO_PI};
use rellich_core::spectral::{
    abs_d, analyze, derivative, h_minus1_norm, hilbert, integrate, l2_norm,
};
use rellich_core::surface::build_surface;

const M: usize = 64;

fn coeffs(max_mode: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), max_mode)
}

fn field_from(coeffs: &[(f64, f64)]) -> SampledField {
    let grid = PeriodicGrid::line(M).unwrap();
    SampledField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &(c, s))| {
                let k = (i + 1) as f64;
                c * (k * x[0]).cos() + s * (k * x[0]).sin()
            })
            .sum()
    })
    .unwrap()
}

fn max_diff(a: &SampledField, b: &SampledField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_squared_is_negative_projection(c in coeffs(8), mean in -2.0f64..2.0) {
        let f = field_from(&c).map(|v| v + mean).unwrap();
        let hh = hilbert(&hilbert(&f).unwrap()).unwrap();
        let f_mean = f.mean();
        let expected = f.map(|v| -(v - f_mean)).unwrap();
        prop_assert!(max_diff(&hh, &expected) <= 1e-12);
    }

    #[test]
    fn parseval(c in coeffs(8), mean in -2.0f64..2.0) {
        let f = field_from(&c).map(|v| v + mean).unwrap();
        let spec = analyze(&f);
        let sum: f64 = spec.coeffs().iter().map(|z| z.norm_sqr()).sum();
        let sq = integrate(&f.zip(&f, |a, b| a * b).unwrap());
        prop_assert!((sq - TWO_PI * sum).abs() <= 1e-12 * (1.0 + sq.abs()));
    }

    #[test]
    fn derivative_integrates_to_zero(c in coeffs(8), mean in -2.0f64..2.0) {
        let f = field_from(&c).map(|v| v + mean).unwrap();
        prop_assert!(integrate(&derivative(&f, 0).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn abs_d_factorizes(c in coeffs(8)) {
        let f = field_from(&c);
        let lhs = abs_d(&f).unwrap();
        let rhs = hilbert(&derivative(&f, 0).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn dual_norm_calibration(c in coeffs(8), mean in -2.0f64..2.0) {
        let g = field_from(&c).map(|v| v + mean).unwrap();
        let lhs = h_minus1_norm(&derivative(&g, 0).unwrap()).unwrap();
        let g_mean = g.mean();
        let rhs = l2_norm(&g.map(|v| v - g_mean).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }
}

proptest! {
    // Each case runs a full boundary solve; keep the count moderate.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ratios_invariant_under_data_scaling(
        scale in prop::sample::select(vec![0.25f64, 3.0, -2.0, 17.5]),
        h_amp in 0.05f64..0.3,
    ) {
        let grid = PeriodicGrid::line(128).unwrap();
        let spec = FourierSpec::line(&[(1, h_amp, 0.0), (2, 0.0, 0.3 * h_amp)]);
        let s = build_surface(spec.sample(&grid).unwrap()).unwrap();
        let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
        let zeta = SampledField::from_fn(grid, |x| {
            x[0].cos() + 0.4 * (3.0 * x[0]).sin()
        }).unwrap();
        let scaled = zeta.map(|v| scale * v).unwrap();

        let t1 = dtn_conformal(&cb, &s, &zeta).unwrap();
        let t2 = dtn_conformal(&cb, &s, &scaled).unwrap();

        // Degree-2 bounds: lhs and rhs both scale by c^2, ratio unchanged.
        let (a1, b1) = check_slope_bounds(&t1, 1e-6).unwrap();
        let (a2, b2) = check_slope_bounds(&t2, 1e-6).unwrap();
        prop_assert!((a1.ratio - a2.ratio).abs() <= 1e-12 * (1.0 + a1.ratio));
        prop_assert!((b1.ratio - b2.ratio).abs() <= 1e-12 * (1.0 + b1.ratio));
        let c2 = scale * scale;
        prop_assert!((a2.lhs - c2 * a1.lhs).abs() <= 1e-10 * (1.0 + a2.lhs.abs()));

        // L^p bounds: both sides scale by |c|^p, ratio unchanged.
        let (w1, _) = check_lp_bounds(&t1, 1.5).unwrap();
        let (w1s, _) = check_lp_bounds(&t2, 1.5).unwrap();
        prop_assert!((w1.ratio - w1s.ratio).abs() <= 1e-11 * (1.0 + w1.ratio));
    }

    #[test]
    fn ratios_invariant_under_grid_shift(shift in 0usize..128) {
        // (h, zeta) -> (h(.-a), zeta(.-a)) for a grid-commensurate a.
        let grid = PeriodicGrid::line(128).unwrap();
        let a = TWO_PI * shift as f64 / 128.0;
        let h = |x: f64| 0.25 * x.cos() + 0.1 * (2.0 * x).sin();
        let z = |x: f64| x.cos() + 0.4 * (3.0 * x).sin();

        let evaluate = |offset: f64| {
            let s = build_surface(
                SampledField::from_fn(grid.clone(), |x| h(x[0] - offset)).unwrap(),
            )
            .unwrap();
            let cb = theodorsen_solve(&s, TheodorsenParams::default()).unwrap();
            let zeta = SampledField::from_fn(grid.clone(), |x| z(x[0] - offset)).unwrap();
            let t = dtn_conformal(&cb, &s, &zeta).unwrap();
            let (r1, r2) = check_slope_bounds(&t, 1e-6).unwrap();
            (r1.ratio, r2.ratio)
        };

        let base = evaluate(0.0);
        let shifted = evaluate(a);
        prop_assert!((base.0 - shifted.0).abs() <= 1e-8 * (1.0 + base.0));
        prop_assert!((base.1 - shifted.1).abs() <= 1e-8 * (1.0 + base.1));
    }
}
