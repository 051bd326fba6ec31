use cascade_lcr::analytic::numeric_gradient;
use cascade_lcr::{
    cdf_product_rayleigh, exact_lcr, laplace_afd, laplace_lcr, lcr_critical_point, lcr_hessian,
    lcr_laplace_problem, product_exp_cdf, rayleigh_lcr, CascadeSpec, CdfEvalOptions,
    QuadratureSpec,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn power() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

fn doppler() -> impl Strategy<Value = f64> {
    0.5f64..100.0
}

fn hops(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (prop::collection::vec(power(), n), prop::collection::vec(doppler(), n)))
}

/// Threshold as dB relative to `√Φ`.
fn level_db() -> impl Strategy<Value = f64> {
    -30.0f64..10.0
}

fn threshold(c: &CascadeSpec, db: f64) -> f64 {
    c.phi().sqrt() * 10f64.powf(db / 20.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_hop_laplace_is_rayleigh(om in power(), f in doppler(), db in level_db()) {
        let c = CascadeSpec::unity_gain(&[om], &[f]).unwrap();
        let y = threshold(&c, db);
        prop_assert!(rel(laplace_lcr(&c, y).unwrap(), rayleigh_lcr(om, f, y).unwrap()) < 1e-12);
    }

    #[test]
    fn laplace_lcr_is_invariant_to_hop_order((om, f) in hops(2..=6), db in level_db(), k in 0usize..6) {
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let mut om2 = om.clone();
        let mut f2 = f.clone();
        let r = k % om.len();
        om2.rotate_left(r);
        f2.rotate_left(r);
        let c2 = CascadeSpec::unity_gain(&om2, &f2).unwrap();
        let y = threshold(&c, db);
        prop_assert!(rel(laplace_lcr(&c, y).unwrap(), laplace_lcr(&c2, y).unwrap()) < 1e-12);
        prop_assert!(rel(cdf_product_rayleigh(y, &c).unwrap(), cdf_product_rayleigh(y, &c2).unwrap()) < 1e-9);
    }

    #[test]
    fn curves_depend_on_threshold_through_y_over_sqrt_phi(
        (om, f) in hops(1..=5), db in level_db(), a in power(),
    ) {
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let scaled: Vec<f64> = om.iter().map(|o| o * a).collect();
        let cs = CascadeSpec::unity_gain(&scaled, &f).unwrap();
        let y = threshold(&c, db);
        let ys = threshold(&cs, db);
        prop_assert!(rel(laplace_lcr(&c, y).unwrap(), laplace_lcr(&cs, ys).unwrap()) < 1e-10);
        prop_assert!(rel(cdf_product_rayleigh(y, &c).unwrap(), cdf_product_rayleigh(ys, &cs).unwrap()) < 1e-9);
    }

    #[test]
    fn lcr_scales_with_doppler_and_afd_inversely((om, f) in hops(1..=5), db in level_db(), s in 0.1f64..10.0) {
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let fs: Vec<f64> = f.iter().map(|v| v * s).collect();
        let cs = CascadeSpec::unity_gain(&om, &fs).unwrap();
        let y = threshold(&c, db);
        prop_assert!(rel(laplace_lcr(&cs, y).unwrap(), s * laplace_lcr(&c, y).unwrap()) < 1e-12);
        prop_assert!(rel(laplace_afd(&cs, y).unwrap(), laplace_afd(&c, y).unwrap() / s) < 1e-12);
    }

    #[test]
    fn hessian_is_positive_definite_with_closed_form_determinant((om, f) in hops(2..=7)) {
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let h = lcr_hessian(&c).unwrap();
        prop_assert!(h.is_positive_definite());
        prop_assert!(rel(h.determinant, h.numeric_determinant()) < 1e-9);
    }

    #[test]
    fn critical_point_is_stationary((om, f) in hops(2..=6), db in level_db()) {
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let y = threshold(&c, db);
        let p = lcr_laplace_problem(&c, y).unwrap();
        let h = |x: &[f64]| (p.h)(x);
        let x = lcr_critical_point(&c, y).unwrap();
        let g = numeric_gradient(&h, &x);
        let scale = x.iter().zip(&om).map(|(x, o)| x / o).fold(0.0, f64::max);
        prop_assert!(g.iter().all(|v| v.abs() <= 1e-6 * scale), "{g:?}");
    }

    #[test]
    fn product_cdf_is_a_distribution(n in 1usize..=6, lz in -8.0f64..1.3) {
        let opts = CdfEvalOptions::default();
        let z = 10f64.powf(lz);
        let a = product_exp_cdf(z, n, &opts).unwrap();
        let b = product_exp_cdf(1.1 * z, n, &opts).unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(b > a);
        // More factors spread the product, lifting the CDF below the median.
        if z < 1e-2 && n > 1 {
            prop_assert!(a > product_exp_cdf(z, n - 1, &opts).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_lcr_is_invariant_to_hop_order((om, f) in hops(2..=3), db in -25.0f64..6.0) {
        let q = QuadratureSpec::default();
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let mut om2 = om.clone();
        let mut f2 = f.clone();
        om2.reverse();
        f2.reverse();
        let c2 = CascadeSpec::unity_gain(&om2, &f2).unwrap();
        let y = threshold(&c, db);
        prop_assert!(rel(exact_lcr(&c, y, &q).unwrap(), exact_lcr(&c2, y, &q).unwrap()) < 1e-6);
    }

    #[test]
    fn exact_lcr_matches_laplace_above_the_peak((om, f) in hops(2..=3), db in 4.0f64..10.0) {
        // Laplace becomes asymptotically exact as the threshold grows.
        let q = QuadratureSpec::default();
        let c = CascadeSpec::unity_gain(&om, &f).unwrap();
        let y = threshold(&c, db);
        let e = exact_lcr(&c, y, &q).unwrap();
        prop_assert!(rel(laplace_lcr(&c, y).unwrap(), e) < 0.05);
    }
}
