use cascade_lcr::simulator::simulate_taps;
use cascade_lcr::{
    cascade_trace, estimate_lcr_afd, exact_lcr, gen_f2m_trace, gen_m2m_trace, rayleigh_lcr,
    CascadeSpec, QuadratureSpec, ThresholdGrid, TraceSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Peak of the single-hop normalized LCR, `√(π/e)`.
const RAYLEIGH_PEAK: f64 = 1.075_047_603_499_920_3;

#[test]
fn fixed_to_mobile_mean_power_and_peak_lcr() {
    let spec = TraceSpec::new(1280.0, 200.0, 11);
    let t = gen_f2m_trace(1.0, 10.0, &spec).unwrap();
    assert!((t.mean_power() - 1.0).abs() < 0.02, "{}", t.mean_power());
    let g = ThresholdGrid::new(vec![0.5f64.sqrt()], 1.0).unwrap();
    let e = estimate_lcr_afd(&t, &g).unwrap();
    assert!(rel(e.points[0].lcr, RAYLEIGH_PEAK * 10.0) < 0.05, "{}", e.points[0].lcr);
}

#[test]
fn mobile_to_mobile_peak_uses_combined_doppler() {
    let spec = TraceSpec::new(128.0 * 7.0, 400.0, 12);
    let t = gen_m2m_trace(2.0, 3.0, 4.0, &spec).unwrap();
    assert!((t.mean_power() - 2.0).abs() < 0.04);
    let g = ThresholdGrid::new(vec![1.0], 2.0).unwrap();
    let e = estimate_lcr_afd(&t, &g).unwrap();
    assert!(rel(e.points[0].lcr, RAYLEIGH_PEAK * 5.0) < 0.05, "{}", e.points[0].lcr);
}

#[test]
fn degenerate_mobile_to_mobile_matches_fixed_to_mobile() {
    let g = ThresholdGrid::from_db(-20.0, 3.0, 23.0 / 9.0, 1.0).unwrap();
    let spec = TraceSpec::new(1280.0, 1000.0, 13);
    let a = estimate_lcr_afd(&gen_m2m_trace(1.0, 10.0, 0.0, &spec).unwrap(), &g).unwrap();
    let b = estimate_lcr_afd(&gen_f2m_trace(1.0, 10.0, &spec.with_repetition(1)).unwrap(), &g).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        assert!(rel(p.lcr, q.lcr) < 0.05, "{} vs {} at {}", p.lcr, q.lcr, p.threshold);
    }
}

#[test]
fn oversampling_factor_does_not_bias_crossings() {
    // Same seed, so the same continuous process is sampled at three rates.
    let g = ThresholdGrid::from_db(-20.0, 3.0, 23.0 / 9.0, 1.0).unwrap();
    let at = |k: f64| {
        let spec = TraceSpec::new(k * 10.0, 300.0, 14);
        estimate_lcr_afd(&gen_f2m_trace(1.0, 10.0, &spec).unwrap(), &g).unwrap()
    };
    let (lo, mid, hi) = (at(64.0), at(128.0), at(256.0));
    for j in 0..g.len() {
        assert!(rel(lo.points[j].lcr, mid.points[j].lcr) < 0.05);
        assert!(rel(hi.points[j].lcr, mid.points[j].lcr) < 0.01);
        assert!(rel(mid.points[j].lcr, rayleigh_lcr(1.0, 10.0, g.values()[j]).unwrap()) < 0.05);
    }
}

#[test]
fn dual_hop_product_has_mean_power_phi() {
    let c = CascadeSpec::unity_gain(&[1.0, 1.0], &[10.0, 10.0]).unwrap();
    let t = cascade_trace(&c, &TraceSpec::for_cascade(&c, 300.0, 15)).unwrap();
    assert!((t.mean_power() - 1.0).abs() < 0.05, "{}", t.mean_power());
    let c = CascadeSpec::unity_gain(&[0.5, 3.0], &[10.0, 4.0]).unwrap();
    let t = cascade_trace(&c, &TraceSpec::for_cascade(&c, 800.0, 15)).unwrap();
    assert!(rel(t.mean_power(), 1.5) < 0.05, "{}", t.mean_power());
}

#[test]
fn hop_order_does_not_change_the_lcr() {
    let g = ThresholdGrid::from_db(-15.0, 0.0, 7.5, 1.0).unwrap();
    let a = CascadeSpec::unity_gain(&[1.0, 0.5, 2.0], &[5.0, 10.0, 2.5]).unwrap();
    let b = CascadeSpec::unity_gain(&[2.0, 1.0, 0.5], &[2.5, 5.0, 10.0]).unwrap();
    let spec = TraceSpec::for_cascade(&a, 1000.0, 16);
    // Mean and standard error over four independent repetitions per order.
    let pooled = |c: &CascadeSpec, first: u32| {
        let mut mean = vec![0.0; g.len()];
        let mut var = vec![0.0; g.len()];
        for rep in first..first + 4 {
            let e = estimate_lcr_afd(&cascade_trace(c, &spec.with_repetition(rep)).unwrap(), &g).unwrap();
            for (j, p) in e.points.iter().enumerate() {
                mean[j] += p.lcr / 4.0;
                var[j] += p.lcr_se.powi(2) / 16.0;
            }
        }
        (mean, var)
    };
    let (ma, va) = pooled(&a, 0);
    let (mb, vb) = pooled(&b, 4);
    for j in 0..g.len() {
        let se = (va[j] + vb[j]).sqrt();
        assert!((ma[j] - mb[j]).abs() <= 2.0 * se, "{} vs {} (se {se})", ma[j], mb[j]);
    }
}

#[test]
fn simulated_cascades_follow_the_exact_lcr() {
    let q = QuadratureSpec::default();
    for n in [2usize, 3] {
        let c = CascadeSpec::unity_gain(&vec![1.0; n], &vec![10.0; n]).unwrap();
        let g = ThresholdGrid::from_db(-25.0, -3.0 * n as f64, 2.5, 1.0).unwrap();
        let spec = TraceSpec::for_cascade(&c, 2000.0, 17);
        let est = &simulate_taps(&c, &spec, &[n], &g).unwrap()[0];
        for p in &est.points {
            let e = exact_lcr(&c, p.threshold, &q).unwrap();
            assert!(rel(p.lcr, e) < 0.06, "N={n}: {} vs {e} at {}", p.lcr, p.threshold);
        }
    }
}

#[test]
fn identical_specs_give_identical_traces() {
    let c = CascadeSpec::unity_gain(&[1.0, 2.0], &[3.0, 7.0]).unwrap();
    let spec = TraceSpec::for_cascade(&c, 50.0, 99);
    let a = cascade_trace(&c, &spec).unwrap();
    let b = cascade_trace(&c, &spec).unwrap();
    assert_eq!(a.samples, b.samples);
    let other = cascade_trace(&c, &TraceSpec { seed: 100, ..spec }).unwrap();
    assert_ne!(a.samples, other.samples);
}
