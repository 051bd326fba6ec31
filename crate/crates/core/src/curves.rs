//! LCR/AFD curves over a threshold grid by any of the three methods.

use rayon::prelude::*;

use crate::analytic::laplace_lcr;
use crate::channel::{CascadeSpec, CurvePoint, DopplerSpec, Method, SecondOrderCurve, ThresholdGrid};
use crate::error::{Error, Result};
use crate::exact::{exact_lcr, QuadratureSpec};
use crate::simulator::{simulate_taps, TraceSpec, DEFAULT_OVERSAMPLE};
use crate::specialfn::cdf_product_rayleigh;

/// Monte-Carlo settings for simulated curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub seed: u64,
    /// Trace length in seconds; when absent, `fade_cycles` periods of the
    /// slowest time-varying hop.
    pub duration: Option<f64>,
    pub fade_cycles: f64,
    pub oscillators: usize,
    /// Sample rate as a multiple of the summed hop maximum Doppler.
    pub oversample: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            seed: 1,
            duration: None,
            fade_cycles: 10_000.0,
            oscillators: 32,
            oversample: DEFAULT_OVERSAMPLE,
        }
    }
}

impl SimulationSettings {
    pub fn trace_spec(&self, cascade: &CascadeSpec) -> Result<TraceSpec> {
        let slowest = cascade
            .dopplers()
            .iter()
            .map(DopplerSpec::effective)
            .filter(|&f| f > 0.0)
            .min_by(f64::total_cmp)
            .ok_or(Error::StaticChannel)?;
        let duration = self.duration.unwrap_or(self.fade_cycles / slowest);
        Ok(TraceSpec::new(self.oversample * cascade.max_doppler_sum(), duration, self.seed)
            .with_oscillators(self.oscillators))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurveOptions {
    pub quadrature: QuadratureSpec,
    pub simulation: SimulationSettings,
}

fn point(threshold: f64, lcr: f64, cdf: f64) -> CurvePoint {
    CurvePoint {
        threshold,
        lcr,
        afd: (lcr > 0.0).then(|| cdf / lcr),
        cdf,
        lcr_se: None,
        afd_se: None,
    }
}

pub fn laplace_curve(cascade: &CascadeSpec, grid: &ThresholdGrid) -> Result<SecondOrderCurve> {
    let points = grid
        .values()
        .iter()
        .map(|&y| Ok(point(y, laplace_lcr(cascade, y)?, cdf_product_rayleigh(y, cascade)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SecondOrderCurve {
        method: Method::Laplace,
        points,
    })
}

/// Thresholds are evaluated in parallel.
pub fn exact_curve(
    cascade: &CascadeSpec,
    grid: &ThresholdGrid,
    q: &QuadratureSpec,
) -> Result<SecondOrderCurve> {
    let points = grid
        .values()
        .par_iter()
        .map(|&y| Ok(point(y, exact_lcr(cascade, y, q)?, cdf_product_rayleigh(y, cascade)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SecondOrderCurve {
        method: Method::Exact,
        points,
    })
}

pub fn simulated_curve(
    cascade: &CascadeSpec,
    grid: &ThresholdGrid,
    sim: &SimulationSettings,
) -> Result<SecondOrderCurve> {
    let spec = sim.trace_spec(cascade)?;
    let est = simulate_taps(cascade, &spec, &[cascade.n_hops()], grid)?;
    Ok(est[0].to_curve())
}

pub fn compute_curve(
    cascade: &CascadeSpec,
    grid: &ThresholdGrid,
    method: Method,
    opts: &CurveOptions,
) -> Result<SecondOrderCurve> {
    match method {
        Method::Laplace => laplace_curve(cascade, grid),
        Method::Exact => exact_curve(cascade, grid, &opts.quadrature),
        Method::Simulated => simulated_curve(cascade, grid, &opts.simulation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_curves_satisfy_identity() {
        let c = CascadeSpec::unity_gain(&[1.0, 0.7], &[1.0, 2.0]).unwrap();
        let g = ThresholdGrid::from_db(-20.0, 5.0, 5.0, 1.0).unwrap();
        for m in [Method::Laplace, Method::Exact] {
            let curve = compute_curve(&c, &g, m, &CurveOptions::default()).unwrap();
            assert_eq!(curve.method, m);
            assert_eq!(curve.points.len(), g.len());
            for p in &curve.points {
                let a = p.afd.unwrap();
                assert!(((a * p.lcr - p.cdf) / p.cdf).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_curve_refuses_five_hops() {
        let c = CascadeSpec::unity_gain(&[1.0; 5], &[1.0; 5]).unwrap();
        let g = ThresholdGrid::new(vec![1.0], 1.0).unwrap();
        assert!(matches!(
            compute_curve(&c, &g, Method::Exact, &CurveOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
