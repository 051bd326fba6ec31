//! The five-hop relay scenarios behind figure ids 2 to 7.
//!
//! Five hops `S → T1 → T2 → T3 → T4 → D` with unit mean hop power and
//! semi-blind relays. The source and the four relays move with the same
//! maximum Doppler `fm`; the destination is fixed. Curves are reported at
//! the relays `T2` and `T3` and at the destination, i.e. after 2, 3 and 5
//! hops, on normalized axes (`y/√Ω̂` in dB, `N/fm`, `T·fm`).

use crate::channel::{db_to_power_ratio, CascadeSpec, HopSpec, RelayGain, SecondOrderCurve, ThresholdGrid};
use crate::curves::{laplace_curve, SimulationSettings};
use crate::error::{Error, Result};
use crate::simulator::{scenario_phi, simulate_taps, SnrScenario};

/// Hop counts at which curves are reported.
pub const FIGURE_TAPS: [usize; 3] = [2, 3, 5];
pub const FIGURE_HOPS: usize = 5;
/// Doppler used when none is given; normalized curves do not depend on it.
pub const DEFAULT_FM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Lcr,
    Afd,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Lcr => "lcr",
            Metric::Afd => "afd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureScenario {
    pub id: u8,
    pub metric: Metric,
    /// Mean SNR of each hop in dB.
    pub snrs_db: Vec<f64>,
    pub fm: f64,
    pub omega_hat: f64,
}

impl FigureScenario {
    pub fn new(id: u8) -> Result<Self> {
        let snrs_db = match id {
            2 | 3 => vec![5.0; FIGURE_HOPS],
            4 | 5 => vec![20.0; FIGURE_HOPS],
            6 | 7 => vec![0.0, 10.0, 15.0, 15.0, 20.0],
            _ => {
                return Err(Error::invalid(format!(
                    "unknown figure id {id}; expected one of 2, 3, 4, 5, 6, 7"
                )))
            }
        };
        Ok(FigureScenario {
            id,
            metric: if id.is_multiple_of(2) { Metric::Lcr } else { Metric::Afd },
            snrs_db,
            fm: DEFAULT_FM,
            omega_hat: 1.0,
        })
    }

    pub fn with_fm(mut self, fm: f64) -> Self {
        self.fm = fm;
        self
    }

    pub fn snr_scenario(&self) -> SnrScenario {
        if self.snrs_db.windows(2).all(|w| w[0] == w[1]) {
            SnrScenario::EqualSnr
        } else {
            SnrScenario::UnequalSnr
        }
    }

    /// Node Doppler shifts `(f_mS, f_m1, …, f_m4, f_mD)`.
    pub fn node_dopplers(&self) -> Vec<f64> {
        let mut nodes = vec![self.fm; FIGURE_HOPS + 1];
        nodes[FIGURE_HOPS] = 0.0;
        nodes
    }

    /// The full five-hop cascade.
    pub fn cascade(&self) -> Result<CascadeSpec> {
        let hops = self
            .snrs_db
            .iter()
            .map(|&d| HopSpec::new(self.omega_hat)?.with_snr_db(d))
            .collect::<Result<Vec<_>>>()?;
        let mut gains = vec![RelayGain::Unity];
        gains.extend(std::iter::repeat_n(RelayGain::SemiBlind, FIGURE_HOPS - 1));
        CascadeSpec::from_nodes(hops, &self.node_dopplers(), gains)
    }

    /// `Φ` after `n_hops` hops from the closed form for semi-blind relays.
    pub fn phi(&self, n_hops: usize) -> Result<f64> {
        let lin: Vec<f64> = self.snrs_db.iter().map(|&d| db_to_power_ratio(d)).collect();
        match self.snr_scenario() {
            SnrScenario::EqualSnr => scenario_phi(SnrScenario::EqualSnr, self.omega_hat, &lin[..1], n_hops),
            SnrScenario::UnequalSnr => {
                scenario_phi(SnrScenario::UnequalSnr, self.omega_hat, &lin[..n_hops], n_hops)
            }
        }
    }
}

/// Curves of one tap.
#[derive(Debug, Clone, PartialEq)]
pub struct TapCurves {
    pub n_hops: usize,
    pub laplace: SecondOrderCurve,
    pub simulated: Option<SecondOrderCurve>,
}

/// Laplace curves for every tap and, when `sim` is given, simulated curves
/// from a single pass over the five-hop cascade. The sample rate is that of
/// the full cascade for every tap.
pub fn run_figure(
    scenario: &FigureScenario,
    grid: &ThresholdGrid,
    sim: Option<&SimulationSettings>,
) -> Result<Vec<TapCurves>> {
    let cascade = scenario.cascade()?;
    let simulated = match sim {
        Some(s) => {
            let spec = s.trace_spec(&cascade)?;
            let est = simulate_taps(&cascade, &spec, &FIGURE_TAPS, grid)?;
            est.iter().map(|e| Some(e.to_curve())).collect()
        }
        None => vec![None; FIGURE_TAPS.len()],
    };
    FIGURE_TAPS
        .iter()
        .zip(simulated)
        .map(|(&n, sim)| {
            Ok(TapCurves {
                n_hops: n,
                laplace: laplace_curve(&cascade.prefix(n)?, grid)?,
                simulated: sim,
            })
        })
        .collect()
}

/// Default figure grid: −30 dB to +10 dB in 0.5 dB steps of `y/√Ω̂`.
pub fn default_grid(omega_hat: f64) -> Result<ThresholdGrid> {
    ThresholdGrid::from_db(-30.0, 10.0, 0.5, omega_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios() {
        assert!(FigureScenario::new(1).is_err());
        assert!(FigureScenario::new(8).is_err());
        let f2 = FigureScenario::new(2).unwrap();
        assert_eq!(f2.metric, Metric::Lcr);
        assert_eq!(f2.snr_scenario(), SnrScenario::EqualSnr);
        let f7 = FigureScenario::new(7).unwrap();
        assert_eq!(f7.metric, Metric::Afd);
        assert_eq!(f7.snr_scenario(), SnrScenario::UnequalSnr);
    }

    #[test]
    fn phi_agrees_with_gain_chain() {
        for id in [2, 4, 6] {
            let s = FigureScenario::new(id).unwrap();
            let c = s.cascade().unwrap();
            for n in 1..=FIGURE_HOPS {
                let a = c.prefix(n).unwrap().phi();
                let b = s.phi(n).unwrap();
                assert!(((a - b) / b).abs() < 1e-13, "fig {id}, n {n}");
            }
        }
    }

    #[test]
    fn destination_doppler_sum() {
        let s = FigureScenario::new(2).unwrap().with_fm(3.0);
        let c = s.cascade().unwrap();
        assert!((c.doppler_sum_sq() - 9.0 * 9.0).abs() < 1e-12);
        assert!((c.prefix(2).unwrap().doppler_sum_sq() - 4.0 * 9.0).abs() < 1e-12);
    }
}
