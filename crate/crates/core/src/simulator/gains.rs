//! Semi-blind relay gains and the resulting scale parameter of the figure
//! scenarios.

use crate::error::{Error, Result};
use crate::specialfn::gamma_upper_zero;

/// Amplitude gain `G` of a semi-blind relay fed by a hop with mean SNR
/// `mean_snr` (linear) and mean fading power `omega_hat`.
///
/// `G² = exp(1/γ̄)·Γ(0, 1/γ̄) / Ω̂`, the fixed gain with the same average
/// power as the CSI-assisted relay.
pub fn semi_blind_gain(mean_snr: f64, omega_hat: f64) -> Result<f64> {
    if !(mean_snr > 0.0) || mean_snr.is_infinite() {
        return Err(Error::domain(
            "semi_blind_gain",
            format!("mean SNR must be positive and finite, got {mean_snr}"),
        ));
    }
    if !(omega_hat > 0.0) || omega_hat.is_infinite() {
        return Err(Error::domain(
            "semi_blind_gain",
            format!("omega_hat must be positive and finite, got {omega_hat}"),
        ));
    }
    let x = 1.0 / mean_snr;
    Ok((x.exp() * gamma_upper_zero(x)? / omega_hat).sqrt())
}

/// Per-hop SNR layout of a semi-blind scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrScenario {
    /// One SNR shared by every hop.
    EqualSnr,
    /// One SNR per hop.
    UnequalSnr,
}

/// Scale parameter `Φ` of an `n_hops` cascade of hops with common mean
/// power `omega_hat` and semi-blind relays.
///
/// `snrs` holds linear mean SNRs: a single value for
/// [`SnrScenario::EqualSnr`], one per hop for [`SnrScenario::UnequalSnr`]
/// (the last hop's SNR does not enter `Φ`).
pub fn scenario_phi(
    scenario: SnrScenario,
    omega_hat: f64,
    snrs: &[f64],
    n_hops: usize,
) -> Result<f64> {
    if n_hops == 0 {
        return Err(Error::invalid("a cascade needs at least one hop"));
    }
    if !(omega_hat > 0.0) {
        return Err(Error::domain("scenario_phi", format!("omega_hat must be > 0, got {omega_hat}")));
    }
    let relay_snrs: Vec<f64> = match scenario {
        SnrScenario::EqualSnr => {
            if snrs.len() != 1 {
                return Err(Error::invalid(format!(
                    "equal-SNR scenario takes one SNR, got {}",
                    snrs.len()
                )));
            }
            vec![snrs[0]; n_hops - 1]
        }
        SnrScenario::UnequalSnr => {
            if snrs.len() != n_hops {
                return Err(Error::invalid(format!(
                    "unequal-SNR scenario with {n_hops} hops takes {n_hops} SNRs, got {}",
                    snrs.len()
                )));
            }
            snrs[..n_hops - 1].to_vec()
        }
    };
    let mut exponent = 0.0;
    let mut product = omega_hat;
    for &g in &relay_snrs {
        if !(g > 0.0) {
            return Err(Error::domain("scenario_phi", format!("SNR must be > 0, got {g}")));
        }
        exponent += 1.0 / g;
        product *= gamma_upper_zero(1.0 / g)?;
    }
    Ok(exponent.exp() * product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{db_to_power_ratio, CascadeSpec, HopSpec, RelayGain};

    #[test]
    fn reference_gain() {
        let g = semi_blind_gain(1.0, 1.0).unwrap();
        assert!((g * g - 0.596_347_362_323_194_1).abs() < 1e-13);
        assert!((g - 0.772_235_302_432_616_1).abs() < 1e-13);
    }

    #[test]
    fn gain_grows_with_snr_and_scales_with_power() {
        let a = semi_blind_gain(10.0, 1.0).unwrap();
        let b = semi_blind_gain(100.0, 1.0).unwrap();
        assert!(b > a);
        let c = semi_blind_gain(10.0, 4.0).unwrap();
        assert!((c - 0.5 * a).abs() < 1e-15);
        assert!(semi_blind_gain(0.0, 1.0).is_err());
        assert!(semi_blind_gain(1.0, -1.0).is_err());
    }

    #[test]
    fn equal_snr_phi_reference() {
        let g = db_to_power_ratio(5.0);
        let phi = scenario_phi(SnrScenario::EqualSnr, 1.0, &[g], 5).unwrap();
        assert!((phi - 2.001_450_458_214_699_5).abs() < 1e-12);
        assert_eq!(scenario_phi(SnrScenario::EqualSnr, 3.0, &[g], 1).unwrap(), 3.0);
        let same = scenario_phi(SnrScenario::UnequalSnr, 1.0, &[g; 5], 5).unwrap();
        assert!((same - phi).abs() < 1e-14 * phi);
        assert!(scenario_phi(SnrScenario::UnequalSnr, 1.0, &[g; 4], 5).is_err());
        assert!(scenario_phi(SnrScenario::EqualSnr, 1.0, &[g, g], 5).is_err());
    }

    #[test]
    fn phi_matches_gain_chain() {
        let snrs_db = [0.0, 10.0, 15.0, 15.0, 20.0];
        let hops: Vec<HopSpec> = snrs_db
            .iter()
            .map(|&d| HopSpec::new(1.0).unwrap().with_snr_db(d).unwrap())
            .collect();
        let mut gains = vec![RelayGain::Unity];
        gains.extend(std::iter::repeat_n(RelayGain::SemiBlind, 4));
        let c = CascadeSpec::from_nodes(hops, &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0], gains).unwrap();
        let lin: Vec<f64> = snrs_db.iter().map(|&d| db_to_power_ratio(d)).collect();
        let phi = scenario_phi(SnrScenario::UnequalSnr, 1.0, &lin, 5).unwrap();
        assert!(((c.phi() - phi) / phi).abs() < 1e-13);
    }
}
