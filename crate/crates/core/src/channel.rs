//! Channel description shared by every computation path.
//!
//! A cascade is an ordered list of Rayleigh hops. Hop `i` (1-based) carries a
//! fading amplitude with mean power `Ω̂_i`, is scaled by the gain `G_{i-1}` of
//! the node that transmits into it, and has an effective Doppler frequency
//! `f_i`. The product of the scaled hop envelopes is the end-to-end fading
//! gain whose crossing statistics this crate computes.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::simulator::gains::semi_blind_gain;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Mobility model of a single hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopplerSpec {
    /// One end is stationary; `fm` is the maximum Doppler shift of the mobile end.
    FixedToMobile { fm: f64 },
    /// Both ends move with maximum Doppler shifts `fm_tx` and `fm_rx`.
    MobileToMobile { fm_tx: f64, fm_rx: f64 },
}

fn check_frequency(name: &str, f: f64) -> Result<()> {
    if !f.is_finite() || f < 0.0 {
        return Err(Error::invalid(format!(
            "{name} must be a finite non-negative frequency, got {f}"
        )));
    }
    Ok(())
}

impl DopplerSpec {
    pub fn fixed_to_mobile(fm: f64) -> Result<Self> {
        check_frequency("fm", fm)?;
        Ok(DopplerSpec::FixedToMobile { fm })
    }

    pub fn mobile_to_mobile(fm_tx: f64, fm_rx: f64) -> Result<Self> {
        check_frequency("fm_tx", fm_tx)?;
        check_frequency("fm_rx", fm_rx)?;
        Ok(DopplerSpec::MobileToMobile { fm_tx, fm_rx })
    }

    /// Hop between two nodes with the given maximum Doppler shifts. A node
    /// with zero shift is stationary, so the hop degenerates to fixed-to-mobile.
    pub fn between_nodes(f_from: f64, f_to: f64) -> Result<Self> {
        check_frequency("node Doppler", f_from)?;
        check_frequency("node Doppler", f_to)?;
        Ok(match (f_from > 0.0, f_to > 0.0) {
            (true, true) => DopplerSpec::MobileToMobile {
                fm_tx: f_from,
                fm_rx: f_to,
            },
            (true, false) => DopplerSpec::FixedToMobile { fm: f_from },
            _ => DopplerSpec::FixedToMobile { fm: f_to },
        })
    }

    /// Squared effective Doppler `f_i²`; exact sum of squares for mobile-to-mobile.
    pub fn effective_sq(&self) -> f64 {
        match *self {
            DopplerSpec::FixedToMobile { fm } => fm * fm,
            DopplerSpec::MobileToMobile { fm_tx, fm_rx } => fm_tx * fm_tx + fm_rx * fm_rx,
        }
    }

    pub fn effective(&self) -> f64 {
        match *self {
            DopplerSpec::FixedToMobile { fm } => fm,
            DopplerSpec::MobileToMobile { fm_tx, fm_rx } => fm_tx.hypot(fm_rx),
        }
    }

    /// Largest frequency present in the Doppler spectrum.
    pub fn max(&self) -> f64 {
        match *self {
            DopplerSpec::FixedToMobile { fm } => fm,
            DopplerSpec::MobileToMobile { fm_tx, fm_rx } => fm_tx + fm_rx,
        }
    }

    pub fn is_static(&self) -> bool {
        self.max() == 0.0
    }
}

/// Effective Doppler frequency `f_i` of a hop.
pub fn effective_doppler(d: &DopplerSpec) -> f64 {
    d.effective()
}

/// Maximum Doppler frequency of a hop.
pub fn max_doppler(d: &DopplerSpec) -> f64 {
    d.max()
}

/// Variance of the envelope time derivative, `π²·Ω·f²`.
pub fn derivative_variance(omega: f64, f: f64) -> f64 {
    PI * PI * omega * f * f
}

/// Product of the effective hop powers.
pub fn phi(omegas: &[f64]) -> f64 {
    omegas.iter().product()
}

fn check_nodes(node_dopplers: &[f64]) -> Result<()> {
    if node_dopplers.len() < 2 {
        return Err(Error::invalid(format!(
            "node Doppler list needs at least 2 entries (source and destination), got {}",
            node_dopplers.len()
        )));
    }
    for &f in node_dopplers {
        check_frequency("node Doppler", f)?;
    }
    Ok(())
}

/// `Σ f_i²` over the hops of a node chain, composed hop by hop as
/// `f_i² = f_{m(i-1)}² + f_{mi}²`.
pub fn doppler_sum_sq(node_dopplers: &[f64]) -> Result<f64> {
    check_nodes(node_dopplers)?;
    Ok(node_dopplers
        .windows(2)
        .map(|w| w[0] * w[0] + w[1] * w[1])
        .sum())
}

/// Closed form of [`doppler_sum_sq`]: end nodes once, relays twice.
pub fn doppler_sum_sq_closed_form(node_dopplers: &[f64]) -> Result<f64> {
    check_nodes(node_dopplers)?;
    let n = node_dopplers.len();
    let ends = node_dopplers[0].powi(2) + node_dopplers[n - 1].powi(2);
    let relays: f64 = node_dopplers[1..n - 1].iter().map(|f| f * f).sum();
    Ok(ends + 2.0 * relays)
}

/// One hop of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct HopSpec {
    omega_hat: f64,
    doppler: Option<DopplerSpec>,
    noise_variance: Option<f64>,
}

impl HopSpec {
    /// Hop with mean fading power `omega_hat` and no Doppler model yet
    /// (node-list cascades fill it in).
    pub fn new(omega_hat: f64) -> Result<Self> {
        if !omega_hat.is_finite() || omega_hat <= 0.0 {
            return Err(Error::invalid(format!(
                "hop mean power must be positive, got {omega_hat}"
            )));
        }
        Ok(HopSpec {
            omega_hat,
            doppler: None,
            noise_variance: None,
        })
    }

    pub fn with_doppler(mut self, doppler: DopplerSpec) -> Self {
        self.doppler = Some(doppler);
        self
    }

    pub fn with_noise_variance(mut self, w0: f64) -> Result<Self> {
        if !w0.is_finite() || w0 <= 0.0 {
            return Err(Error::invalid(format!(
                "noise variance must be positive, got {w0}"
            )));
        }
        self.noise_variance = Some(w0);
        Ok(self)
    }

    /// Sets the noise variance so that `Ω̂ / W₀` equals the given SNR.
    pub fn with_snr_db(self, snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
        }
        let w0 = self.omega_hat / db_to_power_ratio(snr_db);
        self.with_noise_variance(w0)
    }

    pub fn omega_hat(&self) -> f64 {
        self.omega_hat
    }

    pub fn doppler(&self) -> Option<&DopplerSpec> {
        self.doppler.as_ref()
    }

    pub fn noise_variance(&self) -> Option<f64> {
        self.noise_variance
    }

    /// Mean SNR `γ̄ = Ω̂ / W₀`, when a noise variance is known.
    pub fn mean_snr(&self) -> Option<f64> {
        self.noise_variance.map(|w| self.omega_hat / w)
    }
}

/// How the gain of the node feeding a hop is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelayGain {
    /// Source node, `G₀ = 1`.
    Unity,
    /// Fixed gain `G² = 1 / (C·W₀)` from the constant `C` and the relay's noise variance.
    FixedC(f64),
    /// Semi-blind gain derived from the mean SNR of the hop into the relay.
    SemiBlind,
    /// Amplitude gain given directly.
    Explicit(f64),
}

/// Ordered cascade of hops with resolved relay gains and derived parameters.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    hops: Vec<HopSpec>,
    gains: Vec<RelayGain>,
    node_dopplers: Option<Vec<f64>>,
    dopplers: Vec<DopplerSpec>,
    resolved_gains: Vec<f64>,
    omegas: Vec<f64>,
    doppler_sq: Vec<f64>,
    phi: f64,
}

impl CascadeSpec {
    /// Cascade whose hops each carry their own [`DopplerSpec`].
    pub fn new(hops: Vec<HopSpec>, gains: Vec<RelayGain>) -> Result<Self> {
        if hops.iter().any(|h| h.doppler.is_none()) {
            return Err(Error::invalid(
                "every hop needs a Doppler model when no node Doppler list is given",
            ));
        }
        let dopplers = hops.iter().map(|h| h.doppler.unwrap()).collect();
        Self::build(hops, gains, None, dopplers)
    }

    /// Cascade whose per-hop Doppler follows from the `N + 1` node shifts
    /// `(f_mS, f_m1, …, f_mD)`.
    pub fn from_nodes(
        hops: Vec<HopSpec>,
        node_dopplers: &[f64],
        gains: Vec<RelayGain>,
    ) -> Result<Self> {
        check_nodes(node_dopplers)?;
        if hops.iter().any(|h| h.doppler.is_some()) {
            return Err(Error::invalid(
                "give either per-hop Doppler models or a node Doppler list, not both",
            ));
        }
        if node_dopplers.len() != hops.len() + 1 {
            return Err(Error::invalid(format!(
                "{} hops need {} node Doppler shifts, got {}",
                hops.len(),
                hops.len() + 1,
                node_dopplers.len()
            )));
        }
        let dopplers = node_dopplers
            .windows(2)
            .map(|w| DopplerSpec::between_nodes(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Self::build(hops, gains, Some(node_dopplers.to_vec()), dopplers)
    }

    /// Unity-gain cascade of fixed-to-mobile hops with the given effective
    /// powers and Doppler frequencies.
    pub fn unity_gain(omegas: &[f64], dopplers: &[f64]) -> Result<Self> {
        if omegas.len() != dopplers.len() {
            return Err(Error::invalid(format!(
                "{} powers but {} Doppler frequencies",
                omegas.len(),
                dopplers.len()
            )));
        }
        let hops = omegas
            .iter()
            .zip(dopplers)
            .map(|(&o, &f)| Ok(HopSpec::new(o)?.with_doppler(DopplerSpec::fixed_to_mobile(f)?)))
            .collect::<Result<Vec<_>>>()?;
        let gains = vec![RelayGain::Unity; omegas.len()];
        Self::new(hops, gains)
    }

    fn build(
        hops: Vec<HopSpec>,
        gains: Vec<RelayGain>,
        node_dopplers: Option<Vec<f64>>,
        dopplers: Vec<DopplerSpec>,
    ) -> Result<Self> {
        if hops.is_empty() {
            return Err(Error::invalid("a cascade needs at least one hop"));
        }
        if gains.len() != hops.len() {
            return Err(Error::invalid(format!(
                "{} hops need {} gain entries, got {}",
                hops.len(),
                hops.len(),
                gains.len()
            )));
        }
        if gains[0] != RelayGain::Unity {
            return Err(Error::invalid("the source gain G0 must be Unity"));
        }
        let resolved_gains = gains
            .iter()
            .enumerate()
            .map(|(j, g)| resolve_gain(j, g, &hops))
            .collect::<Result<Vec<_>>>()?;
        let omegas: Vec<f64> = hops
            .iter()
            .zip(&resolved_gains)
            .map(|(h, g)| h.omega_hat * g * g)
            .collect();
        let phi = phi(&omegas);
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::invalid(format!(
                "product of effective powers must be finite and positive, got {phi}"
            )));
        }
        let doppler_sq = dopplers.iter().map(DopplerSpec::effective_sq).collect();
        Ok(CascadeSpec {
            hops,
            gains,
            node_dopplers,
            dopplers,
            resolved_gains,
            omegas,
            doppler_sq,
            phi,
        })
    }

    pub fn n_hops(&self) -> usize {
        self.hops.len()
    }

    pub fn hops(&self) -> &[HopSpec] {
        &self.hops
    }

    pub fn gains(&self) -> &[RelayGain] {
        &self.gains
    }

    /// Amplitude gains `G_0 … G_{N-1}`; `G_0 = 1`.
    pub fn resolved_gains(&self) -> &[f64] {
        &self.resolved_gains
    }

    /// Doppler model of each hop (derived from the node list in node mode).
    pub fn dopplers(&self) -> &[DopplerSpec] {
        &self.dopplers
    }

    pub fn node_dopplers(&self) -> Option<&[f64]> {
        self.node_dopplers.as_deref()
    }

    /// Effective hop powers `Ω_i = Ω̂_i·G_{i-1}²`.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Squared effective Doppler frequency `f_i²` of each hop.
    pub fn doppler_sq(&self) -> &[f64] {
        &self.doppler_sq
    }

    pub fn doppler_sum_sq(&self) -> f64 {
        self.doppler_sq.iter().sum()
    }

    /// Sum of hop maximum Doppler frequencies; bounds the bandwidth of the
    /// product process.
    pub fn max_doppler_sum(&self) -> f64 {
        self.dopplers.iter().map(DopplerSpec::max).sum()
    }

    pub fn is_static(&self) -> bool {
        self.doppler_sq.iter().all(|&f| f == 0.0)
    }

    /// The first `n` hops, as seen by the node at the end of hop `n`.
    pub fn prefix(&self, n: usize) -> Result<CascadeSpec> {
        if n == 0 || n > self.n_hops() {
            return Err(Error::invalid(format!(
                "prefix length {n} outside 1..={}",
                self.n_hops()
            )));
        }
        let hops = self.hops[..n].to_vec();
        let gains = self.gains[..n].to_vec();
        match &self.node_dopplers {
            Some(nodes) => Self::from_nodes(hops, &nodes[..=n], gains),
            None => Self::new(hops, gains),
        }
    }
}

fn resolve_gain(j: usize, gain: &RelayGain, hops: &[HopSpec]) -> Result<f64> {
    let g = match *gain {
        RelayGain::Unity => 1.0,
        RelayGain::Explicit(g) => g,
        RelayGain::FixedC(c) => {
            if j == 0 {
                return Err(Error::invalid("the source gain G0 must be Unity"));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid(format!("gain constant C must be positive, got {c}")));
            }
            let w0 = hops[j - 1].noise_variance.ok_or_else(|| {
                Error::invalid(format!("fixed gain of relay {j} needs the noise variance of hop {j}"))
            })?;
            (1.0 / (c * w0)).sqrt()
        }
        RelayGain::SemiBlind => {
            if j == 0 {
                return Err(Error::invalid("the source gain G0 must be Unity"));
            }
            let hop = &hops[j - 1];
            let snr = hop.mean_snr().ok_or_else(|| {
                Error::invalid(format!("semi-blind gain of relay {j} needs the SNR of hop {j}"))
            })?;
            semi_blind_gain(snr, hop.omega_hat)?
        }
    };
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid(format!("relay {j} gain must be positive, got {g}")));
    }
    Ok(g)
}

/// Strictly increasing list of positive amplitude thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    values: Vec<f64>,
    reference_power: f64,
}

impl ThresholdGrid {
    pub fn new(values: Vec<f64>, reference_power: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("threshold grid is empty"));
        }
        if !(reference_power.is_finite() && reference_power > 0.0) {
            return Err(Error::invalid(format!(
                "reference power must be positive, got {reference_power}"
            )));
        }
        if values.iter().any(|&y| !(y.is_finite() && y > 0.0)) {
            return Err(Error::invalid("thresholds must be finite and positive"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("thresholds must be strictly increasing"));
        }
        Ok(ThresholdGrid {
            values,
            reference_power,
        })
    }

    /// Grid from `lo_db` to `hi_db` (inclusive) in steps of `step_db`, where
    /// the dB axis is `20·log10(y / √reference_power)`.
    pub fn from_db(lo_db: f64, hi_db: f64, step_db: f64, reference_power: f64) -> Result<Self> {
        if !(lo_db.is_finite() && hi_db.is_finite() && step_db.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if step_db <= 0.0 || hi_db < lo_db {
            return Err(Error::invalid(format!(
                "grid {lo_db}:{hi_db}:{step_db} needs lo <= hi and a positive step"
            )));
        }
        let count = ((hi_db - lo_db) / step_db + 1e-9).floor() as usize + 1;
        let scale = reference_power.sqrt();
        let values = (0..count)
            .map(|k| scale * 10f64.powf((lo_db + k as f64 * step_db) / 20.0))
            .collect();
        Self::new(values, reference_power)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reference_power(&self) -> f64 {
        self.reference_power
    }

    pub fn to_db(&self, y: f64) -> f64 {
        20.0 * (y / self.reference_power.sqrt()).log10()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computation method that produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Laplace,
    Simulated,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Laplace => "laplace",
            Method::Simulated => "simulated",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// LCR/AFD at one threshold. `afd` is `None` where the crossing rate is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub lcr: f64,
    pub afd: Option<f64>,
    pub cdf: f64,
    /// Standard errors, present for simulated curves.
    pub lcr_se: Option<f64>,
    pub afd_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderCurve {
    pub method: Method,
    pub points: Vec<CurvePoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_and_max_doppler() {
        let f2m = DopplerSpec::fixed_to_mobile(10.0).unwrap();
        assert_eq!(effective_doppler(&f2m), 10.0);
        assert_eq!(max_doppler(&f2m), 10.0);
        let m2m = DopplerSpec::mobile_to_mobile(3.0, 4.0).unwrap();
        assert_eq!(effective_doppler(&m2m), 5.0);
        assert_eq!(max_doppler(&m2m), 7.0);
        let degenerate = DopplerSpec::mobile_to_mobile(6.5, 0.0).unwrap();
        assert_eq!(effective_doppler(&degenerate), 6.5);
        let still = DopplerSpec::mobile_to_mobile(0.0, 0.0).unwrap();
        assert_eq!(max_doppler(&still), 0.0);
        assert!(still.is_static());
        assert!(DopplerSpec::fixed_to_mobile(-1.0).is_err());
        assert!(DopplerSpec::mobile_to_mobile(1.0, f64::NAN).is_err());
    }

    #[test]
    fn derivative_variance_values() {
        let pi2 = PI * PI;
        assert!((derivative_variance(1.0, 1.0) - pi2).abs() < 1e-15);
        assert!((derivative_variance(1.0, 1.0) - 9.8696).abs() < 1e-4);
        assert_eq!(derivative_variance(3.0, 0.0), 0.0);
        assert!((derivative_variance(4.0, 0.5) - pi2).abs() < 1e-14);
    }

    #[test]
    fn phi_products() {
        assert_eq!(phi(&[1.0, 1.0, 1.0]), 1.0);
        assert_eq!(phi(&[2.0, 3.0]), 6.0);
    }

    #[test]
    fn node_doppler_sums() {
        assert_eq!(doppler_sum_sq(&[1.0, 1.0]).unwrap(), 2.0);
        let fm = 30.0;
        let five = [fm, fm, fm, fm, fm, 0.0];
        assert!((doppler_sum_sq(&five).unwrap() - 9.0 * fm * fm).abs() < 1e-9);
        assert!((doppler_sum_sq(&[fm, fm, fm]).unwrap() - 4.0 * fm * fm).abs() < 1e-9);
        assert_eq!(
            doppler_sum_sq(&five).unwrap(),
            doppler_sum_sq_closed_form(&five).unwrap()
        );
        assert!(doppler_sum_sq(&[1.0]).is_err());
        assert!(doppler_sum_sq(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn node_list_composes_per_hop_doppler() {
        let hops = vec![HopSpec::new(1.0).unwrap(), HopSpec::new(2.0).unwrap()];
        let c = CascadeSpec::from_nodes(hops, &[3.0, 4.0, 0.0], vec![RelayGain::Unity; 2]).unwrap();
        assert_eq!(c.doppler_sq(), &[25.0, 16.0]);
        assert_eq!(
            c.dopplers()[0],
            DopplerSpec::MobileToMobile {
                fm_tx: 3.0,
                fm_rx: 4.0
            }
        );
        assert_eq!(c.dopplers()[1], DopplerSpec::FixedToMobile { fm: 4.0 });
        assert_eq!(c.max_doppler_sum(), 11.0);
    }

    #[test]
    fn exactly_one_doppler_input_mode() {
        let with = HopSpec::new(1.0)
            .unwrap()
            .with_doppler(DopplerSpec::fixed_to_mobile(1.0).unwrap());
        assert!(CascadeSpec::from_nodes(vec![with], &[1.0, 1.0], vec![RelayGain::Unity]).is_err());
        let without = HopSpec::new(1.0).unwrap();
        assert!(CascadeSpec::new(vec![without], vec![RelayGain::Unity]).is_err());
        let hops = vec![HopSpec::new(1.0).unwrap(); 2];
        assert!(CascadeSpec::from_nodes(hops, &[1.0, 1.0], vec![RelayGain::Unity; 2]).is_err());
    }

    #[test]
    fn single_hop_phi_is_mean_power() {
        let c = CascadeSpec::unity_gain(&[2.5], &[10.0]).unwrap();
        assert_eq!(c.phi(), 2.5);
        assert_eq!(c.resolved_gains(), &[1.0]);
    }

    #[test]
    fn effective_power_includes_previous_gain() {
        let hops = vec![
            HopSpec::new(2.0).unwrap().with_noise_variance(0.5).unwrap(),
            HopSpec::new(3.0).unwrap(),
            HopSpec::new(0.5).unwrap(),
        ];
        let gains = vec![
            RelayGain::Unity,
            RelayGain::FixedC(2.0),
            RelayGain::Explicit(1.5),
        ];
        let c = CascadeSpec::from_nodes(hops, &[1.0, 1.0, 1.0, 1.0], gains).unwrap();
        // G1² = 1/(C·W0) = 1
        assert!((c.resolved_gains()[1] - 1.0).abs() < 1e-15);
        assert_eq!(c.omegas(), &[2.0, 3.0, 0.5 * 2.25]);
        let hat_phi: f64 = c.hops().iter().map(|h| h.omega_hat()).product();
        let g_sq: f64 = c.resolved_gains().iter().map(|g| g * g).product();
        assert!((c.phi() - hat_phi * g_sq).abs() < 1e-14 * c.phi());
    }

    #[test]
    fn gain_resolution_errors() {
        let hops = vec![HopSpec::new(1.0).unwrap(), HopSpec::new(1.0).unwrap()];
        let semi = vec![RelayGain::Unity, RelayGain::SemiBlind];
        assert!(CascadeSpec::from_nodes(hops.clone(), &[1.0; 3], semi).is_err());
        let bad_source = vec![RelayGain::Explicit(2.0), RelayGain::Unity];
        assert!(CascadeSpec::from_nodes(hops.clone(), &[1.0; 3], bad_source).is_err());
        let short = vec![RelayGain::Unity];
        assert!(CascadeSpec::from_nodes(hops.clone(), &[1.0; 3], short).is_err());
        let negative = vec![RelayGain::Unity, RelayGain::Explicit(-1.0)];
        assert!(CascadeSpec::from_nodes(hops, &[1.0; 3], negative).is_err());
    }

    #[test]
    fn snr_sets_noise_variance() {
        let h = HopSpec::new(2.0).unwrap().with_snr_db(10.0).unwrap();
        assert!((h.noise_variance().unwrap() - 0.2).abs() < 1e-15);
        assert!((h.mean_snr().unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(HopSpec::new(2.0).unwrap().mean_snr(), None);
        assert!(HopSpec::new(0.0).is_err());
    }

    #[test]
    fn prefix_keeps_node_chain() {
        let hops = vec![HopSpec::new(1.0).unwrap(); 3];
        let c = CascadeSpec::from_nodes(hops, &[1.0, 2.0, 3.0, 0.0], vec![RelayGain::Unity; 3])
            .unwrap();
        let p = c.prefix(2).unwrap();
        assert_eq!(p.node_dopplers().unwrap(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.doppler_sq(), &[5.0, 13.0]);
        assert!(c.prefix(0).is_err());
        assert!(c.prefix(4).is_err());
    }

    #[test]
    fn threshold_grid_from_db() {
        let g = ThresholdGrid::from_db(-30.0, 10.0, 0.5, 1.0).unwrap();
        assert_eq!(g.len(), 81);
        assert!((g.values()[60] - 1.0).abs() < 1e-12);
        assert!((g.to_db(g.values()[0]) + 30.0).abs() < 1e-9);
        let scaled = ThresholdGrid::from_db(0.0, 0.0, 1.0, 4.0).unwrap();
        assert!((scaled.values()[0] - 2.0).abs() < 1e-12);
        assert!(ThresholdGrid::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(ThresholdGrid::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(ThresholdGrid::from_db(1.0, 0.0, 0.5, 1.0).is_err());
    }
}
