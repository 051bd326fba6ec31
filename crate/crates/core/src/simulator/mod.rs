//! Time-domain simulation of the cascade and empirical crossing statistics.
//!
//! Random streams: hop `i` of repetition `r` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i | r << 32`, so
//! every hop of every repetition is independent and reproducible on its own.

pub mod estimate;
pub mod gains;
mod sos;
pub mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{CascadeSpec, DopplerSpec, ThresholdGrid};
use crate::error::{Error, Result};

pub use estimate::{estimate_samples, CrossingCounter, SimEstimate, ThresholdEstimate, DEFAULT_BATCHES};
pub use gains::{scenario_phi, semi_blind_gain, SnrScenario};
pub use trace::{FadingTrace, TraceMeta, TraceSpec, DEFAULT_OVERSAMPLE, MIN_FADE_CYCLES};

use sos::{HopStream, OscillatorBank};

const CHUNK: usize = 1 << 13;

fn hop_rng(seed: u64, hop: u32, rep: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(hop) | (u64::from(rep) << 32));
    rng
}

enum HopSource {
    Dynamic(Box<HopStream>),
    Static(f64),
}

impl HopSource {
    fn new(omega_hat: f64, doppler: &DopplerSpec, gain: f64, spec: &TraceSpec, hop: u32) -> Self {
        let mut rng = hop_rng(spec.seed, hop, spec.repetition);
        let m = spec.oscillators;
        let bank = match *doppler {
            DopplerSpec::FixedToMobile { fm } if fm > 0.0 => {
                OscillatorBank::fixed_to_mobile(omega_hat, fm, m, &mut rng)
            }
            DopplerSpec::MobileToMobile { fm_tx, fm_rx } if fm_tx > 0.0 && fm_rx > 0.0 => {
                OscillatorBank::mobile_to_mobile(omega_hat, fm_tx, fm_rx, m, &mut rng)
            }
            DopplerSpec::MobileToMobile { fm_tx, fm_rx } if fm_tx + fm_rx > 0.0 => {
                OscillatorBank::fixed_to_mobile(omega_hat, fm_tx.max(fm_rx), m, &mut rng)
            }
            _ => {
                // Frozen channel: one Rayleigh draw, |h|² ~ Exp(Ω̂).
                let u: f64 = rng.random();
                return HopSource::Static(gain * (omega_hat * -(-u).ln_1p()).sqrt());
            }
        };
        HopSource::Dynamic(Box::new(HopStream::new(bank, spec.sample_rate, gain)))
    }

    fn fill(&mut self, out: &mut [f64]) {
        match self {
            HopSource::Dynamic(s) => s.fill(out),
            HopSource::Static(v) => out.fill(*v),
        }
    }

    fn mul_into(&mut self, out: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            HopSource::Dynamic(s) => s.mul_into(out, scratch),
            HopSource::Static(v) => out.iter_mut().for_each(|o| *o *= *v),
        }
    }
}

fn single_hop(omega: f64, doppler: DopplerSpec, spec: &TraceSpec, what: String) -> Result<FadingTrace> {
    if !(omega > 0.0) {
        return Err(Error::domain("trace generator", format!("omega must be > 0, got {omega}")));
    }
    if doppler.is_static() {
        return Err(Error::StaticChannel);
    }
    spec.validate(doppler.max(), Some(doppler.effective()))?;
    let mut src = HopSource::new(omega, &doppler, 1.0, spec, 0);
    let mut samples = vec![0.0; spec.n_samples()];
    for chunk in samples.chunks_mut(CHUNK) {
        src.fill(chunk);
    }
    Ok(FadingTrace {
        sample_rate: spec.sample_rate,
        samples,
        meta: TraceMeta { description: what, spec: *spec },
    })
}

/// Rayleigh envelope of a fixed-to-mobile hop.
pub fn gen_f2m_trace(omega: f64, fm: f64, spec: &TraceSpec) -> Result<FadingTrace> {
    let d = DopplerSpec::fixed_to_mobile(fm)?;
    single_hop(omega, d, spec, format!("fixed-to-mobile, omega={omega}, fm={fm} Hz"))
}

/// Rayleigh envelope of a mobile-to-mobile hop. With one end static the
/// hop is generated as fixed-to-mobile.
pub fn gen_m2m_trace(omega: f64, fm_tx: f64, fm_rx: f64, spec: &TraceSpec) -> Result<FadingTrace> {
    let d = DopplerSpec::mobile_to_mobile(fm_tx, fm_rx)?;
    single_hop(
        omega,
        d,
        spec,
        format!("mobile-to-mobile, omega={omega}, fm_tx={fm_tx} Hz, fm_rx={fm_rx} Hz"),
    )
}

fn min_positive_doppler(cascade: &CascadeSpec) -> Option<f64> {
    cascade
        .dopplers()
        .iter()
        .map(DopplerSpec::effective)
        .filter(|&f| f > 0.0)
        .min_by(f64::total_cmp)
}

fn hop_sources(cascade: &CascadeSpec, spec: &TraceSpec) -> Result<Vec<HopSource>> {
    if cascade.is_static() {
        return Err(Error::StaticChannel);
    }
    spec.validate(cascade.max_doppler_sum(), min_positive_doppler(cascade))?;
    Ok(cascade
        .hops()
        .iter()
        .zip(cascade.dopplers())
        .zip(cascade.resolved_gains())
        .enumerate()
        .map(|(i, ((h, d), &g))| HopSource::new(h.omega_hat(), d, g, spec, i as u32))
        .collect())
}

/// Samplewise product of independently generated hop envelopes, each
/// scaled by the gain of the node feeding it.
pub fn cascade_trace(cascade: &CascadeSpec, spec: &TraceSpec) -> Result<FadingTrace> {
    let mut sources = hop_sources(cascade, spec)?;
    let mut samples = vec![0.0; spec.n_samples()];
    let mut scratch = Vec::with_capacity(CHUNK);
    for chunk in samples.chunks_mut(CHUNK) {
        let (first, rest) = sources.split_first_mut().expect("cascade has hops");
        first.fill(chunk);
        for src in rest {
            src.mul_into(chunk, &mut scratch);
        }
    }
    Ok(FadingTrace {
        sample_rate: spec.sample_rate,
        samples,
        meta: TraceMeta {
            description: format!("{}-hop cascade", cascade.n_hops()),
            spec: *spec,
        },
    })
}

/// Empirical LCR/AFD of a trace.
pub fn estimate_lcr_afd(trace: &FadingTrace, grid: &ThresholdGrid) -> Result<SimEstimate> {
    estimate_samples(&trace.samples, trace.sample_rate, grid)
}

/// Streams the cascade once and estimates crossing statistics of the
/// partial products after each hop count in `taps` (1-based, ascending).
/// No trace is stored.
pub fn simulate_taps(
    cascade: &CascadeSpec,
    spec: &TraceSpec,
    taps: &[usize],
    grid: &ThresholdGrid,
) -> Result<Vec<SimEstimate>> {
    if taps.is_empty() || taps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("taps must be a nonempty ascending list"));
    }
    let last = *taps.last().unwrap();
    if taps[0] == 0 || last > cascade.n_hops() {
        return Err(Error::invalid(format!(
            "taps must lie in 1..={}, got {taps:?}",
            cascade.n_hops()
        )));
    }
    let prefix = cascade.prefix(last)?;
    if taps.iter().any(|&t| cascade.prefix(t).map(|c| c.is_static()).unwrap_or(true)) {
        return Err(Error::StaticChannel);
    }
    let mut sources = hop_sources(&prefix, spec)?;
    let total = spec.n_samples();
    let mut counters: Vec<CrossingCounter> = taps
        .iter()
        .map(|_| CrossingCounter::new(grid, spec.sample_rate, total, DEFAULT_BATCHES))
        .collect();
    let mut buf = vec![0.0; CHUNK];
    let mut scratch = Vec::with_capacity(CHUNK);
    let mut done = 0;
    while done < total {
        let len = CHUNK.min(total - done);
        let chunk = &mut buf[..len];
        let mut next_tap = 0;
        for (i, src) in sources.iter_mut().enumerate() {
            if i == 0 {
                src.fill(chunk);
            } else {
                src.mul_into(chunk, &mut scratch);
            }
            if next_tap < taps.len() && taps[next_tap] == i + 1 {
                counters[next_tap].push(chunk);
                next_tap += 1;
            }
        }
        done += len;
    }
    counters.iter().map(CrossingCounter::finish).collect()
}
