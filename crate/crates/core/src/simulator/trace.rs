use std::io::{self, Write};

use crate::channel::CascadeSpec;
use crate::error::{Error, Result};

/// Default sample rate in multiples of the summed hop maximum Doppler.
pub const DEFAULT_OVERSAMPLE: f64 = 128.0;
/// Lowest accepted oversampling factor.
pub const MIN_OVERSAMPLE: f64 = 8.0;
/// Minimum duration in periods of the slowest time-varying hop.
pub const MIN_FADE_CYCLES: f64 = 100.0;
pub const DEFAULT_OSCILLATORS: usize = 32;

/// Sampling and seeding of a simulated trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    pub sample_rate: f64,
    pub duration: f64,
    pub seed: u64,
    /// Oscillators per component (fixed-to-mobile) or per ring
    /// (mobile-to-mobile).
    pub oscillators: usize,
    /// Repetition index; selects an independent random stream.
    pub repetition: u32,
}

impl TraceSpec {
    pub fn new(sample_rate: f64, duration: f64, seed: u64) -> Self {
        TraceSpec {
            sample_rate,
            duration,
            seed,
            oscillators: DEFAULT_OSCILLATORS,
            repetition: 0,
        }
    }

    /// Default sample rate for the cascade and the given duration.
    pub fn for_cascade(cascade: &CascadeSpec, duration: f64, seed: u64) -> Self {
        TraceSpec::new(DEFAULT_OVERSAMPLE * cascade.max_doppler_sum(), duration, seed)
    }

    pub fn with_oscillators(mut self, m: usize) -> Self {
        self.oscillators = m;
        self
    }

    pub fn with_repetition(mut self, rep: u32) -> Self {
        self.repetition = rep;
        self
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    /// Checks the settings against the summed maximum Doppler and the smallest
    /// positive effective Doppler of the hops to be generated.
    pub fn validate(&self, max_doppler_sum: f64, min_positive_doppler: Option<f64>) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {}", self.sample_rate)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if self.oscillators < 4 {
            return Err(Error::invalid(format!(
                "at least 4 oscillators are needed, got {}",
                self.oscillators
            )));
        }
        if self.sample_rate < MIN_OVERSAMPLE * max_doppler_sum {
            return Err(Error::invalid(format!(
                "sample rate {} Hz is below {MIN_OVERSAMPLE} x the summed maximum Doppler {max_doppler_sum} Hz",
                self.sample_rate
            )));
        }
        if let Some(f) = min_positive_doppler {
            if self.duration * f < MIN_FADE_CYCLES {
                return Err(Error::invalid(format!(
                    "duration {} s covers only {:.1} periods of the slowest hop ({f} Hz); at least {MIN_FADE_CYCLES} are needed",
                    self.duration,
                    self.duration * f
                )));
            }
        }
        if self.n_samples() < 2 {
            return Err(Error::invalid("trace would contain fewer than 2 samples"));
        }
        Ok(())
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub description: String,
    pub spec: TraceSpec,
}

/// Uniformly sampled nonnegative envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingTrace {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub meta: TraceMeta,
}

impl FadingTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    /// Writes `t_seconds,amplitude` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_seconds,amplitude")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", k as f64 / self.sample_rate, s)?;
        }
        w.flush()
    }
}
