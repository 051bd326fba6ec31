//! Empirical LCR/AFD by counting downward crossings.
//!
//! A sample equal to a threshold counts as above it. Each sample is mapped
//! once to the number `b` of thresholds it is at or above; a step from bin
//! `b₁` down to `b₂` crosses exactly the thresholds `b₂ … b₁-1`, which a
//! difference array records in O(1). Standard errors come from batch means.

use crate::channel::{CurvePoint, Method, SecondOrderCurve, ThresholdGrid};
use crate::error::{Error, Result};

/// Batches used for standard errors.
pub const DEFAULT_BATCHES: usize = 20;

/// Streaming crossing counter over a fixed number of samples.
#[derive(Debug, Clone)]
pub struct CrossingCounter {
    thresholds: Vec<f64>,
    sample_rate: f64,
    batch_len: usize,
    /// Per batch: crossing difference array and bin histogram.
    diff: Vec<Vec<i64>>,
    hist: Vec<Vec<u64>>,
    prev_bin: Option<usize>,
    seen: usize,
}

impl CrossingCounter {
    /// Counter for a stream of `total_samples` samples split into `batches`
    /// equal batches.
    pub fn new(grid: &ThresholdGrid, sample_rate: f64, total_samples: usize, batches: usize) -> Self {
        let k = grid.len();
        let batches = batches.clamp(1, total_samples.max(1));
        let batch_len = total_samples.div_ceil(batches).max(1);
        let n_batches = total_samples.div_ceil(batch_len).max(1);
        CrossingCounter {
            thresholds: grid.values().to_vec(),
            sample_rate,
            batch_len,
            diff: vec![vec![0; k + 1]; n_batches],
            hist: vec![vec![0; k + 1]; n_batches],
            prev_bin: None,
            seen: 0,
        }
    }

    fn bin(&self, s: f64) -> usize {
        self.thresholds.partition_point(|&y| y <= s)
    }

    pub fn push(&mut self, samples: &[f64]) {
        let last_batch = self.diff.len() - 1;
        for &s in samples {
            let b = self.bin(s);
            let batch = (self.seen / self.batch_len).min(last_batch);
            self.hist[batch][b] += 1;
            if let Some(pb) = self.prev_bin {
                if b < pb {
                    self.diff[batch][b] += 1;
                    self.diff[batch][pb] -= 1;
                }
            }
            self.prev_bin = Some(b);
            self.seen += 1;
        }
    }

    pub fn finish(&self) -> Result<SimEstimate> {
        if self.seen < 2 {
            return Err(Error::invalid(format!(
                "crossing estimates need at least 2 samples, got {}",
                self.seen
            )));
        }
        let k = self.thresholds.len();
        let dt = 1.0 / self.sample_rate;
        // Per batch: crossings[k] and samples below threshold k.
        let mut batch_cross = Vec::new();
        let mut batch_below = Vec::new();
        let mut batch_dur = Vec::new();
        for (d, h) in self.diff.iter().zip(&self.hist) {
            let n: u64 = h.iter().sum();
            if n == 0 {
                continue;
            }
            let mut c = vec![0u64; k];
            let mut below = vec![0u64; k];
            let mut run_c = 0i64;
            let mut run_b = 0u64;
            for j in 0..k {
                run_c += d[j];
                run_b += h[j];
                c[j] = run_c as u64;
                below[j] = run_b;
            }
            batch_cross.push(c);
            batch_below.push(below);
            batch_dur.push(n as f64 * dt);
        }
        let duration = self.seen as f64 * dt;
        let nb = batch_cross.len();
        let points = (0..k)
            .map(|j| {
                let crossings: u64 = batch_cross.iter().map(|c| c[j]).sum();
                let below: u64 = batch_below.iter().map(|b| b[j]).sum();
                let time_below = below as f64 * dt;
                let lcr = crossings as f64 / duration;
                let cdf = below as f64 / self.seen as f64;
                let afd = (crossings > 0).then(|| time_below / crossings as f64);
                let (lcr_se, afd_se) = if nb >= 2 {
                    let rates: Vec<f64> = (0..nb)
                        .map(|b| batch_cross[b][j] as f64 / batch_dur[b])
                        .collect();
                    let mean = rates.iter().sum::<f64>() / nb as f64;
                    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
                        / (nb as f64 - 1.0);
                    let lcr_se = (var / nb as f64).sqrt();
                    let afd_se = afd.map(|a| {
                        let cbar = crossings as f64 / nb as f64;
                        let ss: f64 = (0..nb)
                            .map(|b| {
                                let r = batch_below[b][j] as f64 * dt - a * batch_cross[b][j] as f64;
                                r * r
                            })
                            .sum();
                        (ss / (nb as f64 * (nb as f64 - 1.0))).sqrt() / cbar
                    });
                    (lcr_se, afd_se)
                } else {
                    (f64::NAN, afd.map(|_| f64::NAN))
                };
                ThresholdEstimate {
                    threshold: self.thresholds[j],
                    crossings,
                    time_below,
                    lcr,
                    afd,
                    cdf,
                    lcr_se,
                    afd_se,
                }
            })
            .collect();
        Ok(SimEstimate {
            duration,
            sample_rate: self.sample_rate,
            points,
        })
    }
}

/// Crossing statistics at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub threshold: f64,
    pub crossings: u64,
    /// Seconds spent strictly below the threshold.
    pub time_below: f64,
    /// `crossings / duration`.
    pub lcr: f64,
    /// `time_below / crossings`; `None` without crossings.
    pub afd: Option<f64>,
    /// Fraction of samples below the threshold.
    pub cdf: f64,
    pub lcr_se: f64,
    pub afd_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub duration: f64,
    pub sample_rate: f64,
    pub points: Vec<ThresholdEstimate>,
}

impl SimEstimate {
    /// Thresholds at which no crossing was observed.
    pub fn undefined_afd(&self) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.afd.is_none())
            .map(|p| p.threshold)
            .collect()
    }

    pub fn to_curve(&self) -> SecondOrderCurve {
        SecondOrderCurve {
            method: Method::Simulated,
            points: self
                .points
                .iter()
                .map(|p| CurvePoint {
                    threshold: p.threshold,
                    lcr: p.lcr,
                    afd: p.afd,
                    cdf: p.cdf,
                    lcr_se: Some(p.lcr_se),
                    afd_se: p.afd_se,
                })
                .collect(),
        }
    }
}

/// Empirical LCR/AFD of `samples` taken at `sample_rate`.
pub fn estimate_samples(samples: &[f64], sample_rate: f64, grid: &ThresholdGrid) -> Result<SimEstimate> {
    let mut c = CrossingCounter::new(grid, sample_rate, samples.len(), DEFAULT_BATCHES);
    c.push(samples);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(v: &[f64]) -> ThresholdGrid {
        ThresholdGrid::new(v.to_vec(), 1.0).unwrap()
    }

    // Direct per-threshold count, used as the oracle.
    fn naive(samples: &[f64], y: f64) -> (u64, u64) {
        let c = samples.windows(2).filter(|w| w[0] >= y && w[1] < y).count() as u64;
        let b = samples.iter().filter(|&&s| s < y).count() as u64;
        (c, b)
    }

    #[test]
    fn matches_naive_count() {
        let samples: Vec<f64> = (0..5000)
            .map(|k| {
                let t = k as f64 * 0.01;
                1.0 + 0.8 * (3.0 * t).sin() * (0.7 * t).cos() + 0.1 * (17.0 * t).sin()
            })
            .collect();
        let g = grid(&[0.3, 0.5, 0.9, 1.0, 1.2, 1.7]);
        let est = estimate_samples(&samples, 100.0, &g).unwrap();
        for p in &est.points {
            let (c, b) = naive(&samples, p.threshold);
            assert_eq!(p.crossings, c);
            assert!((p.time_below - b as f64 / 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_count_as_above() {
        let g = grid(&[1.0]);
        let e = estimate_samples(&[1.0, 0.5, 1.0, 1.0, 0.9], 1.0, &g).unwrap();
        assert_eq!(e.points[0].crossings, 2);
        let e = estimate_samples(&[2.0, 1.0, 0.5], 1.0, &g).unwrap();
        assert_eq!(e.points[0].crossings, 1);
    }

    #[test]
    fn constant_and_high_thresholds() {
        let s = vec![2.0; 100];
        let e = estimate_samples(&s, 10.0, &grid(&[1.0, 3.0])).unwrap();
        assert_eq!(e.points[0].crossings, 0);
        assert_eq!(e.points[0].time_below, 0.0);
        assert_eq!(e.points[1].crossings, 0);
        assert!((e.points[1].time_below - 10.0).abs() < 1e-12);
        assert!(e.points[1].afd.is_none());
        assert_eq!(e.undefined_afd(), vec![1.0, 3.0]);
        assert!(estimate_samples(&[1.0], 1.0, &grid(&[1.0])).is_err());
    }

    #[test]
    fn chunked_push_equals_single_push() {
        let s: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.37).sin().abs()).collect();
        let g = grid(&[0.1, 0.5, 0.9]);
        let mut a = CrossingCounter::new(&g, 50.0, s.len(), 7);
        a.push(&s);
        let mut b = CrossingCounter::new(&g, 50.0, s.len(), 7);
        for c in s.chunks(33) {
            b.push(c);
        }
        assert_eq!(a.finish().unwrap(), b.finish().unwrap());
    }

    #[test]
    fn identity_holds() {
        let s: Vec<f64> = (0..3000).map(|k| 1.0 + (k as f64 * 0.05).sin()).collect();
        let e = estimate_samples(&s, 20.0, &grid(&[0.5, 1.0, 1.5])).unwrap();
        for p in &e.points {
            let a = p.afd.unwrap();
            assert!(((a * p.lcr - p.cdf) / p.cdf).abs() < 1e-12);
        }
    }
}
