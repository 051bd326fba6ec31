//! Sum-of-sinusoids generators for Rayleigh hops.
//!
//! A hop is a set of oscillators `z_k(t) = e^{jω_k t}` with complex weights
//! `p_k`, `q_k`; the in-phase and quadrature components are
//! `I = Σ Re(p_k z_k)` and `Q = Σ Re(q_k z_k)`. Both components and their
//! derivatives are evaluated exactly on a coarse grid (at least 16 points
//! per period of the highest oscillator frequency) and filled in between by
//! cubic Hermite interpolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Coarse grid points per period of the fastest oscillator.
const COARSE_PER_PERIOD: f64 = 16.0;
/// Coarse steps between exact re-evaluations of the phasors.
const REANCHOR: usize = 512;

/// `q` is empty for a complex bank, where `I + jQ = Σ p_k z_k`.
#[derive(Debug, Clone)]
pub(crate) struct OscillatorBank {
    omega: Vec<f64>,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl OscillatorBank {
    /// Fixed-to-mobile hop: `M` oscillators per component with arrival
    /// angles `α_n = (2πn - π + θ)/(4M)` and independent uniform phases.
    pub(crate) fn fixed_to_mobile(omega_power: f64, fm: f64, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let wd = 2.0 * PI * fm;
        let amp = (omega_power / m as f64).sqrt();
        let theta = uniform_phase(rng);
        let mut bank = OscillatorBank::with_capacity(2 * m);
        for n in 1..=m {
            let alpha = (2.0 * PI * n as f64 - PI + theta) / (4.0 * m as f64);
            let phi = uniform_phase(rng);
            let psi = uniform_phase(rng);
            bank.push(wd * alpha.cos(), Complex64::from_polar(amp, phi), Complex64::new(0.0, 0.0));
            bank.push(wd * alpha.sin(), Complex64::new(0.0, 0.0), Complex64::from_polar(amp, psi));
        }
        bank
    }

    /// Mobile-to-mobile hop, double-ring model: `M × M` complex exponentials
    /// at `ω_tx cos α_n + ω_rx cos β_l` with independent phases.
    pub(crate) fn mobile_to_mobile(
        omega_power: f64,
        fm_tx: f64,
        fm_rx: f64,
        m: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let (w1, w2) = (2.0 * PI * fm_tx, 2.0 * PI * fm_rx);
        let amp = (omega_power / (m * m) as f64).sqrt();
        // Offsets away from 0 and 1/2 keep the angle sets free of mirror pairs.
        let u1: f64 = rng.random_range(0.1..0.4);
        let u2: f64 = rng.random_range(0.1..0.4);
        let mut bank = OscillatorBank::with_capacity(m * m);
        for n in 0..m {
            let ca = (2.0 * PI * (n as f64 + u1) / m as f64).cos();
            for l in 0..m {
                let cb = (2.0 * PI * (l as f64 + u2) / m as f64).cos();
                bank.omega.push(w1 * ca + w2 * cb);
                bank.p.push(Complex64::from_polar(amp, uniform_phase(rng)));
            }
        }
        bank
    }

    fn with_capacity(n: usize) -> Self {
        OscillatorBank {
            omega: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, omega: f64, p: Complex64, q: Complex64) {
        self.omega.push(omega);
        self.p.push(p);
        self.q.push(q);
    }

    fn max_frequency(&self) -> f64 {
        self.omega.iter().fold(0.0_f64, |a, w| a.max(w.abs())) / (2.0 * PI)
    }
}

fn uniform_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

/// Values and time derivatives of both components at one coarse point.
#[derive(Debug, Clone, Copy, Default)]
struct Knot {
    i: f64,
    di: f64,
    q: f64,
    dq: f64,
}

/// Streams envelope samples of one hop at a fixed output rate.
#[derive(Debug, Clone)]
pub(crate) struct HopStream {
    bank: OscillatorBank,
    /// Output samples per coarse step.
    ratio: usize,
    coarse_dt: f64,
    /// Current phasors and per-step rotations.
    z: Vec<Complex64>,
    rot: Vec<Complex64>,
    coarse_index: usize,
    left: Knot,
    right: Knot,
    /// Position within the current coarse interval.
    offset: usize,
    weights: Vec<[f64; 4]>,
    gain: f64,
}

impl HopStream {
    pub(crate) fn new(bank: OscillatorBank, sample_rate: f64, gain: f64) -> Self {
        let fmax = bank.max_frequency();
        let ratio = if fmax > 0.0 {
            ((sample_rate / (COARSE_PER_PERIOD * fmax)).floor() as usize).max(1)
        } else {
            1
        };
        let coarse_dt = ratio as f64 / sample_rate;
        let rot = bank
            .omega
            .iter()
            .map(|&w| Complex64::from_polar(1.0, w * coarse_dt))
            .collect();
        let z = vec![Complex64::new(1.0, 0.0); bank.omega.len()];
        let weights = (0..ratio)
            .map(|j| {
                let t = j as f64 / ratio as f64;
                let t2 = t * t;
                let t3 = t2 * t;
                [
                    2.0 * t3 - 3.0 * t2 + 1.0,
                    (t3 - 2.0 * t2 + t) * coarse_dt,
                    -2.0 * t3 + 3.0 * t2,
                    (t3 - t2) * coarse_dt,
                ]
            })
            .collect();
        let mut s = HopStream {
            bank,
            ratio,
            coarse_dt,
            z,
            rot,
            coarse_index: 0,
            left: Knot::default(),
            right: Knot::default(),
            offset: 0,
            weights,
            gain,
        };
        s.left = s.knot();
        s.advance();
        s.right = s.knot();
        s
    }

    fn knot(&self) -> Knot {
        let mut k = Knot::default();
        if self.bank.q.is_empty() {
            for ((z, w), p) in self.z.iter().zip(&self.bank.omega).zip(&self.bank.p) {
                let pz = p * z;
                k.i += pz.re;
                k.q += pz.im;
                k.di -= w * pz.im;
                k.dq += w * pz.re;
            }
            return k;
        }
        for ((z, w), (p, q)) in self
            .z
            .iter()
            .zip(&self.bank.omega)
            .zip(self.bank.p.iter().zip(&self.bank.q))
        {
            let pz = p * z;
            let qz = q * z;
            k.i += pz.re;
            k.di -= w * pz.im;
            k.q += qz.re;
            k.dq -= w * qz.im;
        }
        k
    }

    fn advance(&mut self) {
        self.coarse_index += 1;
        if self.coarse_index.is_multiple_of(REANCHOR) {
            let t = self.coarse_index as f64 * self.coarse_dt;
            for (z, &w) in self.z.iter_mut().zip(&self.bank.omega) {
                *z = Complex64::from_polar(1.0, w * t);
            }
        } else {
            for (z, r) in self.z.iter_mut().zip(&self.rot) {
                *z *= r;
            }
        }
    }

    /// Writes the next `out.len()` scaled envelope samples.
    pub(crate) fn fill(&mut self, out: &mut [f64]) {
        for o in out.iter_mut() {
            let w = &self.weights[self.offset];
            let (a, b) = (&self.left, &self.right);
            let i = w[0] * a.i + w[1] * a.di + w[2] * b.i + w[3] * b.di;
            let q = w[0] * a.q + w[1] * a.dq + w[2] * b.q + w[3] * b.dq;
            *o = self.gain * (i * i + q * q).sqrt();
            self.offset += 1;
            if self.offset == self.ratio {
                self.offset = 0;
                self.left = self.right;
                self.advance();
                self.right = self.knot();
            }
        }
    }

    /// Multiplies the next `out.len()` samples into `out`.
    pub(crate) fn mul_into(&mut self, out: &mut [f64], scratch: &mut Vec<f64>) {
        scratch.resize(out.len(), 0.0);
        self.fill(scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o *= s;
        }
    }
}
