//! Exact LCR/AFD by numerical integration.
//!
//! With `x_i = √Ω_i·e^{u_i}`, `s = y²/Φ` and `S = Σ u_i` the exact rate is
//!
//! ```text
//! N_Y(y) = 2^{N-1/2} √π · y/√Φ · ∫_{ℝ^{N-1}} √(f_N² + s e^{-2S} Σ f_i² e^{-2u_i})
//!                                  · exp(S - s e^{-2S} - Σ e^{2u_i}) du.
//! ```
//!
//! The exponent is concave in `u`, so every nested one-dimensional slice has
//! a single peak. Each slice is integrated adaptively between limits where
//! the exponent, maximised over the variables still to be integrated, has
//! fallen [`DROP`] nats below its value at the slice peak.

use std::f64::consts::PI;

use crate::analytic::lcr_critical_point;
use crate::channel::CascadeSpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_fn, Tolerance};
use crate::specialfn::cdf_product_rayleigh;

/// Log-drop that bounds every slice; `e^{-46} ≈ 1e-20`.
const DROP: f64 = 46.0;

/// Largest cascade handled by [`exact_lcr`].
pub const MAX_EXACT_HOPS: usize = 4;

/// Placement of the integration limits in `u`-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMapping {
    /// Per-slice limits around the conditional peak of the exponent.
    CriticalPointCentered,
    /// One fixed box around the joint critical point, with limits derived
    /// from the worst case over the other coordinates.
    LogSubstitution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Integrand evaluations allowed per one-dimensional slice.
    pub node_budget: usize,
    pub mapping: DomainMapping,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-7,
            node_budget: 15 * 400,
            mapping: DomainMapping::CriticalPointCentered,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_mapping(mut self, mapping: DomainMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::invalid(format!(
                "quadrature rel_tol must lie in (0, 1e-3], got {}",
                self.rel_tol
            )));
        }
        if self.node_budget < 16 {
            return Err(Error::invalid(format!(
                "node budget must be at least 16 per dimension, got {}",
                self.node_budget
            )));
        }
        Ok(())
    }

    fn tolerance(&self, rel: f64) -> Tolerance {
        Tolerance::relative(rel).with_max_panels((self.node_budget / 15).max(2))
    }
}

fn check_inputs(cascade: &CascadeSpec, y: f64, q: &QuadratureSpec) -> Result<()> {
    q.validate()?;
    if !(y > 0.0) || y.is_infinite() {
        return Err(Error::domain("exact_lcr", format!("threshold must be positive and finite, got {y}")));
    }
    if cascade.is_static() {
        return Err(Error::StaticChannel);
    }
    Ok(())
}

/// Root `t` of `2e^{2t} = 1 + 2 exp(ln_a - 2 m t)`: the common value of
/// `m` symmetric coordinates that maximises `m t - e^{ln_a - 2mt} - m e^{2t}`.
fn solve_symmetric(ln_a: f64, m: f64) -> f64 {
    let f = |t: f64| {
        let b = (ln_a - 2.0 * m * t).exp();
        (2.0 * (2.0 * t).exp() - 1.0 - 2.0 * b, 4.0 * (2.0 * t).exp() + 4.0 * m * b)
    };
    let mut lo = -0.35;
    let mut hi = f64::max(0.5, (ln_a + 1.0) / (2.0 * (m + 1.0)));
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(t);
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - v / d;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 1e-14 * (1.0 + t.abs()) {
            return next;
        }
        t = next;
    }
    t
}

struct Integrand {
    dim: usize,
    ln_s: f64,
    s: f64,
    f2: Vec<f64>,
    f2_last: f64,
    /// Exponent at the joint maximum; subtracted to keep values O(1).
    log_scale: f64,
}

impl Integrand {
    fn new(cascade: &CascadeSpec, y: f64) -> Self {
        let n = cascade.n_hops();
        let s = y * y / cascade.phi();
        let ln_s = s.ln();
        let dim = n - 1;
        let log_scale = if dim == 0 {
            -s
        } else {
            let m = dim as f64;
            let t = solve_symmetric(ln_s, m);
            m * t - (ln_s - 2.0 * m * t).exp() - m * (2.0 * t).exp()
        };
        let f2 = cascade.doppler_sq();
        Integrand {
            dim,
            ln_s,
            s,
            f2: f2[..n - 1].to_vec(),
            f2_last: f2[n - 1],
            log_scale,
        }
    }

    fn value(&self, u: &[f64]) -> f64 {
        let sum: f64 = u.iter().sum();
        let a = (self.ln_s - 2.0 * sum).exp();
        let mut weighted = 0.0;
        let mut pow = 0.0;
        for (&ui, &fi) in u.iter().zip(&self.f2) {
            weighted += fi * (-2.0 * ui).exp();
            pow += (2.0 * ui).exp();
        }
        let g = sum - a - pow - self.log_scale;
        if g < -745.0 {
            return 0.0;
        }
        (self.f2_last + a * weighted).sqrt() * g.exp()
    }

    /// Profile of the exponent in coordinate `u` given the prefix sum and
    /// the number `rest` of later coordinates; terms that do not depend on
    /// `u` are dropped.
    fn slice_profile(&self, prefix_sum: f64, rest: usize, u: f64) -> f64 {
        let p = prefix_sum + u;
        let ln_a = self.ln_s - 2.0 * p;
        let own = u - (2.0 * u).exp();
        if rest == 0 {
            return own - ln_a.exp();
        }
        let m = rest as f64;
        let t = solve_symmetric(ln_a, m);
        own + m * t - (ln_a - 2.0 * m * t).exp() - m * (2.0 * t).exp()
    }

    /// Integration limits and the peak of the slice.
    fn slice_limits(&self, prefix_sum: f64, rest: usize) -> (f64, f64, f64) {
        let centre = solve_symmetric(self.ln_s - 2.0 * prefix_sum, (rest + 1) as f64);
        let peak = self.slice_profile(prefix_sum, rest, centre);
        let widen = if rest == 0 { 1.0 } else { 1.5 };
        let edge = |dir: f64| {
            let mut d = 0.5;
            while self.slice_profile(prefix_sum, rest, centre + dir * d) > peak - DROP {
                d *= 2.0;
                if d > 1e4 {
                    break;
                }
            }
            d * widen
        };
        let lo = centre - edge(-1.0);
        let hi = centre + edge(1.0);
        (lo, centre, hi)
    }
}

/// Exact LCR for cascades of up to [`MAX_EXACT_HOPS`] hops.
pub fn exact_lcr(cascade: &CascadeSpec, y: f64, q: &QuadratureSpec) -> Result<f64> {
    check_inputs(cascade, y, q)?;
    let n = cascade.n_hops();
    if n > MAX_EXACT_HOPS {
        return Err(Error::Unsupported(format!(
            "exact LCR is limited to N <= {MAX_EXACT_HOPS} hops (got N = {n}); use the Laplace or simulated method"
        )));
    }
    if n == MAX_EXACT_HOPS {
        log::warn!("exact LCR with {n} hops uses a {}-dimensional integral and is slow", n - 1);
    }
    let integrand = Integrand::new(cascade, y);
    let prefactor = 2f64.powf(n as f64 - 0.5) * PI.sqrt() * integrand.s.sqrt();
    let integral = if n == 1 {
        integrand.value(&[])
    } else {
        match q.mapping {
            DomainMapping::CriticalPointCentered => {
                let mut prefix = Vec::with_capacity(n - 1);
                nested(&integrand, q, &mut prefix, 0.0)?
            }
            DomainMapping::LogSubstitution => {
                let bounds = fixed_box(cascade, y, &integrand);
                let mut prefix = Vec::with_capacity(n - 1);
                nested_box(&integrand, q, &bounds, &mut prefix)?
            }
        }
    };
    Ok(prefactor * integral * integrand.log_scale.exp())
}

fn inner_tolerance(q: &QuadratureSpec, depth: usize) -> Tolerance {
    let rel = q.rel_tol * 0.1f64.powi(depth.min(2) as i32);
    let mut t = q.tolerance(rel);
    if depth > 0 {
        t.abs = 1e-15;
    }
    t
}

fn nested(
    ig: &Integrand,
    q: &QuadratureSpec,
    prefix: &mut Vec<f64>,
    prefix_sum: f64,
) -> Result<f64> {
    let depth = prefix.len();
    let rest = ig.dim - depth - 1;
    let (lo, c, hi) = ig.slice_limits(prefix_sum, rest);
    let bps = [lo, c - 0.25 * (c - lo), c, c + 0.25 * (hi - c), hi];
    let tol = inner_tolerance(q, depth);
    let est = if rest == 0 {
        let mut u = prefix.clone();
        u.push(0.0);
        integrate_fn(
            |v| {
                *u.last_mut().unwrap() = v;
                ig.value(&u)
            },
            &bps,
            tol,
        )?
    } else {
        integrate(
            |v| {
                prefix.push(v);
                let r = nested(ig, q, prefix, prefix_sum + v);
                prefix.pop();
                r
            },
            &bps,
            tol,
        )?
    };
    Ok(est.value)
}

/// Per-coordinate limits of the fixed box.
struct BoxBounds {
    lo: f64,
    centre: f64,
    hi: f64,
}

fn fixed_box(cascade: &CascadeSpec, y: f64, ig: &Integrand) -> BoxBounds {
    let n = cascade.n_hops() as f64;
    // Critical point of the exponent without the Jacobian term, in u-space.
    let x = lcr_critical_point(cascade, y).expect("N >= 2 here");
    let centre = (x[0] / cascade.omegas()[0].sqrt()).ln();
    let q = ig.s.powf(1.0 / n);
    // e^{2u} beyond the peak exponent plus DROP kills the integrand.
    let hi = (0.5 * (n * q + DROP + 10.0).ln()).max(centre) + 1.0;
    // s e^{-2S} must stay below the same budget, with the other
    // coordinates at most `hi`.
    let lo = 0.5 * (ig.ln_s - (n * q + DROP + 10.0).ln()) - (n - 2.0) * hi - 1.0;
    BoxBounds {
        lo,
        centre: centre.clamp(lo, hi),
        hi,
    }
}

fn nested_box(
    ig: &Integrand,
    q: &QuadratureSpec,
    b: &BoxBounds,
    prefix: &mut Vec<f64>,
) -> Result<f64> {
    let depth = prefix.len();
    let rest = ig.dim - depth - 1;
    let mut bps = vec![b.lo];
    let mut k = b.lo + 1.0;
    while k < b.centre {
        bps.push(k);
        k += 1.0;
    }
    if b.centre > b.lo && b.centre < b.hi {
        bps.push(b.centre);
    }
    k = b.centre + 0.5;
    while k < b.hi {
        bps.push(k);
        k += 0.5;
    }
    bps.push(b.hi);
    bps.dedup_by(|a, c| (*a - *c).abs() < 1e-12);
    let tol = inner_tolerance(q, depth);
    let est = if rest == 0 {
        let mut u = prefix.clone();
        u.push(0.0);
        integrate_fn(
            |v| {
                *u.last_mut().unwrap() = v;
                ig.value(&u)
            },
            &bps,
            tol,
        )?
    } else {
        integrate(
            |v| {
                prefix.push(v);
                let r = nested_box(ig, q, b, prefix);
                prefix.pop();
                r
            },
            &bps,
            tol,
        )?
    };
    Ok(est.value)
}

/// Exact LCR of a dual-hop cascade from its single-integral form
///
/// ```text
/// N_Y(y) = 4√π y / (√2 Ω₁Ω₂) ∫_0^∞ √(Ω₂f₂² + Ω₁f₁² y²/x⁴) exp(-(y²/(x²Ω₂) + x²/Ω₁)) dx.
/// ```
pub fn exact_lcr_dualhop(cascade: &CascadeSpec, y: f64, q: &QuadratureSpec) -> Result<f64> {
    check_inputs(cascade, y, q)?;
    if cascade.n_hops() != 2 {
        return Err(Error::Unsupported(format!(
            "the single-integral form needs exactly 2 hops, got {}",
            cascade.n_hops()
        )));
    }
    let om = cascade.omegas();
    let (o1, o2) = (om[0], om[1]);
    let f2 = cascade.doppler_sq();
    let (f1s, f2s) = (f2[0], f2[1]);
    let y2 = y * y;
    let h = |x: f64| y2 / (x * x * o2) + x * x / o1;
    let xc = lcr_critical_point(cascade, y)?[0];
    let hc = h(xc);
    let budget = hc + DROP + 10.0;
    let lo = y / (o2 * budget).sqrt();
    let hi = (o1 * budget).sqrt();
    let mut bps = vec![lo];
    let mut x = xc;
    let mut below = Vec::new();
    while x / 2.0 > lo {
        x /= 2.0;
        below.push(x);
    }
    bps.extend(below.iter().rev());
    bps.push(xc);
    x = xc;
    while x * 2.0 < hi {
        x *= 2.0;
        bps.push(x);
    }
    bps.push(hi);
    bps.dedup_by(|a, c| (*a - *c).abs() <= 1e-15 * c.abs());
    let integrand = |x: f64| {
        let x2 = x * x;
        (o2 * f2s + o1 * f1s * y2 / (x2 * x2)).sqrt() * (-(h(x) - hc)).exp()
    };
    let est = integrate_fn(integrand, &bps, q.tolerance(q.rel_tol))?;
    Ok(4.0 * PI.sqrt() * y / (2f64.sqrt() * o1 * o2) * est.value * (-hc).exp())
}

/// Exact AFD, `F_Y(y) / N_Y(y)`.
pub fn exact_afd(cascade: &CascadeSpec, y: f64, q: &QuadratureSpec) -> Result<f64> {
    let lcr = exact_lcr(cascade, y, q)?;
    if lcr == 0.0 {
        return Err(Error::UndefinedAfd { threshold: y });
    }
    Ok(cdf_product_rayleigh(y, cascade)? / lcr)
}
