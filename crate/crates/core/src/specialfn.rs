//! Special functions behind the closed-form expressions.
//!
//! The CDF of a product of `N` Rayleigh envelopes is the Meijer-G function
//! `G^{N,1}_{1,N+1}[z | 1; 1,…,1, 0]`, which is also the CDF of a product of
//! `N` independent unit-mean exponential variables at `z = y²/Φ`. It is
//! evaluated through the recursion
//!
//! ```text
//! F_1(z) = 1 - e^{-z},    F_n(z) = ∫_0^∞ F_{n-1}(z/t) e^{-t} dt
//! ```
//!
//! after the substitution `t = e^v`. In log coordinates every level of the
//! recursion is a convolution with the density `exp(v - e^v)`, and the
//! trapezoid rule on a shared uniform grid converges geometrically because
//! the integrand is analytic in a strip around the real axis. The step is
//! halved until two successive estimates agree to the requested tolerance.

use std::f64::consts::PI;

use crate::channel::CascadeSpec;
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper incomplete gamma function of order zero, `Γ(0, x) = E₁(x)`.
///
/// Power series below 1, continued fraction (modified Lentz) above.
pub fn gamma_upper_zero(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() && x < 0.0 {
        return Err(Error::domain("gamma_upper_zero", format!("x must be > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < 1.0 {
        // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let k = k as f64;
            term *= -x / k;
            let contrib = term / k;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() - sum);
    }
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * (-x).exp());
        }
    }
    Err(Error::Convergence {
        what: "gamma_upper_zero continued fraction",
        detail: format!("x = {x}"),
    })
}

/// Accuracy controls for [`product_exp_cdf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEvalOptions {
    pub rel_tol: f64,
    /// Number of step halvings allowed before giving up.
    pub max_depth: usize,
}

impl Default for CdfEvalOptions {
    fn default() -> Self {
        CdfEvalOptions {
            rel_tol: 1e-9,
            max_depth: 6,
        }
    }
}

impl CdfEvalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::invalid(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        Ok(())
    }
}

const INITIAL_STEP: f64 = 0.5;

/// CDF at `z` of the product of `n` independent unit-mean exponential variables.
pub fn product_exp_cdf(z: f64, n: usize, opts: &CdfEvalOptions) -> Result<f64> {
    opts.validate()?;
    if !(z >= 0.0) {
        return Err(Error::domain("product_exp_cdf", format!("z must be >= 0, got {z}")));
    }
    if n < 1 {
        return Err(Error::domain("product_exp_cdf", "n must be at least 1"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    if n == 1 {
        return Ok(-(-z).exp_m1());
    }

    // F_n(z) >= (1 - e^{-z}) · F_{n-1}(1) >= (1 - e^{-z}) / 2, so truncating
    // tails of mass below `tail` keeps the relative error under 1e-2·rel_tol.
    let lower_bound = -0.5 * (-z).exp_m1();
    let tail = 1e-2 * opts.rel_tol * lower_bound / n as f64;
    // P(ln T < v) <= e^v and P(ln T > v) = exp(-e^v).
    let v_min = tail.ln();
    let v_max = (-tail.ln()).ln();

    let mut step = INITIAL_STEP;
    let mut previous = log_grid_cdf(z.ln(), n, step, v_min, v_max);
    for _ in 0..opts.max_depth {
        step *= 0.5;
        let current = log_grid_cdf(z.ln(), n, step, v_min, v_max);
        if (current - previous).abs() <= opts.rel_tol * current.abs() {
            return Ok(current.clamp(0.0, 1.0));
        }
        previous = current;
    }
    Err(Error::Convergence {
        what: "product_exp_cdf",
        detail: format!(
            "z = {z}, n = {n}: no agreement to {} within {} halvings",
            opts.rel_tol, opts.max_depth
        ),
    })
}

/// One trapezoid pass of the log-space recursion with grid step `step`.
fn log_grid_cdf(log_z: f64, n: usize, step: f64, v_min: f64, v_max: f64) -> f64 {
    let j_lo = (v_min / step).floor() as i64;
    let j_hi = (v_max / step).ceil() as i64;
    let kernel: Vec<f64> = (j_lo..=j_hi)
        .map(|j| {
            let v = j as f64 * step;
            step * (v - v.exp()).exp()
        })
        .collect();
    let width = (j_hi - j_lo) as usize;

    // Level k is needed at grid offsets i ∈ [-(n-k)·j_hi, -(n-k)·j_lo]
    // around log_z; level n only at offset 0.
    let start = |k: usize| -((n - k) as i64) * j_hi;
    let mut level: Vec<f64> = (0..=(n - 1) * width)
        .map(|idx| {
            let w = log_z + (start(1) + idx as i64) as f64 * step;
            -(-w.exp()).exp_m1()
        })
        .collect();
    for k in 2..=n {
        let len = (n - k) * width + 1;
        let prev_start = start(k - 1);
        let cur_start = start(k);
        let mut next = vec![0.0; len];
        for (idx, out) in next.iter_mut().enumerate() {
            let i = cur_start + idx as i64;
            // G_k(i) = Σ_j G_{k-1}(i - j)·kernel_j
            let mut acc = 0.0;
            for (jj, &kv) in kernel.iter().enumerate() {
                let j = j_lo + jj as i64;
                acc += level[(i - j - prev_start) as usize] * kv;
            }
            *out = acc;
        }
        level = next;
    }
    level[0]
}

/// CDF of the product of the cascade's Rayleigh envelopes at amplitude `y`.
pub fn cdf_product_rayleigh(y: f64, cascade: &CascadeSpec) -> Result<f64> {
    cdf_product_rayleigh_with(y, cascade, &CdfEvalOptions::default())
}

pub fn cdf_product_rayleigh_with(
    y: f64,
    cascade: &CascadeSpec,
    opts: &CdfEvalOptions,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain("cdf_product_rayleigh", format!("y must be >= 0, got {y}")));
    }
    product_exp_cdf(y * y / cascade.phi(), cascade.n_hops(), opts)
}

/// Modified Bessel function of the second kind, order one.
///
/// Series for `x <= 2`; Steed's continued fraction (Temme's CF2) above.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("bessel_k1", format!("x must be > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 2.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0; // q^k / (k!(k+1)!)
        let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
        let mut psi_k2 = 1.0 - EULER_GAMMA; // ψ(k+2)
        let mut i1_sum = 0.0;
        let mut psi_sum = 0.0;
        for k in 0..60 {
            i1_sum += term;
            psi_sum += (psi_k1 + psi_k2) * term;
            let kf = k as f64;
            term *= q / ((kf + 1.0) * (kf + 2.0));
            psi_k1 += 1.0 / (kf + 1.0);
            psi_k2 += 1.0 / (kf + 2.0);
            if term < 1e-18 * i1_sum {
                break;
            }
        }
        let i1 = 0.5 * x * i1_sum;
        return Ok(1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * psi_sum);
    }
    // Order mu = 0 continued fraction; yields K_0 and K_1.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "bessel_k1 continued fraction",
            detail: format!("x = {x}"),
        });
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    Ok(k0 * (x + 0.5 - h) / x)
}
