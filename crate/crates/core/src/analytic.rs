//! Closed-form Laplace approximation of the LCR and AFD, the critical point
//! and Hessian behind it, and a generic multivariate Laplace engine.
//!
//! With the free variables `x_1 … x_{N-1}` the exact LCR is
//! `σ_N/√(2π) · 2^N y/Φ · J`, where
//!
//! ```text
//! J = ∫ u(x) exp(-h(x)) dx,
//! u(x) = [1 + y² ∏x_i⁻² Σ (σ_i²/σ_N²) x_i⁻²]^{1/2},
//! h(x) = y²/Ω_N ∏x_i⁻² + Σ x_i²/Ω_i.
//! ```
//!
//! `h` has a single interior minimum, and expanding it to second order there
//! gives the closed form returned by [`laplace_lcr`].

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::channel::{derivative_variance, CascadeSpec};
use crate::error::{Error, Result};
use crate::specialfn::cdf_product_rayleigh;

fn check_threshold(func: &'static str, y: f64) -> Result<()> {
    if !(y > 0.0) || y.is_infinite() {
        return Err(Error::domain(func, format!("threshold must be positive and finite, got {y}")));
    }
    Ok(())
}

fn check_free_variables(cascade: &CascadeSpec) -> Result<()> {
    if cascade.n_hops() < 2 {
        return Err(Error::Unsupported(
            "a single hop has no free integration variables".into(),
        ));
    }
    Ok(())
}

/// LCR of a single Rayleigh envelope with mean power `omega` and effective
/// Doppler `f1`.
pub fn rayleigh_lcr(omega: f64, f1: f64, y: f64) -> Result<f64> {
    check_threshold("rayleigh_lcr", y)?;
    if !(omega > 0.0) {
        return Err(Error::domain("rayleigh_lcr", format!("omega must be > 0, got {omega}")));
    }
    if !(f1 > 0.0) {
        return Err(Error::domain("rayleigh_lcr", format!("Doppler must be > 0, got {f1}")));
    }
    let r = y / omega.sqrt();
    Ok(f1 * (2.0 * PI).sqrt() * r * (-r * r).exp())
}

/// Interior minimiser `x̃_i = y^{1/N} Ω_i^{1/2} / Φ^{1/(2N)}` of `h`.
pub fn lcr_critical_point(cascade: &CascadeSpec, y: f64) -> Result<Vec<f64>> {
    check_free_variables(cascade)?;
    check_threshold("lcr_critical_point", y)?;
    let n = cascade.n_hops() as f64;
    let scale = y.powf(1.0 / n) / cascade.phi().powf(1.0 / (2.0 * n));
    let omegas = cascade.omegas();
    Ok(omegas[..omegas.len() - 1].iter().map(|o| scale * o.sqrt()).collect())
}

/// Hessian of `h` at its critical point, which does not depend on `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcrHessian {
    pub matrix: DMatrix<f64>,
    /// `{4/Ω_i, i ≤ N-2} ∪ {4N/Ω_{N-1}}`. Exact when `Ω_1 … Ω_{N-1}` are
    /// equal; for unequal powers only their product is right.
    pub closed_form_eigenvalues: Vec<f64>,
    /// `N·4^{N-1} / ∏_{k<N} Ω_k`.
    pub determinant: f64,
}

impl LcrHessian {
    /// Eigenvalues from a symmetric eigensolver, ascending.
    pub fn numeric_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn numeric_determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.matrix.clone().cholesky().is_some()
    }
}

pub fn lcr_hessian(cascade: &CascadeSpec) -> Result<LcrHessian> {
    check_free_variables(cascade)?;
    let n = cascade.n_hops();
    let om = &cascade.omegas()[..n - 1];
    let m = n - 1;
    let matrix = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            8.0 / om[i]
        } else {
            4.0 / (om[i] * om[j]).sqrt()
        }
    });
    let mut closed_form_eigenvalues: Vec<f64> = om[..m - 1].iter().map(|o| 4.0 / o).collect();
    closed_form_eigenvalues.push(4.0 * n as f64 / om[m - 1]);
    let determinant = n as f64 * 4f64.powi(m as i32) / om.iter().product::<f64>();
    Ok(LcrHessian {
        matrix,
        closed_form_eigenvalues,
        determinant,
    })
}

fn check_dynamic(cascade: &CascadeSpec) -> Result<()> {
    if cascade.is_static() {
        return Err(Error::StaticChannel);
    }
    Ok(())
}

/// Laplace approximation of the LCR:
/// `(Σf_i²/N)^{1/2} (2π)^{N/2} y/√Φ · exp(-N (y²/Φ)^{1/N})`.
pub fn laplace_lcr(cascade: &CascadeSpec, y: f64) -> Result<f64> {
    check_threshold("laplace_lcr", y)?;
    check_dynamic(cascade)?;
    let n = cascade.n_hops() as f64;
    let phi = cascade.phi();
    let r = y / phi.sqrt();
    let z = r * r;
    let doppler = (cascade.doppler_sum_sq() / n).sqrt();
    Ok(doppler * (2.0 * PI).powf(0.5 * n) * r * (-n * z.powf(1.0 / n)).exp())
}

/// AFD as `F_Y(y) / N_Y(y)` with the Laplace LCR.
pub fn laplace_afd(cascade: &CascadeSpec, y: f64) -> Result<f64> {
    let lcr = laplace_lcr(cascade, y)?;
    if lcr == 0.0 {
        return Err(Error::UndefinedAfd { threshold: y });
    }
    Ok(cdf_product_rayleigh(y, cascade)? / lcr)
}

/// Closed forms for structured cascades.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// All hops share the mean power `Ω` and the Doppler `f`.
    EqualPower,
    /// Every node moves with the same maximum Doppler `fm`.
    AllMobile,
    /// Source and relays move with `fm`; the destination is fixed.
    FixedDestination,
}

impl SpecialCase {
    pub fn tag(&self) -> &'static str {
        match self {
            SpecialCase::EqualPower => "equal-power",
            SpecialCase::AllMobile => "all-mobile",
            SpecialCase::FixedDestination => "fixed-destination",
        }
    }
}

impl FromStr for SpecialCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-power" => Ok(SpecialCase::EqualPower),
            "all-mobile" => Ok(SpecialCase::AllMobile),
            "fixed-destination" => Ok(SpecialCase::FixedDestination),
            other => Err(Error::invalid(format!(
                "unknown special case '{other}' (expected equal-power, all-mobile or fixed-destination)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialCaseParams {
    pub n_hops: usize,
    /// Doppler frequency in Hz: the per-hop `f` for
    /// [`SpecialCase::EqualPower`], the node maximum Doppler otherwise.
    pub fm: f64,
    /// Common hop power `Ω` for [`SpecialCase::EqualPower`], `Φ` otherwise.
    pub scale: f64,
}

/// Doppler prefactor `(Σf_i²/N)^{1/2}` of a special case.
pub fn special_case_prefactor(case: SpecialCase, n_hops: usize, fm: f64) -> f64 {
    let n = n_hops as f64;
    match case {
        SpecialCase::EqualPower => fm,
        SpecialCase::AllMobile => 2f64.sqrt() * fm,
        SpecialCase::FixedDestination => fm * ((2.0 * n - 1.0) / n).sqrt(),
    }
}

pub fn special_case_lcr(case: SpecialCase, params: &SpecialCaseParams, y: f64) -> Result<f64> {
    check_threshold("special_case_lcr", y)?;
    let SpecialCaseParams { n_hops, fm, scale } = *params;
    if n_hops == 0 {
        return Err(Error::invalid("a cascade needs at least one hop"));
    }
    if !(fm > 0.0) {
        return Err(Error::StaticChannel);
    }
    if !(scale > 0.0) {
        return Err(Error::domain("special_case_lcr", format!("scale must be > 0, got {scale}")));
    }
    let n = n_hops as f64;
    let pre = special_case_prefactor(case, n_hops, fm) * (2.0 * PI).powf(0.5 * n) * y;
    Ok(match case {
        SpecialCase::EqualPower => {
            pre / scale.powf(0.5 * n) * (-n * y.powf(2.0 / n) / scale).exp()
        }
        SpecialCase::AllMobile | SpecialCase::FixedDestination => {
            pre / scale.sqrt() * (-n * y.powf(2.0 / n) / scale.powf(1.0 / n)).exp()
        }
    })
}

/// Integration domain of a Laplace-type integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `(0, ∞)^n`; iterates are kept strictly positive.
    PositiveOrthant,
    /// `ℝ^n`.
    Whole,
}

type Field<'a> = Box<dyn Fn(&[f64]) -> f64 + Send + Sync + 'a>;

/// `J(λ) = ∫_D u(x) exp(-λ h(x)) dx`.
pub struct LaplaceProblem<'a> {
    pub dim: usize,
    pub u: Field<'a>,
    pub h: Field<'a>,
    pub lambda: f64,
    pub domain: Domain,
}

impl<'a> LaplaceProblem<'a> {
    pub fn new<U, H>(dim: usize, u: U, h: H, lambda: f64, domain: Domain) -> Result<Self>
    where
        U: Fn(&[f64]) -> f64 + Send + Sync + 'a,
        H: Fn(&[f64]) -> f64 + Send + Sync + 'a,
    {
        if dim == 0 {
            return Err(Error::invalid("Laplace problem needs at least one dimension"));
        }
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(LaplaceProblem {
            dim,
            u: Box::new(u),
            h: Box::new(h),
            lambda,
            domain,
        })
    }
}

impl std::fmt::Debug for LaplaceProblem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaplaceProblem")
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceResult {
    pub critical_point: Vec<f64>,
    pub hessian: DMatrix<f64>,
    pub det_a: f64,
    pub min_eigenvalue: f64,
    pub u_at_crit: f64,
    pub h_at_crit: f64,
    /// `(2π/λ)^{n/2} u(x̃) / √det(A) · exp(-λ h(x̃))`.
    pub approx_value: f64,
    /// Newton iterations used to locate `x̃`.
    pub iterations: usize,
    /// False when a coarse probe around `x̃` found a lower value of `h`.
    pub probe_confirms_minimum: bool,
}

/// Finite-difference step for coordinate value `x`.
fn fd_step(x: f64) -> f64 {
    (1e-5 * x.abs()).max(1e-7)
}

/// Central-difference gradient with steps `max(1e-5|x_i|, 1e-7)`.
pub fn numeric_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let d = fd_step(x[i]);
            p[i] = x[i] + d;
            let fp = f(&p);
            p[i] = x[i] - d;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * d)
        })
        .collect()
}

/// Central-difference Hessian, symmetric by construction.
pub fn numeric_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> DMatrix<f64> {
    let d: Vec<f64> = x.iter().map(|&v| fd_step(v)).collect();
    hessian_with_steps(f, x, &d)
}

/// Richardson-extrapolated Hessian on steps `d` and `d/2`, with `d` one
/// percent of the coordinate scale. Quadratics come out exact up to
/// rounding of order `ε/d²`.
fn refined_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], domain: Domain) -> DMatrix<f64> {
    let d: Vec<f64> = x
        .iter()
        .map(|&v| match domain {
            Domain::Whole => 1e-2 * v.abs().max(1.0),
            Domain::PositiveOrthant => 1e-2 * v,
        })
        .collect();
    let half: Vec<f64> = d.iter().map(|v| 0.5 * v).collect();
    let coarse = hessian_with_steps(f, x, &d);
    let fine = hessian_with_steps(f, x, &half);
    (fine * 4.0 - coarse) / 3.0
}

fn hessian_with_steps(f: &dyn Fn(&[f64]) -> f64, x: &[f64], d: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut hm = DMatrix::zeros(n, n);
    for i in 0..n {
        p[i] = x[i] + d[i];
        let fp = f(&p);
        p[i] = x[i] - d[i];
        let fm = f(&p);
        p[i] = x[i];
        hm[(i, i)] = (fp - 2.0 * f0 + fm) / (d[i] * d[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * d[i];
                p[j] = x[j] + sj * d[j];
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * d[i] * d[j]);
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
    }
    hm
}

const MAX_NEWTON: usize = 200;

/// Locates the interior minimum of `p.h` from `x0` by damped Newton steps on
/// finite-difference derivatives, then evaluates the Laplace approximation.
pub fn generic_laplace_approx(p: &LaplaceProblem<'_>, x0: &[f64]) -> Result<LaplaceResult> {
    if x0.len() != p.dim {
        return Err(Error::invalid(format!(
            "starting point has {} coordinates, problem has {}",
            x0.len(),
            p.dim
        )));
    }
    if p.domain == Domain::PositiveOrthant && x0.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("starting point must be strictly positive"));
    }
    let h = |x: &[f64]| (p.h)(x);
    let inside = |x: &[f64]| p.domain == Domain::Whole || x.iter().all(|&v| v > 0.0);

    let mut x = x0.to_vec();
    let mut hx = h(&x);
    if !hx.is_finite() {
        return Err(Error::domain("generic_laplace_approx", "h is not finite at the start point"));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_NEWTON {
        iterations += 1;
        let g = DVector::from_vec(numeric_gradient(&h, &x));
        let scale: f64 = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        if g.amax() * scale <= 1e-8 * hx.abs().max(1.0) {
            converged = true;
            break;
        }
        let hess = numeric_hessian(&h, &x);
        let dir = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -&g / hess.diagonal().amax().max(1.0),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            if inside(&trial) {
                let ht = h(&trial);
                if ht.is_finite() && ht <= hx {
                    let step = t * dir.norm();
                    x = trial;
                    hx = ht;
                    accepted = true;
                    if step <= 1e-14 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()) {
                        converged = true;
                    }
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted || converged {
            // No descent possible along the Newton direction: we sit at the
            // minimum to floating-point resolution.
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "generic_laplace_approx minimiser",
            detail: format!("no stationary point after {MAX_NEWTON} Newton steps"),
        });
    }

    let hessian = refined_hessian(&h, &x, p.domain);
    let eig = SymmetricEigen::new(hessian.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let det_a: f64 = eig.eigenvalues.iter().product();
    let u_at_crit = (p.u)(&x);
    let n = p.dim as f64;
    let approx_value =
        (2.0 * PI / p.lambda).powf(0.5 * n) * u_at_crit / det_a.sqrt() * (-p.lambda * hx).exp();
    let probe_confirms_minimum = probe_minimum(&h, &x, hx, p.domain);
    Ok(LaplaceResult {
        critical_point: x,
        hessian,
        det_a,
        min_eigenvalue,
        u_at_crit,
        h_at_crit: hx,
        approx_value,
        iterations,
        probe_confirms_minimum,
    })
}

/// Samples `h` on a coarse grid around `x` and reports whether all samples
/// are at least `h(x)`. Full tensor grid up to four dimensions, coordinate
/// lines above.
fn probe_minimum(h: &dyn Fn(&[f64]) -> f64, x: &[f64], hx: f64, domain: Domain) -> bool {
    let offsets: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    let perturb = |v: f64, o: f64| match domain {
        Domain::PositiveOrthant => v * (o * 3f64.ln()).exp(),
        Domain::Whole => v + o * v.abs().max(1.0),
    };
    let tol = 1e-12 * hx.abs().max(1.0);
    let n = x.len();
    if n <= 4 {
        let k = offsets.len() + 1;
        let total = k.pow(n as u32);
        let mut p = x.to_vec();
        for code in 1..total {
            let mut c = code;
            for i in 0..n {
                let idx = c % k;
                c /= k;
                p[i] = if idx == 0 { x[i] } else { perturb(x[i], offsets[idx - 1]) };
            }
            let v = h(&p);
            if v < hx - tol {
                return false;
            }
        }
        true
    } else {
        let mut p = x.to_vec();
        for i in 0..n {
            for &o in &offsets {
                p[i] = perturb(x[i], o);
                if h(&p) < hx - tol {
                    return false;
                }
            }
            p[i] = x[i];
        }
        true
    }
}

/// The LCR integral `J` as a Laplace problem over `(0, ∞)^{N-1}` with `λ = 1`.
///
/// Needs a time-varying last hop, since `u` is written relative to `σ_N²`.
pub fn lcr_laplace_problem(cascade: &CascadeSpec, y: f64) -> Result<LaplaceProblem<'static>> {
    check_free_variables(cascade)?;
    check_threshold("lcr_laplace_problem", y)?;
    let n = cascade.n_hops();
    let omegas = cascade.omegas().to_vec();
    let f2 = cascade.doppler_sq();
    let var: Vec<f64> = omegas
        .iter()
        .zip(f2)
        .map(|(&o, &f)| derivative_variance(o, f.sqrt()))
        .collect();
    let var_n = var[n - 1];
    if var_n == 0.0 {
        return Err(Error::Unsupported(
            "the Laplace form of the LCR integral needs a time-varying last hop".into(),
        ));
    }
    let ratios: Vec<f64> = var[..n - 1].iter().map(|v| v / var_n).collect();
    let om_h = omegas.clone();
    let y2 = y * y;
    let u = move |x: &[f64]| {
        let inv_prod: f64 = x.iter().map(|v| 1.0 / (v * v)).product();
        let s: f64 = x.iter().zip(&ratios).map(|(v, r)| r / (v * v)).sum();
        (1.0 + y2 * inv_prod * s).sqrt()
    };
    let h = move |x: &[f64]| {
        let inv_prod: f64 = x.iter().map(|v| 1.0 / (v * v)).product();
        let s: f64 = x.iter().zip(&om_h).map(|(v, o)| v * v / o).sum();
        y2 / om_h[n - 1] * inv_prod + s
    };
    LaplaceProblem::new(n - 1, u, h, 1.0, Domain::PositiveOrthant)
}

/// `2^N y σ_N / (√(2π) Φ)`, the factor turning `J` into the LCR.
pub fn lcr_prefactor(cascade: &CascadeSpec, y: f64) -> f64 {
    let n = cascade.n_hops();
    let om_n = cascade.omegas()[n - 1];
    let sigma_n = derivative_variance(om_n, cascade.doppler_sq()[n - 1].sqrt()).sqrt();
    2f64.powi(n as i32) * y * sigma_n / ((2.0 * PI).sqrt() * cascade.phi())
}
