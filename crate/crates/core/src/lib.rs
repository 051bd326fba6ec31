//! Level crossing rate and average fade duration of the product of `N`
//! Rayleigh envelopes, as seen at the nodes of a multihop amplify-and-forward
//! relay chain.
//!
//! Three routes compute the same quantities:
//!
//! * [`laplace_lcr`] / [`laplace_afd`]: closed form from a multivariate
//!   Laplace approximation of the crossing integral,
//! * [`exact_lcr`] / [`exact_afd`]: adaptive nested quadrature (`N ≤ 4`),
//! * [`simulator`]: sum-of-sinusoids traces and crossing counts.
//!
//! The CDF of the product comes from [`cdf_product_rayleigh`].

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod curves;
pub mod error;
pub mod exact;
pub mod figures;
pub mod quadrature;
pub mod simulator;
pub mod specialfn;

pub use analytic::{
    generic_laplace_approx, laplace_afd, laplace_lcr, lcr_critical_point, lcr_hessian,
    lcr_laplace_problem, lcr_prefactor, rayleigh_lcr, special_case_lcr, Domain, LaplaceProblem,
    LaplaceResult, LcrHessian, SpecialCase, SpecialCaseParams,
};
pub use channel::{
    db_to_power_ratio, CascadeSpec, CurvePoint, DopplerSpec, HopSpec, Method, RelayGain,
    SecondOrderCurve, ThresholdGrid,
};
pub use curves::{compute_curve, CurveOptions, SimulationSettings};
pub use error::{Error, Result};
pub use exact::{exact_afd, exact_lcr, DomainMapping, QuadratureSpec, MAX_EXACT_HOPS};
pub use figures::{run_figure, FigureScenario, Metric, TapCurves, FIGURE_TAPS};
pub use simulator::{
    cascade_trace, estimate_lcr_afd, gen_f2m_trace, gen_m2m_trace, simulate_taps, FadingTrace,
    SimEstimate, TraceSpec,
};
pub use specialfn::{cdf_product_rayleigh, product_exp_cdf, CdfEvalOptions};
