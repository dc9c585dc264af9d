//! Squeezing classification of clock states, isentropic-interval quantities
//! of a renewal cycle, and the steady-state frequency bounds.

mod isentropic;
mod squeeze;
mod steady;

pub use isentropic::{
    epsilon_h0, epsilon_quality, epsilon_quality_curve, gate_error_ceiling, isentropic_report,
    quality_sandwich, solve_t_max, IsentropicReport, QualitySandwich, TmaxSolution, TmaxStatus,
};
pub use squeeze::{
    squeezing_report, squeezing_report_ensemble, squeezing_report_mixed, SqueezeReport, Verdict,
    EQUAL_UNCERTAINTY_TOL, PURITY_TOL, RESIDUAL_TOL_PREFACTOR,
};
pub use steady::check_steady_bounds;
