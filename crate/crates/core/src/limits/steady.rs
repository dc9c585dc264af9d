use super::isentropic::IsentropicReport;
use crate::error::{Error, Result};
use crate::gatesim::{BoundConstants, BoundEntry, BoundReport};
use crate::oscillator::CycleStats;
use crate::scalar::Real;

/// Steady-state bounds on f: (T0²P_in + ε_H^0)/((λ+1)κT0) always, and
/// √(T0²P_in + ε_H^0)/((λ+1)c0 T0) for semi-classical control.
///
/// Refused when the cycle's gates do not fit inside [0, t_max).
pub fn check_steady_bounds<T: Real>(
    stats: &CycleStats<T>,
    report: &IsentropicReport<T>,
    f: T,
    classical: bool,
) -> Result<BoundReport> {
    let constants = &BoundConstants {
        lambda: report.lambda_const,
        kappa: report.kappa_const,
        c0: report.c0_const,
    };
    let t1 = report.t1.to_f64_lossy();
    let last_gate = report.gates as f64 * t1;
    if report.t_max.to_f64_lossy() < last_gate * (1.0 - 1e-9) {
        return Err(Error::Degenerate(format!(
            "gates run to {last_gate:.6e} but the isentropic interval ends at {:.6e}",
            report.t_max.to_f64_lossy()
        )));
    }
    let t0 = report.t0.to_f64_lossy();
    let x = (stats.p_in * report.t0 * report.t0 + report.eps_h0).to_f64_lossy();
    let lam1 = report.lambda_const + 1.0;
    let f = f.to_f64_lossy();
    let mut entries = vec![BoundEntry::new("steady_quantum", f, x / (lam1 * report.kappa_const * t0), constants)];
    if classical {
        let rhs = x.max(0.0).sqrt() / (lam1 * report.c0_const * t0);
        entries.push(BoundEntry::new("steady_semiclassical", f, rhs, constants));
    }
    Ok(BoundReport { entries, degenerate: x <= 0.0 })
}
