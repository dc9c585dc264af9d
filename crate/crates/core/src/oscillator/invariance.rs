use serde::Serialize;

use super::dissipator::build_dissipator;
use super::stats::renewal_statistics;
use super::trace::{propagate_conditional, GridSpec};
use crate::clockcore::{make_model, Overrides, Regime};
use crate::error::{Error, Result};
use crate::gatesim::{trace_distance, GateProgram, Method};
use crate::scalar::{vnorm, Real};

/// Dimensionless quantities of one cycle.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DimensionlessCycle {
    pub t0: f64,
    pub ng: usize,
    pub p_in_t0_sq: f64,
    pub eps_r: f64,
    pub m1_over_t0: f64,
    pub e_re_t0: f64,
    /// Trace distance to the ideal state at each t_j, j = 1..N_g-1.
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub reference: DimensionlessCycle,
    pub scaled: DimensionlessCycle,
    /// Largest relative deviation over all compared quantities.
    pub max_rel_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

fn cycle_at<T: Real>(
    d: usize,
    eps_bar: T,
    regime: Regime,
    t0: T,
    overrides: &Overrides,
    gates: &[String],
    gamma_bar0: T,
    eps_b: Option<T>,
    grid: &GridSpec<T>,
    method: Method,
) -> Result<DimensionlessCycle> {
    let model = make_model(d, eps_bar, regime, t0, overrides)?;
    let program = GateProgram::<T>::repeat(gates, model.ng.saturating_sub(1))?;
    let diss = build_dissipator(&model, &program, gamma_bar0, eps_b)?;
    let tr = propagate_conditional(&model, &program, &diss, grid, method)?;
    let st = renewal_statistics(&tr, &model)?;
    let targets = super::cycles::ideal_cycle_targets(&model, &program, &program.initial_logical);
    let mut errors = Vec::with_capacity(targets.len());
    for (j, tgt) in targets.iter().enumerate() {
        let psi = &tr.checkpoints[j + 1];
        let n = vnorm(psi);
        let normed: Vec<_> = psi.iter().map(|z| z.unscale(n)).collect();
        errors.push(trace_distance(tgt, &normed)?.to_f64_lossy());
    }
    Ok(DimensionlessCycle {
        t0: t0.to_f64_lossy(),
        ng: model.ng,
        p_in_t0_sq: (st.p_in * t0 * t0).to_f64_lossy(),
        eps_r: st.eps_r.to_f64_lossy(),
        m1_over_t0: (st.m1 / t0).to_f64_lossy(),
        e_re_t0: (st.e_re * t0).to_f64_lossy(),
        errors,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s < 1e-300 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Run the same cycle at T0 = 1 and at T0 = `scale` and compare the
/// dimensionless outputs. Gate errors near zero are compared absolutely.
#[allow(clippy::too_many_arguments)]
pub fn t0_invariance_check<T: Real>(
    d: usize,
    eps_bar: T,
    regime: Regime,
    overrides: &Overrides,
    gates: &[String],
    gamma_bar0: T,
    eps_b_override: Option<T>,
    scale: T,
    grid: &GridSpec<T>,
    method: Method,
    tol: f64,
) -> Result<InvarianceReport> {
    if !(scale > T::zero()) {
        return Err(Error::param("scale", "must be positive"));
    }
    let a = cycle_at(d, eps_bar, regime, T::one(), overrides, gates, gamma_bar0, eps_b_override, grid, method)?;
    let b = cycle_at(d, eps_bar, regime, scale, overrides, gates, gamma_bar0, eps_b_override, grid, method)?;
    let mut dev: f64 = if a.ng == b.ng { 0.0 } else { f64::INFINITY };
    for (x, y) in [
        (a.p_in_t0_sq, b.p_in_t0_sq),
        (a.m1_over_t0, b.m1_over_t0),
        (a.e_re_t0, b.e_re_t0),
    ] {
        dev = dev.max(rel(x, y));
    }
    dev = dev.max((a.eps_r - b.eps_r).abs());
    for (x, y) in a.errors.iter().zip(&b.errors) {
        dev = dev.max((x - y).abs());
    }
    Ok(InvarianceReport { pass: dev <= tol, reference: a, scaled: b, max_rel_deviation: dev, tol })
}
