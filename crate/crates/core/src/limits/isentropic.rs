use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::clockcore::ClockModel;
use crate::gatesim::{BoundConstants, GateProgram};
use crate::oscillator::{cumulative_trapezoid, oscillator_hamiltonian, CycleStats, CycleTrace, Dissipator};
use crate::scalar::{Real, C};

fn check_trace<T: Real>(trace: &CycleTrace<T>, diss: &Dissipator<T>) -> Result<()> {
    if diss.vc_values.len() != trace.d {
        return Err(Error::DimensionMismatch { expected: trace.d, got: diss.vc_values.len() });
    }
    Ok(())
}

/// ε^quality on every grid point of the trace.
pub fn epsilon_quality_curve<T: Real>(trace: &CycleTrace<T>) -> Vec<T> {
    cumulative_trapezoid(&trace.time_grid, &trace.quality_integrand)
}

/// ε^quality(τ) = ∫_0^τ √tr[V_C² ρ((t|τ_l))] dt; the integrand is linear
/// between grid points.
pub fn epsilon_quality<T: Real>(trace: &CycleTrace<T>, dissipator: &Dissipator<T>, tau: T) -> Result<T> {
    check_trace(trace, dissipator)?;
    if tau < T::zero() || tau > trace.t_cut * (T::one() + T::of(1e-12)) {
        return Err(Error::param("tau", "must lie in [0, t_cut]"));
    }
    if dissipator.is_zero() {
        return Ok(T::zero());
    }
    Ok(crate::oscillator::quad::trapezoid_upto(&trace.time_grid, &trace.quality_integrand, tau))
}

#[derive(Clone, Debug, Serialize)]
pub struct QualitySandwich<T: Real> {
    pub tau: T,
    /// ½∫_0^τ P dt.
    pub lower: T,
    pub value: T,
    /// (‖V_C‖τ)^{3/4} 2^{-1/4} (∫_0^τ P dt)^{1/4}.
    pub upper: T,
}

impl<T: Real> QualitySandwich<T> {
    /// Both inequalities, with a relative slack `tol` for quadrature.
    pub fn holds(&self, tol: T) -> bool {
        let s = T::one() + tol;
        self.lower <= self.value * s + T::of(1e-300) && self.value <= self.upper * s + T::of(1e-300)
    }
}

pub fn quality_sandwich<T: Real>(trace: &CycleTrace<T>, dissipator: &Dissipator<T>, tau: T) -> Result<QualitySandwich<T>> {
    let value = epsilon_quality(trace, dissipator, tau)?;
    let mass = crate::oscillator::quad::trapezoid_upto(&trace.time_grid, &trace.renewal_density, tau);
    let quarter = T::of(0.25);
    let upper = (dissipator.norm() * tau).powf(T::of(0.75)) * mass.max(T::zero()).powf(quarter)
        / T::of(2.0).powf(quarter);
    Ok(QualitySandwich { tau, lower: mass / T::of(2.0), value, upper })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TmaxStatus {
    Root,
    /// The right-hand side already exceeds the left at τ = 0.
    Zero,
    /// No crossing before t_cut; t_max = t_cut.
    Capped,
}

#[derive(Clone, Debug, Serialize)]
pub struct TmaxSolution<T: Real> {
    pub t_max: T,
    pub status: TmaxStatus,
    /// RHS - LHS of the defining equation at t_max.
    pub residual: T,
    pub eps_quality: T,
}

/// 1 - √(1 - 1/(4(1+λ)²)): ε^gate at which t_max collapses to zero.
pub fn gate_error_ceiling(lambda: f64) -> f64 {
    1.0 - (1.0 - 1.0 / (4.0 * (1.0 + lambda) * (1.0 + lambda))).sqrt()
}

/// Largest τ with ε^gate(2 - ε^gate) + 2ε^quality(τ)√(1 - ε^gate) <= 1/(4(1+λ)²).
pub fn solve_t_max<T: Real>(
    trace: &CycleTrace<T>,
    dissipator: &Dissipator<T>,
    eps_gate: T,
    constants: &BoundConstants,
) -> Result<TmaxSolution<T>> {
    check_trace(trace, dissipator)?;
    if !(eps_gate >= T::zero() && eps_gate < T::one()) {
        return Err(Error::param("eps_gate", "must lie in [0, 1)"));
    }
    let lam = T::of(constants.lambda);
    let lhs = T::one() / (T::of(4.0) * (T::one() + lam) * (T::one() + lam));
    let base = eps_gate * (T::of(2.0) - eps_gate);
    let slope = T::of(2.0) * (T::one() - eps_gate).sqrt();
    let rhs = |q: T| base + slope * q;
    let x = &trace.time_grid;
    let y = &trace.quality_integrand;
    if rhs(T::zero()) >= lhs * (T::one() - T::of(64.0) * T::default_epsilon()) {
        return Ok(TmaxSolution { t_max: T::zero(), status: TmaxStatus::Zero, residual: rhs(T::zero()) - lhs, eps_quality: T::zero() });
    }
    let curve = if dissipator.is_zero() { vec![T::zero(); x.len()] } else { epsilon_quality_curve(trace) };
    let last = *curve.last().unwrap();
    if rhs(last) <= lhs {
        return Ok(TmaxSolution { t_max: trace.t_cut, status: TmaxStatus::Capped, residual: rhs(last) - lhs, eps_quality: last });
    }
    // first cell whose right end overshoots: the crossing lies inside it
    let i = curve.iter().position(|&q| rhs(q) > lhs).unwrap() - 1;
    let h = x[i + 1] - x[i];
    let q_at = |s: T| {
        let f = s / h;
        let yi = y[i] + (y[i + 1] - y[i]) * f;
        curve[i] + (y[i] + yi) * s / T::of(2.0)
    };
    let (mut lo, mut hi) = (T::zero(), h);
    for _ in 0..200 {
        let mid = (lo + hi) / T::of(2.0);
        if rhs(q_at(mid)) <= lhs {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::default_epsilon() * x[i + 1].max(T::one()) {
            break;
        }
    }
    let q = q_at(lo);
    Ok(TmaxSolution { t_max: x[i] + lo, status: TmaxStatus::Root, residual: rhs(q) - lhs, eps_quality: q })
}

/// ‖tr_C[H̃ ρ⁰_C]‖_F ‖H̃‖_F 2𝕄(1) T0 with H̃ = H' - H_C, i.e. the smallest
/// admissible ε_H^0.
pub fn epsilon_h0<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    dissipator: &Dissipator<T>,
    stats: &CycleStats<T>,
) -> Result<T> {
    let ham = oscillator_hamiltonian(model, program, dissipator)?;
    let dl = program.d_l;
    let w: Vec<T> = dissipator.renewal_target.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let mut reduced = nalgebra::DMatrix::<C<T>>::zeros(dl, dl);
    for c in &ham.couplings {
        let ov = c.potential.iter().zip(&w).fold(T::zero(), |a, (p, q)| a + *p * *q);
        reduced += c.drive.map(|z| z.scale(ov));
    }
    let red_f = reduced.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    let mut full2 = T::zero();
    for k in 0..model.d {
        let mut b = nalgebra::DMatrix::<C<T>>::zeros(dl, dl);
        for c in &ham.couplings {
            if c.potential[k] != T::zero() {
                b += c.drive.map(|z| z.scale(c.potential[k]));
            }
        }
        full2 += b.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    }
    Ok(red_f * full2.sqrt() * T::of(2.0) * stats.m1 * model.t0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsentropicReport<T: Real> {
    pub tau_grid: Vec<T>,
    pub eps_quality: Vec<T>,
    pub eps_gate: T,
    pub t_max: T,
    pub t_max_status: TmaxStatus,
    pub t_max_residual: T,
    pub eps_h0: T,
    pub lambda_const: f64,
    pub kappa_const: f64,
    pub c0_const: f64,
    pub t0: T,
    pub t1: T,
    /// Gates applied within the cycle.
    pub gates: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn isentropic_report<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    trace: &CycleTrace<T>,
    dissipator: &Dissipator<T>,
    stats: &CycleStats<T>,
    eps_gate: T,
    constants: &BoundConstants,
) -> Result<IsentropicReport<T>> {
    let sol = solve_t_max(trace, dissipator, eps_gate, constants)?;
    Ok(IsentropicReport {
        tau_grid: trace.time_grid.clone(),
        eps_quality: epsilon_quality_curve(trace),
        eps_gate,
        t_max: sol.t_max,
        t_max_status: sol.status,
        t_max_residual: sol.residual,
        eps_h0: epsilon_h0(model, program, dissipator, stats)?,
        lambda_const: constants.lambda,
        kappa_const: constants.kappa,
        c0_const: constants.c0,
        t0: model.t0,
        t1: model.t1(),
        gates: program.len(),
    })
}
