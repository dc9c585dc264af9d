use serde::{Deserialize, Serialize};

use super::evolve::{step_count, ExactPropagator, Method, SplitStep};
use super::hamiltonian::{assemble_hamiltonian, JointHamiltonian};
use super::program::{ideal_trajectory, trace_distance, GateProgram, JointState};
use crate::clockcore::{clock_state, ClockModel, Regime};
use crate::error::Result;
use crate::scalar::{Real, C};

#[derive(Clone, Debug, Default)]
pub struct RunOptions<T> {
    /// Splitstep step; defaults to min(t_1/64, T0/(8d)) refined by halving.
    pub dt: Option<T>,
    /// Agreement demanded between dt and dt/2 on the probe window.
    pub refine_tol: Option<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateRunReport<T: Real> {
    pub d: usize,
    pub ng: usize,
    pub regime: Regime,
    pub eps_bar: T,
    pub per_gate_error: Vec<T>,
    pub max_error: T,
    /// f = N_g / T0.
    pub f: T,
    /// E_0 = ⟨ψ(0)|H|ψ(0)⟩.
    pub e0: T,
    pub f_t0: T,
    pub e0_t0: T,
    pub method: Method,
    pub dt: Option<T>,
    pub dtilde_sum: usize,
    /// Smallest trace distance between consecutive ideal logical states.
    pub min_consecutive_logical_distance: T,
    /// max_j |‖ψ(t_j)‖ - 1|.
    pub norm_drift: T,
    pub n_exponent: u32,
    pub sigma: T,
    pub n_pot: T,
    pub t0: T,
}

enum Backend<T: Real> {
    Exact(ExactPropagator<T>),
    Split(SplitStep<T>, super::evolve::StepKernel<T>, usize),
}

impl<T: Real> Backend<T> {
    fn window(&self, psi: &[C<T>], t1: T) -> Vec<C<T>> {
        match self {
            Backend::Exact(p) => p.apply(psi, t1),
            Backend::Split(ss, k, n) => {
                let mut v = psi.to_vec();
                ss.advance(&mut v, k, *n);
                v
            }
        }
    }
}

/// Starting splitstep step: an eighth of a lattice site at most. One site per
/// step makes the free phase a pure lattice shift and hides the real error.
pub fn default_dt<T: Real>(model: &ClockModel<T>) -> T {
    let site = model.t0 / T::of_usize(8 * model.d);
    (model.t1() / T::of(64.0)).min(site)
}

pub const DEFAULT_REFINE_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 8;

/// Halve dt from `dt0` until one window evolved with dt and dt/2 agrees to
/// `tol`, then return dt/2. For a second-order step the error of dt/2 is about
/// a third of that difference, which leaves room for accumulation over N_g windows.
pub fn refine_dt<T: Real>(
    ham: &JointHamiltonian<T>,
    probe: &[C<T>],
    t1: T,
    dt0: T,
    tol: T,
) -> Result<T> {
    let ss = SplitStep::new(ham.clone());
    let run = |dt: T| {
        let (n, h) = step_count(t1, dt);
        let k = ss.kernel(h);
        let mut v = probe.to_vec();
        ss.advance(&mut v, &k, n);
        v
    };
    let mut dt = dt0;
    let mut coarse = run(dt);
    for _ in 0..MAX_HALVINGS {
        let fine = run(dt / T::of(2.0));
        let a = crate::scalar::vnorm(&coarse);
        let b = crate::scalar::vnorm(&fine);
        let an: Vec<_> = coarse.iter().map(|z| z.unscale(a)).collect();
        let bn: Vec<_> = fine.iter().map(|z| z.unscale(b)).collect();
        if trace_distance(&an, &bn)? <= tol {
            return Ok(dt / T::of(2.0));
        }
        dt /= T::of(2.0);
        coarse = fine;
    }
    Ok(dt)
}

fn backend<T: Real>(
    model: &ClockModel<T>,
    ham: &JointHamiltonian<T>,
    probe: &[C<T>],
    method: Method,
    opts: &RunOptions<T>,
) -> Result<(Backend<T>, Option<T>)> {
    let t1 = model.t1();
    Ok(match method {
        Method::Exact => (Backend::Exact(ExactPropagator::new(ham)?), None),
        Method::Splitstep => {
            let dt = match opts.dt {
                Some(dt) => dt,
                None => {
                    let tol = opts.refine_tol.unwrap_or(T::of(DEFAULT_REFINE_TOL));
                    refine_dt(ham, probe, t1, default_dt(model), tol)?
                }
            };
            let ss = SplitStep::new(ham.clone());
            let (n, h) = step_count(t1, dt);
            let k = ss.kernel(h);
            (Backend::Split(ss, k, n), Some(h))
        }
    })
}

fn padded_ideal<T: Real>(program: &GateProgram<T>, ng: usize) -> Vec<Vec<C<T>>> {
    let mut ideal = ideal_trajectory(program);
    while ideal.len() < ng + 1 {
        let last = ideal.last().cloned().unwrap();
        ideal.push(last);
    }
    ideal
}

fn target<T: Real>(model: &ClockModel<T>, logical: &[C<T>], j: usize) -> JointState<T> {
    let k0 = T::of_usize(j * model.d) / T::of_usize(model.ng);
    JointState::product(logical, &clock_state(model, k0))
}

/// Evolve |0⟩_L|Ψ(0)⟩_C through one cycle and measure the error at every t_j.
pub fn run_program<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    method: Method,
    opts: &RunOptions<T>,
) -> Result<GateRunReport<T>> {
    let ham = assemble_hamiltonian(model, program)?;
    let ng = model.ng;
    let ideal = padded_ideal(program, ng);
    let psi0 = JointState::product(&program.initial_logical, &clock_state(model, T::zero()));
    let e0 = ham.expectation(&psi0.amplitudes)?;
    let (be, dt) = backend(model, &ham, &psi0.amplitudes, method, opts)?;

    let t1 = model.t1();
    let mut psi = psi0.amplitudes.clone();
    let mut errs = Vec::with_capacity(ng);
    let mut drift = T::zero();
    for j in 1..=ng {
        psi = be.window(&psi, t1);
        let nrm = crate::scalar::vnorm(&psi);
        drift = drift.max((nrm - T::one()).abs());
        let tgt = target(model, &ideal[j], j);
        let normed: Vec<_> = psi.iter().map(|z| z.unscale(nrm)).collect();
        errs.push(trace_distance(&tgt.amplitudes, &normed)?);
    }
    let mut min_dist = T::one();
    for w in ideal[..=program.len()].windows(2) {
        min_dist = min_dist.min(trace_distance(&w[0], &w[1])?);
    }
    let max_error = errs.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let f = T::of_usize(ng) / model.t0;
    Ok(GateRunReport {
        d: model.d,
        ng,
        regime: model.regime,
        eps_bar: model.eps_bar,
        per_gate_error: errs,
        max_error,
        f,
        e0,
        f_t0: f * model.t0,
        e0_t0: e0 * model.t0,
        method,
        dt,
        dtilde_sum: program.dtilde_sum(),
        min_consecutive_logical_distance: min_dist,
        norm_drift: drift,
        n_exponent: model.n_exponent,
        sigma: model.sigma,
        n_pot: model.n_pot,
        t0: model.t0,
    })
}

/// Error of each window started from its ideal input: evolve
/// |t_{j-1}⟩_L|Ψ(t_{j-1})⟩ for t_1 and compare with the ideal output.
pub fn single_step_errors<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    method: Method,
    opts: &RunOptions<T>,
) -> Result<Vec<T>> {
    let ham = assemble_hamiltonian(model, program)?;
    let ideal = padded_ideal(program, model.ng);
    let psi0 = target(model, &ideal[0], 0);
    let (be, _) = backend(model, &ham, &psi0.amplitudes, method, opts)?;
    let t1 = model.t1();
    let mut out = Vec::with_capacity(model.ng);
    for j in 1..=model.ng {
        let start = target(model, &ideal[j - 1], j - 1);
        let psi = be.window(&start.amplitudes, t1);
        let nrm = crate::scalar::vnorm(&psi);
        let normed: Vec<_> = psi.iter().map(|z| z.unscale(nrm)).collect();
        out.push(trace_distance(&target(model, &ideal[j], j).amplitudes, &normed)?);
    }
    Ok(out)
}
