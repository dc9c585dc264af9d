use serde::Serialize;

use super::dissipator::{oscillator_hamiltonian, Dissipator};
use crate::clockcore::{clock_state, mean_energy, ClockModel};
use crate::error::{Error, Result};
use crate::gatesim::{default_dt, ExpmStepper, GateProgram, JointHamiltonian, JointState, Method, SplitStep};
use crate::scalar::{vdot, Real, C};

/// Time grid of a conditional propagation.
#[derive(Clone, Debug, Serialize)]
pub struct GridSpec<T> {
    /// Lower bound on grid points per T0; rounded up so t_1 is a multiple of the step.
    pub points_per_t0: usize,
    pub t_cut_t0: T,
    /// Hard stop for the adaptive extension.
    pub max_t_cut_t0: T,
    /// Extend past t_cut until the survival drops below this.
    pub tail_tol: T,
    /// Splitstep substep; defaults to [`oscillator_dt`].
    pub dt: Option<T>,
    pub keep_states: bool,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec {
            points_per_t0: 512,
            t_cut_t0: T::of(3.0),
            max_t_cut_t0: T::of(10.0),
            tail_tol: T::of(1e-3),
            dt: None,
            keep_states: false,
        }
    }
}

/// Default oscillator substep, a sixteenth of the gate simulator's.
///
/// Strang splitting of H_C against the decay leaks O(dt²) into the renewal
/// mass; at the gate step it already shows as a 1e-4 excess in ∫P dt.
pub fn oscillator_dt<T: Real>(model: &ClockModel<T>) -> T {
    default_dt(model) / T::of(16.0)
}

/// Unnormalized conditional (no-renewal) evolution of one cycle.
#[derive(Clone, Debug, Serialize)]
pub struct CycleTrace<T: Real> {
    pub time_grid: Vec<T>,
    /// tr ρ((t|τ)).
    pub survival: Vec<T>,
    /// P(t, +1|τ) = 2 tr[V_C ρ((t|τ))].
    pub renewal_density: Vec<T>,
    /// ⟨H'⟩ of the normalized conditional state.
    pub energies: Vec<T>,
    /// √tr[V_C² ρ((t|τ))], the weighted 2-norm integrand.
    pub quality_integrand: Vec<T>,
    /// tr[H' D^re(ρ((t|τ)))].
    pub renewal_energy_rate: Vec<T>,
    /// -tr[H' D^no-re(ρ((t|τ)))] = 2 Re⟨H'ψ|V_C ψ⟩.
    pub dissipation_rate: Vec<T>,
    /// Grid steps per t_1.
    pub steps_per_t1: usize,
    pub t0: T,
    pub t1: T,
    pub t_cut: T,
    /// Survival left at the end of the grid.
    pub tail_mass: T,
    /// tr[H' ρ(τ|τ)].
    pub initial_energy: T,
    #[serde(skip)]
    pub initial_logical: Vec<C<T>>,
    /// Unnormalized states at t_j = j t_1, j = 0..=N_g.
    #[serde(skip)]
    pub checkpoints: Vec<Vec<C<T>>>,
    /// Unnormalized state at every grid point when requested.
    #[serde(skip)]
    pub states: Option<Vec<Vec<C<T>>>>,
    pub d: usize,
    pub d_l: usize,
}

enum Stepper<T: Real> {
    Split(SplitStep<T>, crate::gatesim::StepKernel<T>, usize),
    Dense(ExpmStepper<T>),
}

impl<T: Real> Stepper<T> {
    fn step(&self, psi: &mut Vec<C<T>>) {
        match self {
            Stepper::Split(ss, k, n) => ss.advance(psi, k, *n),
            Stepper::Dense(e) => *psi = e.apply(psi),
        }
    }
}

pub(crate) struct Probes<T: Real> {
    h0: T,
    overlaps: Vec<T>,
}

impl<T: Real> Probes<T> {
    pub(crate) fn new(model: &ClockModel<T>, ham: &JointHamiltonian<T>, diss: &Dissipator<T>) -> Result<Self> {
        let h0 = mean_energy(model, &diss.renewal_target)?;
        let w: Vec<T> = diss.renewal_target.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        let overlaps = ham
            .couplings
            .iter()
            .map(|c| c.potential.iter().zip(&w).fold(T::zero(), |a, (p, q)| a + *p * *q))
            .collect();
        Ok(Probes { h0, overlaps })
    }

    /// 2 Σ_k v_k [⟨0|H_C|0⟩ ‖ψ_k‖² + Σ_l ⟨0|I^(l)|0⟩ ψ_k† K_l ψ_k].
    fn renewal_energy(&self, ham: &JointHamiltonian<T>, v: &[T], psi: &[C<T>]) -> T {
        let (d, dl) = (ham.d, ham.d_l);
        let mut acc = T::zero();
        for k in 0..d {
            if v[k] == T::zero() {
                continue;
            }
            let mut site = T::zero();
            for a in 0..dl {
                site += psi[a * d + k].norm_sqr();
            }
            let mut e = self.h0 * site;
            for (c, &ov) in ham.couplings.iter().zip(&self.overlaps) {
                let mut q = C::new(T::zero(), T::zero());
                for a in 0..dl {
                    for b in 0..dl {
                        q += psi[a * d + k].conj() * c.drive[(a, b)] * psi[b * d + k];
                    }
                }
                e += ov * q.re;
            }
            acc += T::of(2.0) * v[k] * e;
        }
        acc
    }
}

/// Conditional propagation of |L⟩ ⊗ |0⟩_C under G = H' - iV_C.
pub fn propagate_from<T: Real>(
    model: &ClockModel<T>,
    ham: &JointHamiltonian<T>,
    logical: &[C<T>],
    dissipator: &Dissipator<T>,
    grid: &GridSpec<T>,
    method: Method,
) -> Result<CycleTrace<T>> {
    if grid.points_per_t0 == 0 || !(grid.t_cut_t0 > T::zero()) {
        return Err(Error::param("grid", "need points_per_t0 >= 1 and t_cut > 0"));
    }
    let v = ham
        .decay
        .clone()
        .ok_or_else(|| Error::param("hamiltonian", "oscillator Hamiltonian needs a decay term"))?;
    let ng = model.ng;
    let m = grid.points_per_t0.div_ceil(ng).max(1);
    let t1 = model.t1();
    let hg = t1 / T::of_usize(m);
    let stepper = match method {
        Method::Splitstep => {
            let target = grid.dt.unwrap_or_else(|| oscillator_dt(model));
            if !(target > T::zero()) {
                return Err(Error::param("dt", "must be positive"));
            }
            let sub = (hg / target - T::of(1e-9)).ceil().max(T::one()).to_usize().unwrap_or(1);
            let ss = SplitStep::new(ham.clone());
            let k = ss.kernel(hg / T::of_usize(sub));
            Stepper::Split(ss, k, sub)
        }
        Method::Exact => Stepper::Dense(ExpmStepper::new(ham, hg)?),
    };
    let probes = Probes::new(model, ham, dissipator)?;

    let psi0 = JointState::product(logical, &dissipator.renewal_target);
    let mut psi = psi0.amplitudes.clone();
    let initial_energy = ham.expectation(&psi)?;
    let cut_steps = (grid.t_cut_t0 * T::of_usize(ng * m)).ceil().to_usize().unwrap_or(0);
    let max_steps = (grid.max_t_cut_t0.max(grid.t_cut_t0) * T::of_usize(ng * m))
        .ceil()
        .to_usize()
        .unwrap_or(cut_steps);

    let mut tr = CycleTrace {
        time_grid: vec![],
        survival: vec![],
        renewal_density: vec![],
        energies: vec![],
        quality_integrand: vec![],
        renewal_energy_rate: vec![],
        dissipation_rate: vec![],
        steps_per_t1: m,
        t0: model.t0,
        t1,
        t_cut: T::zero(),
        tail_mass: T::zero(),
        initial_energy,
        initial_logical: logical.to_vec(),
        checkpoints: vec![],
        states: if grid.keep_states { Some(vec![]) } else { None },
        d: model.d,
        d_l: ham.d_l,
    };
    let mut i = 0usize;
    loop {
        let surv = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if let Some(&prev) = tr.survival.last() {
            if surv > prev + T::of(1e-10) {
                return Err(Error::NumericalFault(format!(
                    "survival increased from {:.12e} to {:.12e} at step {i}",
                    prev.to_f64_lossy(),
                    surv.to_f64_lossy()
                )));
            }
        }
        let hp = ham.apply(&psi);
        let vp = ham.apply_decay(&psi);
        let vexp = vdot(&psi, &vp).re;
        tr.time_grid.push(hg * T::of_usize(i));
        tr.survival.push(surv);
        tr.renewal_density.push(T::of(2.0) * vexp);
        tr.energies.push(if surv > T::zero() { vdot(&psi, &hp).re / surv } else { T::zero() });
        tr.quality_integrand.push(vp.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt());
        tr.renewal_energy_rate.push(probes.renewal_energy(ham, &v, &psi));
        tr.dissipation_rate.push(T::of(2.0) * vdot(&hp, &vp).re);
        if i % m == 0 && i / m <= ng {
            tr.checkpoints.push(psi.clone());
        }
        if let Some(s) = tr.states.as_mut() {
            s.push(psi.clone());
        }
        let done = i >= cut_steps && (surv <= grid.tail_tol || i >= max_steps);
        if done {
            break;
        }
        stepper.step(&mut psi);
        i += 1;
    }
    tr.t_cut = *tr.time_grid.last().unwrap();
    tr.tail_mass = *tr.survival.last().unwrap();
    Ok(tr)
}

/// One cycle from the program's initial logical state.
pub fn propagate_conditional<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    dissipator: &Dissipator<T>,
    grid: &GridSpec<T>,
    method: Method,
) -> Result<CycleTrace<T>> {
    let ham = oscillator_hamiltonian(model, program, dissipator)?;
    propagate_from(model, &ham, &program.initial_logical, dissipator, grid, method)
}

impl<T: Real> CycleTrace<T> {
    /// ∫ P dt over the grid.
    pub fn renewal_mass(&self) -> T {
        super::quad::trapezoid(&self.time_grid, &self.renewal_density)
    }

    pub(crate) fn clock_target(model: &ClockModel<T>, j: usize) -> crate::clockcore::ClockState<T> {
        clock_state(model, T::of_usize(j * model.d) / T::of_usize(model.ng))
    }
}
