use serde::Serialize;

use crate::clockcore::{clock_state, potential_profile, ClockModel, ClockState};
use crate::error::{Error, Result};
use crate::gatesim::{assemble_hamiltonian, Coupling, GateProgram, JointHamiltonian, JointState};
use crate::scalar::{vnorm, Real, C};

/// θ-diagonal decay V_C; the jump operators are √(2 v_j)|0⟩⟨θ_j|.
#[derive(Clone, Debug, Serialize)]
pub struct Dissipator<T: Real> {
    /// Eigenvalues of V_C in the θ basis, 1/seconds.
    pub vc_values: Vec<T>,
    pub gamma_bar0: T,
    /// γ_0 = γ̄_0 d^{ε̄²}.
    pub gamma0: T,
    pub eps_b: T,
    #[serde(skip)]
    pub renewal_target: ClockState<T>,
}

impl<T: Real> Dissipator<T> {
    pub fn is_zero(&self) -> bool {
        self.vc_values.iter().all(|&v| v == T::zero())
    }

    /// ‖V_C‖ (operator norm).
    pub fn norm(&self) -> T {
        self.vc_values.iter().copied().fold(T::zero(), |a, b| a.max(b))
    }
}

/// V_C = γ_0 I_C^(N_g) + ε_b/(2T0).
///
/// The default ε_b is Σ_q d̃(m_q) · (T0 E_0)^{-1/(2√ε̄)}, with E_0 the energy of
/// |0⟩_L|0⟩_C under the gate Hamiltonian of `program`.
pub fn build_dissipator<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    gamma_bar0: T,
    eps_b_override: Option<T>,
) -> Result<Dissipator<T>> {
    if !(gamma_bar0 >= T::zero()) {
        return Err(Error::param("gamma_bar0", "must be non-negative"));
    }
    let gamma0 = gamma_bar0 * T::of_usize(model.d).powf(model.eps_bar * model.eps_bar);
    let eps_b = match eps_b_override {
        Some(e) if e >= T::zero() => e,
        Some(_) => return Err(Error::param("eps_b", "must be non-negative")),
        None => {
            if model.eps_bar <= T::zero() {
                return Err(Error::param("eps_b", "custom models need an explicit eps_b"));
            }
            let ham = assemble_hamiltonian(model, program)?;
            let psi0 = JointState::product(&program.initial_logical, &clock_state(model, T::zero()));
            let e0t0 = ham.expectation(&psi0.amplitudes)? * model.t0;
            if e0t0 <= T::zero() {
                return Err(Error::Degenerate("zero initial energy".into()));
            }
            T::of_usize(program.dtilde_sum()) * e0t0.powf(-T::one() / (T::of(2.0) * model.eps_bar.sqrt()))
        }
    };
    let base = eps_b / (T::of(2.0) * model.t0);
    let prof = potential_profile(model, model.ng, T::zero())?;
    let vc_values = prof.values.iter().map(|&p| gamma0 * p + base).collect();
    Ok(Dissipator {
        vc_values,
        gamma_bar0,
        gamma0,
        eps_b,
        renewal_target: clock_state(model, T::zero()),
    })
}

/// H' = H_C + Σ_{l<N_g} K_l ⊗ I_C^(l) with decay V_C, i.e. G = H' - iV_C.
pub fn oscillator_hamiltonian<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    dissipator: &Dissipator<T>,
) -> Result<JointHamiltonian<T>> {
    if program.len() + 1 != model.ng {
        return Err(Error::param(
            "program",
            format!("needs N_g - 1 = {} gates, got {}", model.ng - 1, program.len()),
        ));
    }
    if dissipator.vc_values.len() != model.d {
        return Err(Error::DimensionMismatch { expected: model.d, got: dissipator.vc_values.len() });
    }
    let mut couplings = Vec::with_capacity(program.len());
    for (i, g) in program.generators.iter().enumerate() {
        let p = potential_profile(model, i + 1, T::zero())?;
        couplings.push(Coupling { drive: g.drive.clone(), potential: p.values });
    }
    JointHamiltonian::new(model, program.d_l, couplings, Some(dissipator.vc_values.clone()))
}

/// Renewal channel applied to a pure L ⊗ C state, unravelled on θ-site `j`:
/// the output is (ψ(:, j)/‖ψ(:, j)‖) ⊗ |0⟩_C. None when the site carries no weight.
pub fn renew<T: Real>(
    psi: &JointState<T>,
    j: usize,
    target: &ClockState<T>,
) -> Option<(Vec<C<T>>, JointState<T>)> {
    let v = psi.at_site(j);
    let n = vnorm(&v);
    if n <= T::zero() {
        return None;
    }
    let logical: Vec<C<T>> = v.iter().map(|z| z.unscale(n)).collect();
    let out = JointState::product(&logical, target);
    Some((logical, out))
}
