//! Clock Hilbert space, quasi-ideal clock states, interaction potentials and
//! the parameter schedules tying d to the frequency/energy regimes.

mod model;
mod norms;
mod potential;
mod state;

pub use model::{eta_classical, eta_quantum, make_model, ClockModel, CustomParams, Overrides, Regime};
pub use norms::{norm_diagnostics, NormReport};
pub use potential::{
    gauss_legendre, image_terms, ln_abs_sinc, potential_profile, potential_profile_anchored,
    riemann_sum, sinc_pow, sinc_power_integral, vbar, window_center, PotentialDiag,
};
pub use state::{
    basis_change, basis_change_with, clock_state, energy_eigenstate, energy_phases, free_evolve,
    mean_energy, window_rep, Basis, ClockState, Dft,
};
pub(crate) use state::check_nonnegative_energy;
