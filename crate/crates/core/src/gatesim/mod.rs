//! Gate-implementing Hamiltonian on L ⊗ C, its evolution backends, gate-error
//! measurement and frequency-versus-energy sweeps.

mod bounds;
mod evolve;
mod generator;
mod hamiltonian;
mod memory;
mod program;
mod run;
mod sweep;

pub use bounds::{check_frequency_bounds, BoundConstants, BoundEntry, BoundReport};
pub use evolve::{
    evolve, step_count, ExactPropagator, ExpmStepper, Method, SplitStep, StepKernel,
    EXACT_DIM_CAP, EXPM_DIM_CAP,
};
pub use generator::{
    count_distinct_phases, frobenius, gate_generator, named_gate, spectral_exp,
    unitarity_defect, unitary_spectrum, GateGenerator, PHASE_CLUSTER_TOL,
};
pub use hamiltonian::{assemble_hamiltonian, Coupling, JointHamiltonian};
pub use memory::{explicit_memory_gap, MEMORY_DIM_CAP};
pub use program::{apply_matrix, ideal_trajectory, trace_distance, GateProgram, JointState};
pub use run::{default_dt, refine_dt, run_program, single_step_errors, GateRunReport, RunOptions, DEFAULT_REFINE_TOL};
pub use sweep::{fit_line, scaling_sweep, sweep_point, ProgramTemplate, ScalingResult, ScalingRow};
