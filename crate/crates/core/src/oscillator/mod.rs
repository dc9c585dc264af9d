//! Self-oscillating computer: a renewal channel resets the clock near the
//! end of each cycle, and gates run during the unitary part of the cycle.

mod cycles;
mod dissipator;
mod invariance;
pub(crate) mod quad;
mod stats;
mod trace;

pub use cycles::{run_cycles, ideal_cycle_targets, CycleMode, CycleRecord, MultiCycleReport};
pub use dissipator::{build_dissipator, oscillator_hamiltonian, renew, Dissipator};
pub use invariance::{t0_invariance_check, DimensionlessCycle, InvarianceReport};
pub use quad::{cumulative_trapezoid, trapezoid};
pub use stats::{refine_cycle, renewal_statistics, CycleStats};
pub use trace::{oscillator_dt, propagate_conditional, propagate_from, CycleTrace, GridSpec};
