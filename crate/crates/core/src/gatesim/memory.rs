//! Explicit-memory micro-backend.
//!
//! The memory register is normally held classically: the Hamiltonian is block
//! diagonal in the memory basis, so each memory string evolves on its own.
//! This module materializes the register to check that reduction on tiny
//! instances.

use nalgebra::DMatrix;

use super::evolve::ExactPropagator;
use super::generator::gate_generator;
use super::hamiltonian::{Coupling, JointHamiltonian};
use super::program::{trace_distance, GateProgram, JointState};
use crate::clockcore::{clock_state, potential_profile, ClockModel};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Largest |G|^{N_g}·d_L·d the micro-backend accepts.
pub const MEMORY_DIM_CAP: usize = 512;

fn digits(mut m: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(m % base);
        m /= base;
    }
    out
}

/// Trace distance at time t between the explicit-memory evolution of
/// Σ_m c_m |m⟩|0⟩_L|Ψ(0)⟩ and the superposition of reduced runs, one per
/// memory string m.
pub fn explicit_memory_gap<T: Real>(
    model: &ClockModel<T>,
    alphabet: &[(String, DMatrix<C<T>>)],
    memory_amplitudes: &[C<T>],
    t: T,
) -> Result<T> {
    let g = alphabet.len();
    let ng = model.ng;
    if g == 0 {
        return Err(Error::param("alphabet", "must not be empty"));
    }
    let d_l = alphabet[0].1.nrows();
    let n_mem = g.pow(ng as u32);
    let dim = n_mem * d_l * model.d;
    if dim > MEMORY_DIM_CAP {
        return Err(Error::CapabilityExceeded {
            what: "explicit memory backend".into(),
            dim,
            cap: MEMORY_DIM_CAP,
        });
    }
    if memory_amplitudes.len() != n_mem {
        return Err(Error::DimensionMismatch { expected: n_mem, got: memory_amplitudes.len() });
    }
    let gens = alphabet
        .iter()
        .map(|(s, u)| gate_generator(u, s))
        .collect::<Result<Vec<_>>>()?;

    // memory ⊗ logical treated as one enlarged register, memory-major
    let big = n_mem * d_l;
    let mut couplings = Vec::with_capacity(ng);
    for l in 1..=ng {
        let mut k = DMatrix::zeros(big, big);
        for m in 0..n_mem {
            let sym = digits(m, g, ng)[l - 1];
            k.view_mut((m * d_l, m * d_l), (d_l, d_l)).copy_from(&gens[sym].drive);
        }
        let p = potential_profile(model, l, T::zero())?;
        couplings.push(Coupling { drive: k, potential: p.values });
    }
    let ham = JointHamiltonian::new(model, big, couplings, None)?;

    let clock0 = clock_state(model, T::zero());
    let mut init = vec![C::new(T::zero(), T::zero()); big];
    for m in 0..n_mem {
        init[m * d_l] = memory_amplitudes[m];
    }
    let full0 = JointState::product(&init, &clock0);
    let full_t = ExactPropagator::new(&ham)?.apply(&full0.amplitudes, t);

    let mut reduced = vec![C::new(T::zero(), T::zero()); full_t.len()];
    let block = d_l * model.d;
    for m in 0..n_mem {
        let names: Vec<String> =
            digits(m, g, ng).iter().map(|&s| alphabet[s].0.clone()).collect();
        let unitaries: Vec<(String, DMatrix<C<T>>)> = digits(m, g, ng)
            .iter()
            .zip(&names)
            .map(|(&s, n)| (n.clone(), alphabet[s].1.clone()))
            .collect();
        let prog = GateProgram::from_unitaries(&unitaries, d_l)?;
        let h = super::hamiltonian::assemble_hamiltonian(model, &prog)?;
        let p0 = JointState::product(&prog.initial_logical, &clock0);
        let pt = ExactPropagator::new(&h)?.apply(&p0.amplitudes, t);
        for (i, z) in pt.iter().enumerate() {
            reduced[m * block + i] = *z * memory_amplitudes[m];
        }
    }
    trace_distance(&reduced, &full_t)
}
