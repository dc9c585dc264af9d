use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::model::ClockModel;
use crate::error::{Error, Result};
use crate::scalar::{cis, vnorm, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Energy,
    Theta,
}

/// Pure state of the clock alone.
#[derive(Clone, Debug)]
pub struct ClockState<T: Real> {
    pub amplitudes: Vec<C<T>>,
    pub basis: Basis,
    /// Normalization constant A_nor (1 for states not built from the Gaussian).
    pub a_nor: T,
}

/// Representative of k modulo d inside S_d(k0): -d/2 < k - k0 <= d/2.
pub fn window_rep<T: Real>(k: T, k0: T, d: T) -> T {
    let u = k - k0;
    let m = ((u - d / T::of(2.0)) / d).ceil();
    k - m * d
}

/// Unitary DFT between the energy and θ bases.
///
/// |θ_k> = d^{-1/2} Σ_n e^{-2πi nk/d} |E_n>, so energy amplitudes are the
/// forward FFT of θ amplitudes scaled by d^{-1/2}.
#[derive(Clone)]
pub struct Dft<T: Real> {
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Real> Dft<T> {
    pub fn new(d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            fwd: planner.plan_fft_forward(d),
            inv: planner.plan_fft_inverse(d),
            scale: T::one() / T::of_usize(d).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// θ amplitudes -> energy amplitudes, in place; `buf.len()` may be a multiple of d.
    pub fn to_energy(&self, buf: &mut [C<T>]) {
        self.fwd.process(buf);
        for z in buf.iter_mut() {
            *z = z.scale(self.scale);
        }
    }

    pub fn to_theta(&self, buf: &mut [C<T>]) {
        self.inv.process(buf);
        for z in buf.iter_mut() {
            *z = z.scale(self.scale);
        }
    }
}

/// ψ_nor(k0; k) over the window S_d(k0), normalized numerically, θ basis.
pub fn clock_state<T: Real>(model: &ClockModel<T>, k0: T) -> ClockState<T> {
    let d = model.d;
    let df = T::of_usize(d);
    let mut amps: Vec<C<T>> = (0..d)
        .map(|k| {
            let u = window_rep(T::of_usize(k), k0, df) - k0;
            let g = (-T::pi() * u * u / (model.sigma * model.sigma)).exp();
            cis(T::two_pi() * model.n0 * u / df).scale(g)
        })
        .collect();
    let norm = vnorm(&amps);
    let a_nor = T::one() / norm;
    for z in amps.iter_mut() {
        *z = z.scale(a_nor);
    }
    ClockState { amplitudes: amps, basis: Basis::Theta, a_nor }
}

/// Energy eigenstate |E_n>.
pub fn energy_eigenstate<T: Real>(d: usize, n: usize) -> ClockState<T> {
    let mut amps = vec![C::new(T::zero(), T::zero()); d];
    amps[n] = C::new(T::one(), T::zero());
    ClockState { amplitudes: amps, basis: Basis::Energy, a_nor: T::one() }
}

pub fn basis_change<T: Real>(state: &ClockState<T>, target: Basis) -> ClockState<T> {
    if state.basis == target {
        return state.clone();
    }
    let dft = Dft::new(state.amplitudes.len());
    basis_change_with(&dft, state, target)
}

pub fn basis_change_with<T: Real>(
    dft: &Dft<T>,
    state: &ClockState<T>,
    target: Basis,
) -> ClockState<T> {
    let mut out = state.clone();
    if state.basis != target {
        match target {
            Basis::Energy => dft.to_energy(&mut out.amplitudes),
            Basis::Theta => dft.to_theta(&mut out.amplitudes),
        }
        out.basis = target;
    }
    out
}

/// e^{-i n ω0 t} on energy amplitudes; phases are reduced modulo 2π exactly
/// in units of t/T0 so that t = T0 returns the input.
pub fn energy_phases<T: Real>(d: usize, t_over_t0: T) -> Vec<C<T>> {
    let frac = t_over_t0 - t_over_t0.floor();
    (0..d)
        .map(|n| {
            let a = T::of_usize(n) * frac;
            let a = a - a.floor();
            cis(-T::two_pi() * a)
        })
        .collect()
}

pub fn free_evolve<T: Real>(model: &ClockModel<T>, state: &ClockState<T>, t: T) -> ClockState<T> {
    let dft = Dft::new(model.d);
    let orig = state.basis;
    let mut e = basis_change_with(&dft, state, Basis::Energy);
    for (z, p) in e.amplitudes.iter_mut().zip(energy_phases(model.d, t / model.t0)) {
        *z *= p;
    }
    basis_change_with(&dft, &e, orig)
}

/// <H_C> on a clock state, units 1/seconds.
pub fn mean_energy<T: Real>(model: &ClockModel<T>, state: &ClockState<T>) -> Result<T> {
    let e = basis_change(state, Basis::Energy);
    let v = e
        .amplitudes
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (n, z)| acc + z.norm_sqr() * T::of_usize(n))
        * model.omega0;
    check_nonnegative_energy(v)
}

pub(crate) fn check_nonnegative_energy<T: Real>(v: T) -> Result<T> {
    if v < T::of(-1e-10) {
        return Err(Error::NumericalFault(format!(
            "negative expectation {v:?} of a positive semidefinite Hamiltonian"
        )));
    }
    Ok(v)
}
