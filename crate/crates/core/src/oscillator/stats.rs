use serde::{Deserialize, Serialize};

use super::dissipator::Dissipator;
use super::quad::{cumulative_trapezoid, trapezoid};
use super::trace::{propagate_from, CycleTrace, GridSpec};
use crate::clockcore::ClockModel;
use crate::error::{Error, Result};
use crate::gatesim::{JointHamiltonian, Method};
use crate::scalar::{Real, C};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleStats<T: Real> {
    /// 1 - ∫_{T0-t1}^{T0} P dt, clipped to [0, 1].
    pub eps_r: T,
    /// ∫_{T0-t1}^{T0} P dt as integrated, unclipped.
    pub window_mass: T,
    /// First moment ∫ t P dt, seconds.
    pub m1: T,
    /// ⟨E^re⟩ = ∫ tr[H' D^re(ρ((s|τ)))] ds.
    pub e_re: T,
    /// ⟨E^diss⟩ = ∫ dt P(t) ∫_0^t ds 2Re⟨H'ψ|V_C ψ⟩.
    pub e_nore: T,
    pub p_in: T,
    pub p_diss: T,
    /// tr[H' ρ(τ|τ)].
    pub e_init: T,
    /// |⟨E^re⟩ - tr[H' ρ(τ|τ)]| / tr[H' ρ(τ|τ)].
    pub identity_gap: T,
    pub total_mass: T,
    pub tail_mass: T,
    pub points_per_t0: usize,
}

pub fn renewal_statistics<T: Real>(trace: &CycleTrace<T>, model: &ClockModel<T>) -> Result<CycleStats<T>> {
    let m = trace.steps_per_t1;
    let ng = model.ng;
    let hi = ng * m;
    if trace.time_grid.len() <= hi {
        return Err(Error::param("trace", "grid must extend past T0"));
    }
    let lo = (ng - 1) * m;
    let x = &trace.time_grid;
    let p = &trace.renewal_density;
    let window = trapezoid(&x[lo..=hi], &p[lo..=hi]);
    let tp: Vec<T> = x.iter().zip(p).map(|(t, q)| *t * *q).collect();
    let m1 = trapezoid(x, &tp);
    let e_re = trapezoid(x, &trace.renewal_energy_rate);
    let inner = cumulative_trapezoid(x, &trace.dissipation_rate);
    let pf: Vec<T> = p.iter().zip(&inner).map(|(a, b)| *a * *b).collect();
    let e_nore = trapezoid(x, &pf);
    let e_init = trace.initial_energy;
    let identity_gap = if e_init > T::zero() {
        (e_re - e_init).abs() / e_init
    } else {
        T::zero()
    };
    Ok(CycleStats {
        eps_r: (T::one() - window).max(T::zero()).min(T::one()),
        window_mass: window,
        m1,
        e_re,
        e_nore,
        p_in: e_re / model.t0,
        p_diss: e_nore / model.t0,
        e_init,
        identity_gap,
        total_mass: trapezoid(x, p),
        tail_mass: trace.tail_mass,
        points_per_t0: ng * m,
    })
}

fn rel_shift<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// Double the grid density until ε_r, M1 and ⟨E^re⟩ move by less than `tol`
/// (relative), at most `max_doublings` times. ε_r is compared in absolute
/// terms scaled by 1 because it may sit near zero.
pub fn refine_cycle<T: Real>(
    model: &ClockModel<T>,
    ham: &JointHamiltonian<T>,
    logical: &[C<T>],
    dissipator: &Dissipator<T>,
    grid: &GridSpec<T>,
    method: Method,
    tol: T,
    max_doublings: usize,
) -> Result<(CycleTrace<T>, CycleStats<T>)> {
    let mut g = grid.clone();
    let mut tr = propagate_from(model, ham, logical, dissipator, &g, method)?;
    let mut st = renewal_statistics(&tr, model)?;
    for _ in 0..max_doublings {
        g.points_per_t0 *= 2;
        let tr2 = propagate_from(model, ham, logical, dissipator, &g, method)?;
        let st2 = renewal_statistics(&tr2, model)?;
        let shift = (st.eps_r - st2.eps_r)
            .abs()
            .max(rel_shift(st.m1, st2.m1))
            .max(rel_shift(st.e_re, st2.e_re));
        tr = tr2;
        st = st2;
        if shift < tol {
            break;
        }
    }
    Ok((tr, st))
}
