use serde::Serialize;

use super::model::ClockModel;
use super::potential::potential_profile;
use crate::error::Result;
use crate::scalar::Real;

/// Interaction-strength norm diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport<T: Real> {
    /// T0 ‖I_C^(l)‖_F / √(2πd) for l = 1..N_g; equals the discrete ‖V̄_0‖_2.
    pub interaction_ratio: Vec<T>,
    /// T0 ‖H_C‖_F / √(2πd).
    pub free_ratio: T,
    /// free_ratio / d, to compare with √(2π/3).
    pub free_ratio_per_d: T,
    /// ‖a_d‖_F of the truncated creation operator, exact: √(d(d-1)/2).
    pub creation_frobenius: T,
    /// Reference value d/2 quoted for ‖a_d‖_F.
    pub creation_reference: T,
}

pub fn norm_diagnostics<T: Real>(model: &ClockModel<T>) -> Result<NormReport<T>> {
    let d = model.d;
    let df = T::of_usize(d);
    let denom = (T::two_pi() * df).sqrt();
    let mut interaction_ratio = Vec::with_capacity(model.ng);
    for l in 1..=model.ng {
        let p = potential_profile(model, l, T::zero())?;
        let fro = p.values.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
        interaction_ratio.push(model.t0 * fro / denom);
    }
    let sum_n2 = (0..d).fold(T::zero(), |a, n| {
        let nf = T::of_usize(n);
        a + nf * nf
    });
    let free_ratio = model.t0 * model.omega0 * sum_n2.sqrt() / denom;
    let creation_frobenius = (df * (df - T::one()) / T::of(2.0)).sqrt();
    Ok(NormReport {
        interaction_ratio,
        free_ratio,
        free_ratio_per_d: free_ratio / df,
        creation_frobenius,
        creation_reference: df / T::of(2.0),
    })
}
