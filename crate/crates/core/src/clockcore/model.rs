use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::potential::{image_terms, sinc_power_integral};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Classical,
    Quantum,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(Regime::Classical),
            "quantum" => Ok(Regime::Quantum),
            other => Err(Error::param("regime", format!("unknown regime `{other}`"))),
        }
    }
}

/// Optional departures from the default parameter schedule.
///
/// Every field left as `None` follows the schedule. The effective values are
/// echoed in `ClockModel` so reports always carry them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// ñ_0, mean energy as a fraction of the top level.
    pub n_tilde0: Option<f64>,
    /// Prefactor of the potential sharpness n.
    pub c_n: Option<f64>,
    /// Sinc exponent N (V_B = sinc^{2N}).
    pub n_exponent: Option<u32>,
    /// Multiplies the scheduled Gaussian width.
    pub sigma_scale: Option<f64>,
    /// Replaces the Gaussian width outright.
    pub sigma: Option<f64>,
    /// Multiplies d^{1-ε_g} before flooring to get N_g.
    pub ng_scale: Option<f64>,
    /// Replaces N_g outright.
    pub ng: Option<usize>,
    /// Classical regime only: use σ = d^{η/2} instead of √d.
    pub classical_eta_sigma: Option<bool>,
}

impl Overrides {
    pub const KEYS: [&'static str; 8] = [
        "n_tilde0",
        "c_n",
        "n_exponent",
        "sigma_scale",
        "sigma",
        "ng_scale",
        "ng",
        "classical_eta_sigma",
    ];

    /// Build from a flat key/value map, rejecting unknown keys.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut o = Overrides::default();
        for (k, &v) in map {
            match k.as_str() {
                "n_tilde0" => o.n_tilde0 = Some(v),
                "c_n" => o.c_n = Some(v),
                "n_exponent" => o.n_exponent = Some(as_count(k, v)? as u32),
                "sigma_scale" => o.sigma_scale = Some(v),
                "sigma" => o.sigma = Some(v),
                "ng_scale" => o.ng_scale = Some(v),
                "ng" => o.ng = Some(as_count(k, v)?),
                "classical_eta_sigma" => o.classical_eta_sigma = Some(v != 0.0),
                _ => return Err(Error::param(k, "unknown override key")),
            }
        }
        Ok(o)
    }

    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

fn as_count(key: &str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(Error::param(key, "must be a positive integer"));
    }
    Ok(v as usize)
}

/// All derived clock and schedule parameters.
#[derive(Clone, Debug, Serialize)]
pub struct ClockModel<T: Real> {
    pub d: usize,
    pub t0: T,
    pub regime: Regime,
    pub eps_bar: T,
    pub sigma: T,
    pub n0: T,
    pub n_tilde0: T,
    pub eta: T,
    pub eps5: T,
    pub eps6: T,
    pub eps7: T,
    pub eps9: T,
    pub eps_g: T,
    /// Potential sharpness n.
    pub n_pot: T,
    /// Sinc exponent N.
    pub n_exponent: u32,
    /// Value of N the schedule asked for (before any override).
    pub n_exponent_schedule: u32,
    pub ng: usize,
    pub omega0: T,
    pub c_n: T,
    /// 1 / ∫ sinc^{2N}.
    pub a0: T,
    /// Image sum runs over |p| <= image_terms.
    pub image_terms: usize,
    pub overrides: Overrides,
}

pub fn eta_quantum<T: Real>(eps_bar: T) -> T {
    let two = T::of(2.0);
    two * eps_bar / (two * eps_bar + two * eps_bar.sqrt() + T::one())
}

pub fn eta_classical<T: Real>(eps_bar: T) -> T {
    let h = T::of(0.5) + eps_bar;
    h / (h + eps_bar.sqrt())
}

fn floor_count<T: Real>(x: T) -> usize {
    // guard against d^a landing a hair below an integer
    let g = x * (T::one() + T::of(1e-12));
    g.floor().to_usize().unwrap_or(0)
}

/// Derive a clock model from (d, ε̄, regime, T0) with optional overrides.
pub fn make_model<T: Real>(
    d: usize,
    eps_bar: T,
    regime: Regime,
    t0: T,
    overrides: &Overrides,
) -> Result<ClockModel<T>> {
    if d < 8 {
        return Err(Error::param("d", format!("need d >= 8, got {d}")));
    }
    if !(eps_bar > T::zero() && eps_bar < T::of(1.0 / 6.0)) {
        return Err(Error::param("eps_bar", format!("must lie in (0, 1/6), got {eps_bar:?}")));
    }
    if !(t0 > T::zero()) {
        return Err(Error::param("T0_seconds", "must be positive"));
    }
    let df = T::of_usize(d);
    let ln_d = df.ln();

    let eta = match regime {
        Regime::Quantum => eta_quantum(eps_bar),
        Regime::Classical => eta_classical(eps_bar),
    };
    let eps5 = eta * eps_bar;
    let eps7 = T::of(2.0) * eta * eps_bar;
    let eps9 = eta / T::of(2.0);
    let eps_g = match regime {
        Regime::Quantum => eps_bar,
        Regime::Classical => T::of(0.5) + eps_bar,
    };

    let eta_sigma = df.powf(eta / T::of(2.0));
    let base_sigma = match regime {
        Regime::Quantum => eta_sigma,
        Regime::Classical if overrides.classical_eta_sigma == Some(true) => eta_sigma,
        Regime::Classical => df.sqrt(),
    };
    let sigma = match (overrides.sigma, overrides.sigma_scale) {
        (Some(s), _) => T::of(s),
        (None, Some(c)) => base_sigma * T::of(c),
        (None, None) => base_sigma,
    };
    if !(sigma > T::zero()) {
        return Err(Error::param("sigma", "must be positive"));
    }
    let eps6 = sigma.ln() / ln_d;

    let n_tilde0 = T::of(overrides.n_tilde0.unwrap_or(1.0 / (2.0 * std::f64::consts::PI)));
    if !(n_tilde0 > T::zero() && n_tilde0 < T::one()) {
        return Err(Error::param("n_tilde0", "must lie in (0, 1)"));
    }
    let n0 = n_tilde0 * (df - T::one());

    let chain = T::of(3.0) - T::of(4.0) * eps5 - eps9;
    if !(eps5 < eps6) {
        return Err(Error::param("sigma", format!("violates eps5 < eps6 (eps6 = {eps6:?})")));
    }
    if !(eps6 < T::one()) {
        return Err(Error::param("sigma", format!("violates eps6 < 1 (eps6 = {eps6:?})")));
    }
    if !(eps5 < eps7 && chain > T::zero()) {
        return Err(Error::param("eps_bar", "violates the epsilon constraint chain"));
    }
    let n_sched_t = (chain / (T::of(2.0) * (eps7 - eps5))).ceil();
    let n_exponent_schedule = n_sched_t.to_u32().unwrap_or(u32::MAX);
    let n_exponent = match overrides.n_exponent {
        Some(n) if n < 2 || n > n_exponent_schedule => {
            return Err(Error::param(
                "n_exponent",
                format!("must lie in [2, {n_exponent_schedule}], got {n}"),
            ))
        }
        Some(n) => n,
        None => n_exponent_schedule,
    };

    let c_n = T::of(overrides.c_n.unwrap_or(1.0));
    if !(c_n > T::zero()) {
        return Err(Error::param("c_n", "must be positive"));
    }
    let two = T::of(2.0);
    let alpha0 = T::one() - (T::one() - n0 * two / (df - T::one())).abs();
    let log_term = (T::pi() * alpha0 * sigma * sigma).ln();
    if !(log_term > T::zero()) {
        return Err(Error::param("sigma", "ln(pi alpha0 sigma^2) must be positive"));
    }
    let n_pot = c_n * log_term * df.powf(T::one() - eps5) / sigma;

    let ng = match overrides.ng {
        Some(g) => g,
        None => {
            let scale = T::of(overrides.ng_scale.unwrap_or(1.0));
            floor_count(scale * df.powf(T::one() - eps_g))
        }
    };
    if ng < 1 {
        return Err(Error::param("ng", "schedule gives N_g < 1"));
    }
    if ng > d {
        return Err(Error::param("ng", "N_g cannot exceed d"));
    }

    let a0 = T::one() / sinc_power_integral::<T>(n_exponent);
    let image_terms = image_terms(n_pot, n_exponent);
    Ok(ClockModel {
        d,
        t0,
        regime,
        eps_bar,
        sigma,
        n0,
        n_tilde0,
        eta,
        eps5,
        eps6,
        eps7,
        eps9,
        eps_g,
        n_pot,
        n_exponent,
        n_exponent_schedule,
        ng,
        omega0: T::two_pi() / t0,
        c_n,
        a0,
        image_terms,
        overrides: overrides.clone(),
    })
}

/// Parameters given explicitly, bypassing the schedule.
#[derive(Clone, Debug)]
pub struct CustomParams<T> {
    pub d: usize,
    pub t0: T,
    pub sigma: T,
    pub n0: T,
    pub n_pot: T,
    pub n_exponent: u32,
    pub ng: usize,
}

impl<T: Real> ClockModel<T> {
    /// Model with hand-picked widths; used for micro-instances and oracles.
    pub fn custom(p: CustomParams<T>) -> Result<Self> {
        if p.d < 2 {
            return Err(Error::param("d", "need d >= 2"));
        }
        if !(p.t0 > T::zero() && p.sigma > T::zero() && p.n_pot > T::zero()) {
            return Err(Error::param("custom", "T0, sigma and n must be positive"));
        }
        if p.n_exponent < 1 || p.ng < 1 || p.ng > p.d {
            return Err(Error::param("custom", "need N >= 1 and 1 <= N_g <= d"));
        }
        let df = T::of_usize(p.d);
        let n_tilde0 = p.n0 / (df - T::one());
        Ok(ClockModel {
            d: p.d,
            t0: p.t0,
            regime: Regime::Quantum,
            eps_bar: T::zero(),
            sigma: p.sigma,
            n0: p.n0,
            n_tilde0,
            eta: T::zero(),
            eps5: T::zero(),
            eps6: p.sigma.ln() / df.ln(),
            eps7: T::zero(),
            eps9: T::zero(),
            eps_g: T::zero(),
            n_pot: p.n_pot,
            n_exponent: p.n_exponent,
            n_exponent_schedule: p.n_exponent,
            ng: p.ng,
            omega0: T::two_pi() / p.t0,
            c_n: T::zero(),
            a0: T::one() / sinc_power_integral::<T>(p.n_exponent),
            image_terms: image_terms(p.n_pot, p.n_exponent),
            overrides: Overrides::default(),
        })
    }

    /// t_1 = T0 / N_g.
    pub fn t1(&self) -> T {
        self.t0 / T::of_usize(self.ng)
    }

    /// Same model with the cycle time replaced; every rate rescales with it.
    pub fn with_t0(&self, t0: T) -> Self {
        let mut m = self.clone();
        m.t0 = t0;
        m.omega0 = T::two_pi() / t0;
        m
    }
}
