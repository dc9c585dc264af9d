use serde::Serialize;

use super::model::ClockModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Diagonal of I_C^(l) in θ-basis order, units 1/seconds.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialDiag<T: Real> {
    pub values: Vec<T>,
    pub l_index: usize,
    pub x0: T,
}

/// Relative size of the discarded image terms we accept.
const IMAGE_TAIL: f64 = 1e-14;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ln |sinc(u)| with sinc(u) = sin(πu)/(πu).
#[inline]
pub fn ln_abs_sinc<T: Real>(u: T) -> T {
    if u == T::zero() {
        return T::zero();
    }
    let pu = T::pi() * u;
    (pu.sin() / pu).abs().ln()
}

/// V_B(u) = sinc^{2N}(u), evaluated through its logarithm.
#[inline]
pub fn sinc_pow<T: Real>(u: T, n_exp: u32) -> T {
    (T::of(2.0 * n_exp as f64) * ln_abs_sinc(u)).exp()
}

/// ∫_R sinc^{2N}(y) dy by composite Gauss-Legendre between the zeros of sinc.
///
/// The tail beyond Y is below π^{-2N} Y^{1-2N}/(2N-1); Y is chosen so that it
/// falls under 1e-16 of the integral.
pub fn sinc_power_integral<T: Real>(n_exp: u32) -> T {
    if n_exp == 1 {
        return T::one();
    }
    let n = n_exp as f64;
    let (gx, gw) = gauss_legendre(16);
    let est = (3.0 / (std::f64::consts::PI * n)).sqrt();
    // smallest integer Y with the tail bound below 1e-16 * est
    let log_y = ((1e-16 * est * (2.0 * n - 1.0)).ln() + 2.0 * n * std::f64::consts::PI.ln())
        / (1.0 - 2.0 * n);
    let y_max = log_y.exp().ceil().clamp(2.0, 1e6) as usize;
    let sub0 = (8.0 * n.sqrt()).ceil().max(16.0) as usize;

    let mut acc = T::zero();
    let mut panel = |a: f64, b: f64| {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = T::zero();
        for (xi, wi) in gx.iter().zip(&gw) {
            s += T::of(*wi) * sinc_pow(T::of(c + h * xi), n_exp);
        }
        acc += s * T::of(h);
    };
    for i in 0..sub0 {
        let a = i as f64 / sub0 as f64;
        panel(a, a + 1.0 / sub0 as f64);
    }
    for j in 1..y_max {
        panel(j as f64, j as f64 + 1.0);
    }
    acc * T::of(2.0)
}

/// Smallest P >= 3 with the discarded image mass below 1e-14 of the peak.
///
/// For a wrapped offset |y| <= π the images |p| > P sit at |y + 2πp| >= π(2P+1),
/// so the tail is bounded by 2 (π² n (2P+1))^{-2N} (1 + (2P+1)/(2(2N-1))).
pub fn image_terms<T: Real>(n_pot: T, n_exp: u32) -> usize {
    let n = n_pot.to_f64_lossy();
    let two_n = 2.0 * n_exp as f64;
    let pi2 = std::f64::consts::PI.powi(2);
    let mut p = 3usize;
    loop {
        let q = (2 * p + 1) as f64;
        let ln_tail =
            (2.0f64).ln() - two_n * (pi2 * n * q).ln() + (1.0 + q / (2.0 * (two_n - 1.0))).ln();
        if ln_tail < IMAGE_TAIL.ln() || p >= 4096 {
            return p;
        }
        p += 1;
    }
}

fn wrap_pi<T: Real>(y: T) -> T {
    let tp = T::two_pi();
    y - tp * ((y + T::pi()) / tp).floor()
}

/// V̄_0(x) for a window centred at x0 (periodic, unit integral over a period).
pub fn vbar<T: Real>(model: &ClockModel<T>, x: T, x0: T) -> T {
    vbar_images(model, wrap_pi(x - x0), model.image_terms as i64)
}

fn vbar_images<T: Real>(model: &ClockModel<T>, y: T, p: i64) -> T {
    let n = model.n_pot;
    let mut s = T::zero();
    for k in -p..=p {
        s += sinc_pow(n * (y + T::two_pi() * T::of(k as f64)), model.n_exponent);
    }
    n * model.a0 * s
}

/// Window centre x_0^(l) = 2π(l - 1/2)/N_g, plus the bus offset.
pub fn window_center<T: Real>(model: &ClockModel<T>, l: usize, offset: T) -> T {
    T::two_pi() * (T::of_usize(l) - T::of(0.5)) / T::of_usize(model.ng) + offset
}

fn check_offset<T: Real>(offset: T) -> Result<()> {
    let tol = T::of(1e-12);
    if offset.abs() <= tol || (offset - T::pi()).abs() <= tol {
        Ok(())
    } else {
        Err(Error::param("offset", "must be 0 or pi"))
    }
}

/// I_C^(l) eigenvalues: (2π/d)(d/T0) V̄_0(2πk/d) with x0 = x_0^(l) + offset.
pub fn potential_profile<T: Real>(
    model: &ClockModel<T>,
    l: usize,
    offset: T,
) -> Result<PotentialDiag<T>> {
    potential_profile_anchored(model, l, offset, T::zero())
}

/// As `potential_profile`, but every site k is represented by its image in the
/// window S_d(k0) before evaluation. The result does not depend on k0.
pub fn potential_profile_anchored<T: Real>(
    model: &ClockModel<T>,
    l: usize,
    offset: T,
    k0: T,
) -> Result<PotentialDiag<T>> {
    if l < 1 || l > model.ng {
        return Err(Error::param("l", format!("must lie in 1..={}, got {l}", model.ng)));
    }
    check_offset(offset)?;
    let x0 = window_center(model, l, offset);
    let d = model.d;
    let df = T::of_usize(d);
    let scale = T::two_pi() / model.t0;
    let p = model.image_terms as i64;
    let values = (0..d)
        .map(|k| {
            let kk = super::state::window_rep(T::of_usize(k), k0, df);
            let x = T::two_pi() * kk / df;
            let y = x - x0;
            let shift = ((y + T::pi()) / T::two_pi()).floor();
            let yw = y - T::two_pi() * shift;
            scale * vbar_images(model, yw, p)
        })
        .collect();
    Ok(PotentialDiag { values, l_index: l, x0 })
}

/// (2π/d) Σ_k V̄_0(2πk/d): the Riemann sum of the normalized potential.
pub fn riemann_sum<T: Real>(model: &ClockModel<T>, x0: T) -> T {
    let df = T::of_usize(model.d);
    let s = (0..model.d).fold(T::zero(), |acc, k| {
        acc + vbar(model, T::two_pi() * T::of_usize(k) / df, x0)
    });
    s * T::two_pi() / df
}
