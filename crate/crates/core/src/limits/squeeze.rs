use nalgebra::DMatrix;
use serde::Serialize;

use crate::clockcore::{basis_change, window_rep, Basis, ClockModel, ClockState, Dft};
use crate::error::{Error, Result};
use crate::scalar::{vdot, Real, C};

/// |σ_t - σ_H| / max(σ_t, σ_H) allowed for a semi-classical verdict.
pub const EQUAL_UNCERTAINTY_TOL: f64 = 0.05;
/// tol(d) = RESIDUAL_TOL_PREFACTOR / σ, σ the state's fitted Gaussian width.
pub const RESIDUAL_TOL_PREFACTOR: f64 = 10.0;
/// tr ρ² below 1 - PURITY_TOL counts as mixed.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Semiclassical,
    Squeezed,
    Unclassified,
}

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeReport<T: Real> {
    /// Std of t̄ = t_C/T0 (2π per θ-site).
    pub sigma_t: T,
    /// Std of H̄ = H_C T0 (2π per level).
    pub sigma_h: T,
    /// ‖L_C ψ - ⟨L_C⟩ψ‖ with L_C = t̄ + iH̄.
    pub residual: T,
    /// σ_A²σ_B² - ¼(⟨C⟩² + 4σ_AB²), A = t̄, B = H̄, C = -i[A, B].
    pub rs_gap: T,
    pub verdict: Verdict,
    /// Residual tolerance used.
    pub tol: T,
    pub equal_uncertainty_gap: T,
    /// Mean θ-index the time operator was windowed around.
    pub center: T,
    /// σ_H (or σ_t) vanishes, e.g. an energy eigenstate.
    pub degenerate: bool,
    pub mixed: bool,
}

struct Ops<T: Real> {
    t_bar: Vec<T>,
    dft: Dft<T>,
}

impl<T: Real> Ops<T> {
    fn h_bar(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let mut e = psi.to_vec();
        self.dft.to_energy(&mut e);
        for (n, z) in e.iter_mut().enumerate() {
            *z = z.scale(T::two_pi() * T::of_usize(n));
        }
        self.dft.to_theta(&mut e);
        e
    }

    fn t_bar(&self, psi: &[C<T>]) -> Vec<C<T>> {
        psi.iter().zip(&self.t_bar).map(|(z, t)| z.scale(*t)).collect()
    }
}

/// Circular mean of the θ distribution, as a θ-index in [0, d).
fn theta_center<T: Real>(probs: &[T]) -> T {
    let d = T::of_usize(probs.len());
    let (mut c, mut s) = (T::zero(), T::zero());
    for (k, &p) in probs.iter().enumerate() {
        let a = T::two_pi() * T::of_usize(k) / d;
        c += p * a.cos();
        s += p * a.sin();
    }
    let mut ang = s.atan2(c);
    if ang < T::zero() {
        ang += T::two_pi();
    }
    let c = ang * d / T::two_pi();
    if c >= d { c - d } else { c }
}

/// ‖a‖²‖b‖² - |⟨a|b⟩|² as ½Σ_ij |a_i b_j - a_j b_i|², which cannot go negative.
fn lagrange_gap<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    let mut acc = T::zero();
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            acc += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    acc
}

#[derive(Default)]
struct Moments<T> {
    a: T,
    b: T,
    aa: T,
    bb: T,
    ab_re: T,
    ab_im: T,
    ll: T,
}

/// Classify a pure clock state.
pub fn squeezing_report<T: Real>(model: &ClockModel<T>, state: &ClockState<T>) -> Result<SqueezeReport<T>> {
    let theta = basis_change(state, Basis::Theta);
    squeezing_report_ensemble(model, &[(T::one(), theta.amplitudes)])
}

/// Classify a density matrix given in the θ basis; mixed input is unclassified.
pub fn squeezing_report_mixed<T: Real>(model: &ClockModel<T>, rho: &DMatrix<C<T>>) -> Result<SqueezeReport<T>> {
    if rho.nrows() != model.d || rho.ncols() != model.d {
        return Err(Error::DimensionMismatch { expected: model.d, got: rho.nrows() });
    }
    let e = rho.clone().symmetric_eigen();
    let ens: Vec<(T, Vec<C<T>>)> = (0..model.d)
        .filter(|&i| e.eigenvalues[i] > T::of(1e-14))
        .map(|i| (e.eigenvalues[i], e.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    squeezing_report_ensemble(model, &ens)
}

/// Classify the ensemble Σ p_i |v_i⟩⟨v_i| (θ-basis vectors).
pub fn squeezing_report_ensemble<T: Real>(
    model: &ClockModel<T>,
    ensemble: &[(T, Vec<C<T>>)],
) -> Result<SqueezeReport<T>> {
    let d = model.d;
    if ensemble.is_empty() {
        return Err(Error::param("state", "empty ensemble"));
    }
    if let Some((_, v)) = ensemble.iter().find(|(_, v)| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: v.len() });
    }
    let total = ensemble.iter().fold(T::zero(), |a, (p, v)| a + *p * vdot(v, v).re);
    if !(total > T::zero()) {
        return Err(Error::Degenerate("zero-norm state".into()));
    }
    let purity = ensemble.iter().fold(T::zero(), |a, (p, v)| {
        let n = vdot(v, v).re;
        a + (*p * n / total) * (*p * n / total)
    });
    let mixed = purity < T::one() - T::of(PURITY_TOL);

    let mut probs = vec![T::zero(); d];
    for (p, v) in ensemble {
        for (k, z) in v.iter().enumerate() {
            probs[k] += *p * z.norm_sqr() / total;
        }
    }
    let center = theta_center(&probs);
    let df = T::of_usize(d);
    let ops = Ops {
        t_bar: (0..d).map(|k| T::two_pi() * window_rep(T::of_usize(k), center, df)).collect(),
        dft: Dft::new(d),
    };

    let mut m = Moments::<T>::default();
    let mut l_mean = C::new(T::zero(), T::zero());
    for (p, v) in ensemble {
        let w = *p / total;
        let av = ops.t_bar(v);
        let bv = ops.h_bar(v);
        m.a += w * vdot(v, &av).re;
        m.b += w * vdot(v, &bv).re;
        m.aa += w * vdot(&av, &av).re;
        m.bb += w * vdot(&bv, &bv).re;
        let ab = vdot(&av, &bv);
        m.ab_re += w * ab.re;
        m.ab_im += w * ab.im;
        let lv: Vec<C<T>> = av.iter().zip(&bv).map(|(a, b)| *a + C::new(-b.im, b.re)).collect();
        m.ll += w * vdot(&lv, &lv).re;
        l_mean += vdot(v, &lv).scale(w);
    }
    let var_a = (m.aa - m.a * m.a).max(T::zero());
    let var_b = (m.bb - m.b * m.b).max(T::zero());
    let sigma_t = var_a.sqrt();
    let sigma_h = var_b.sqrt();
    let residual = (m.ll - l_mean.norm_sqr()).max(T::zero()).sqrt();
    // ⟨C⟩ = 2 Im⟨Aψ|Bψ⟩, σ_AB = Re⟨Aψ|Bψ⟩ - ⟨A⟩⟨B⟩
    let c_mean = T::of(2.0) * m.ab_im;
    let cov = m.ab_re - m.a * m.b;
    let rs_gap = if let ([(_, v)], false) = (ensemble, mixed) {
        // centred vectors: σ_AB and ⟨C⟩/2 are the parts of ⟨a|b⟩
        let n = vdot(v, v).re.sqrt();
        let a: Vec<C<T>> = ops.t_bar(v).iter().zip(v).map(|(x, y)| (*x - y.scale(m.a)).unscale(n)).collect();
        let b: Vec<C<T>> = ops.h_bar(v).iter().zip(v).map(|(x, y)| (*x - y.scale(m.b)).unscale(n)).collect();
        lagrange_gap(&a, &b)
    } else {
        var_a * var_b - (c_mean * c_mean + T::of(4.0) * cov * cov) / T::of(4.0)
    };

    let big = sigma_t.max(sigma_h);
    let degenerate = sigma_t.min(sigma_h) <= T::of(1e-6) * big.max(T::one());
    let equal_gap = if big > T::zero() { (sigma_t - sigma_h).abs() / big } else { T::zero() };
    // matched-width estimate: |ψ|² ∝ e^{-2πu²/σ²} gives σ_t = √π σ
    let sigma_fit = sigma_t / T::pi().sqrt();
    let tol = if sigma_fit > T::zero() {
        T::of(RESIDUAL_TOL_PREFACTOR) / sigma_fit
    } else {
        T::zero()
    };
    let verdict = if mixed {
        Verdict::Unclassified
    } else if !degenerate && residual <= tol && equal_gap <= T::of(EQUAL_UNCERTAINTY_TOL) {
        Verdict::Semiclassical
    } else {
        Verdict::Squeezed
    };
    Ok(SqueezeReport {
        sigma_t,
        sigma_h,
        residual,
        rs_gap,
        verdict,
        tol,
        equal_uncertainty_gap: equal_gap,
        center,
        degenerate,
        mixed,
    })
}
