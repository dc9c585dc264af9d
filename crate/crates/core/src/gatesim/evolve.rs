use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{assemble_hamiltonian, JointHamiltonian};
use super::program::{GateProgram, JointState};
use crate::clockcore::{energy_phases, ClockModel};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Splitstep,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "splitstep" => Ok(Method::Splitstep),
            other => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Largest d_L·d handled by full eigendecomposition.
pub const EXACT_DIM_CAP: usize = 4096;
/// Largest dimension for the dense non-Hermitian exponential.
pub const EXPM_DIM_CAP: usize = 1024;

fn cap_check(what: &str, dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::CapabilityExceeded { what: what.to_string(), dim, cap });
    }
    Ok(())
}

/// e^{-iHt} through the full spectral decomposition of the Hermitian part.
pub struct ExactPropagator<T: Real> {
    q: DMatrix<C<T>>,
    w: Vec<T>,
}

impl<T: Real> ExactPropagator<T> {
    pub fn new(h: &JointHamiltonian<T>) -> Result<Self> {
        cap_check("exact backend", h.dim(), EXACT_DIM_CAP)?;
        if h.decay.is_some() {
            return Err(Error::param("method", "exact Hermitian backend given a decay term"));
        }
        let eig = h.dense().symmetric_eigen();
        Ok(ExactPropagator { q: eig.eigenvectors, w: eig.eigenvalues.iter().copied().collect() })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.w
    }

    pub fn apply(&self, psi: &[C<T>], t: T) -> Vec<C<T>> {
        let n = psi.len();
        let x = nalgebra::DVector::from_column_slice(psi);
        let mut c = self.q.adjoint() * x;
        for i in 0..n {
            c[i] *= cis(-self.w[i] * t);
        }
        (&self.q * c).as_slice().to_vec()
    }
}

/// Exact step e^{-ihG} of the non-Hermitian generator via the dense matrix exponential.
pub struct ExpmStepper<T: Real> {
    step: DMatrix<C<T>>,
    pub h: T,
}

impl<T: Real> ExpmStepper<T> {
    pub fn new(ham: &JointHamiltonian<T>, h: T) -> Result<Self> {
        cap_check("dense exponential backend", ham.dim(), EXPM_DIM_CAP)?;
        let g = ham.dense_effective();
        let a = g.map(|z| C::new(z.im, -z.re).scale(h));
        Ok(ExpmStepper { step: a.exp(), h })
    }

    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let x = nalgebra::DVector::from_column_slice(psi);
        (&self.step * x).as_slice().to_vec()
    }
}

/// Precomputed pieces of one Strang step of size h.
pub struct StepKernel<T: Real> {
    pub h: T,
    half: Vec<C<T>>,
    full: Vec<C<T>>,
    /// e^{-ih B_k} (times e^{-h v_k} with decay) per θ-site; None where B_k = 0.
    site: Vec<Option<DMatrix<C<T>>>>,
    site_decay: Vec<T>,
}

/// Strang splitting: half-step H_C phases in the energy basis, full-step
/// θ-site blocks, half-step H_C. A decay term enters the site step as e^{-h v_k}.
pub struct SplitStep<T: Real> {
    ham: JointHamiltonian<T>,
    // spectral data of each site block
    blocks: Vec<Option<(DMatrix<C<T>>, Vec<T>)>>,
}

impl<T: Real> SplitStep<T> {
    pub fn new(ham: JointHamiltonian<T>) -> Self {
        let blocks = (0..ham.d)
            .map(|k| {
                let b = ham.site_block(k);
                if b.iter().all(|z| *z == C::new(T::zero(), T::zero())) {
                    None
                } else {
                    let e = b.symmetric_eigen();
                    Some((e.eigenvectors, e.eigenvalues.iter().copied().collect()))
                }
            })
            .collect();
        SplitStep { ham, blocks }
    }

    pub fn hamiltonian(&self) -> &JointHamiltonian<T> {
        &self.ham
    }

    pub fn kernel(&self, h: T) -> StepKernel<T> {
        let d = self.ham.d;
        let frac = h / self.ham.t0;
        let site = self
            .blocks
            .iter()
            .map(|b| {
                b.as_ref().map(|(q, w)| super::generator::spectral_exp(q, w, -h))
            })
            .collect();
        let site_decay = match &self.ham.decay {
            None => vec![T::one(); d],
            Some(v) => v.iter().map(|&x| (-h * x).exp()).collect(),
        };
        StepKernel {
            h,
            half: energy_phases(d, frac / T::of(2.0)),
            full: energy_phases(d, frac),
            site,
            site_decay,
        }
    }

    fn phase(&self, psi: &mut [C<T>], ph: &[C<T>]) {
        for row in psi.chunks_mut(self.ham.d) {
            self.ham.dft.to_energy(row);
            for (z, p) in row.iter_mut().zip(ph) {
                *z *= p;
            }
            self.ham.dft.to_theta(row);
        }
    }

    fn sites(&self, psi: &mut [C<T>], k: &StepKernel<T>) {
        let (d, dl) = (self.ham.d, self.ham.d_l);
        let mut tmp = vec![C::new(T::zero(), T::zero()); dl];
        for s in 0..d {
            let decay = k.site_decay[s];
            match &k.site[s] {
                None => {
                    if decay != T::one() {
                        for a in 0..dl {
                            psi[a * d + s] = psi[a * d + s].scale(decay);
                        }
                    }
                }
                Some(u) => {
                    for a in 0..dl {
                        tmp[a] = psi[a * d + s];
                    }
                    for a in 0..dl {
                        let mut acc = C::new(T::zero(), T::zero());
                        for b in 0..dl {
                            acc += u[(a, b)] * tmp[b];
                        }
                        psi[a * d + s] = acc.scale(decay);
                    }
                }
            }
        }
    }

    /// Apply `n` consecutive steps of the kernel.
    pub fn advance(&self, psi: &mut [C<T>], k: &StepKernel<T>, n: usize) {
        if n == 0 {
            return;
        }
        self.phase(psi, &k.half);
        for i in 0..n {
            self.sites(psi, k);
            if i + 1 < n {
                self.phase(psi, &k.full);
            }
        }
        self.phase(psi, &k.half);
    }
}

/// Number of steps of size <= dt covering t, and the adjusted step.
pub fn step_count<T: Real>(t: T, dt: T) -> (usize, T) {
    let n = (t / dt - T::of(1e-9)).ceil().max(T::one());
    let n = n.to_usize().unwrap_or(1);
    (n, t / T::of_usize(n))
}

/// Evolve a joint state for time t under the gate Hamiltonian of `program`.
pub fn evolve<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    state: &JointState<T>,
    t: T,
    method: Method,
    dt: T,
) -> Result<JointState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be positive"));
    }
    if state.d != model.d || state.d_l != program.d_l {
        return Err(Error::DimensionMismatch {
            expected: model.d * program.d_l,
            got: state.amplitudes.len(),
        });
    }
    if t == T::zero() {
        return Ok(state.clone());
    }
    let ham = assemble_hamiltonian(model, program)?;
    let amps = match method {
        Method::Exact => ExactPropagator::new(&ham)?.apply(&state.amplitudes, t),
        Method::Splitstep => {
            let ss = SplitStep::new(ham);
            let (n, h) = step_count(t.abs(), dt);
            let h = if t < T::zero() { -h } else { h };
            let k = ss.kernel(h);
            let mut psi = state.amplitudes.clone();
            ss.advance(&mut psi, &k, n);
            psi
        }
    };
    Ok(JointState { amplitudes: amps, d_l: state.d_l, d: state.d })
}
