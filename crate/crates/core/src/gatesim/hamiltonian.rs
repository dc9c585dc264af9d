use nalgebra::DMatrix;

use super::program::GateProgram;
use crate::clockcore::{check_nonnegative_energy, potential_profile, ClockModel, Dft};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real, C};

/// One term K ⊗ diag(potential) of the interaction.
#[derive(Clone, Debug)]
pub struct Coupling<T: Real> {
    pub drive: DMatrix<C<T>>,
    /// θ-basis eigenvalues of the clock factor, 1/seconds.
    pub potential: Vec<T>,
}

/// H_C ⊗ 1 + Σ_l K_l ⊗ I_C^(l), optionally with a θ-diagonal decay V so the
/// full generator reads G = H - iV.
#[derive(Clone)]
pub struct JointHamiltonian<T: Real> {
    pub d: usize,
    pub d_l: usize,
    pub t0: T,
    pub omega0: T,
    pub couplings: Vec<Coupling<T>>,
    pub decay: Option<Vec<T>>,
    pub(crate) dft: Dft<T>,
}

/// Gate Hamiltonian for `program`; gate l couples through window l.
pub fn assemble_hamiltonian<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
) -> Result<JointHamiltonian<T>> {
    if program.len() > model.ng {
        return Err(Error::DimensionMismatch { expected: model.ng, got: program.len() });
    }
    let mut couplings = Vec::with_capacity(program.len());
    for (i, g) in program.generators.iter().enumerate() {
        let p = potential_profile(model, i + 1, T::zero())?;
        couplings.push(Coupling { drive: g.drive.clone(), potential: p.values });
    }
    JointHamiltonian::new(model, program.d_l, couplings, None)
}

impl<T: Real> JointHamiltonian<T> {
    pub fn new(
        model: &ClockModel<T>,
        d_l: usize,
        couplings: Vec<Coupling<T>>,
        decay: Option<Vec<T>>,
    ) -> Result<Self> {
        let d = model.d;
        for c in &couplings {
            if c.drive.nrows() != d_l || c.drive.ncols() != d_l {
                return Err(Error::DimensionMismatch { expected: d_l, got: c.drive.nrows() });
            }
            if c.potential.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.potential.len() });
            }
        }
        if let Some(v) = &decay {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
        }
        Ok(JointHamiltonian {
            d,
            d_l,
            t0: model.t0,
            omega0: model.omega0,
            couplings,
            decay,
            dft: Dft::new(d),
        })
    }

    pub fn dim(&self) -> usize {
        self.d * self.d_l
    }

    pub fn with_decay(mut self, decay: Option<Vec<T>>) -> Result<Self> {
        if let Some(v) = &decay {
            if v.len() != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: v.len() });
            }
        }
        self.decay = decay;
        Ok(self)
    }

    /// Σ_l pot_l(k) K_l, the interaction block at θ-site k.
    pub fn site_block(&self, k: usize) -> DMatrix<C<T>> {
        let mut b = DMatrix::zeros(self.d_l, self.d_l);
        for c in &self.couplings {
            let v = c.potential[k];
            if v != T::zero() {
                b += c.drive.map(|z| z.scale(v));
            }
        }
        b
    }

    /// H_C ⊗ 1 applied to a logical-major θ-basis vector.
    pub fn apply_free(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let mut out = psi.to_vec();
        for row in out.chunks_mut(self.d) {
            self.dft.to_energy(row);
            for (n, z) in row.iter_mut().enumerate() {
                *z = z.scale(T::of_usize(n) * self.omega0);
            }
            self.dft.to_theta(row);
        }
        out
    }

    /// Hermitian part H applied to ψ.
    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let mut out = self.apply_free(psi);
        let d = self.d;
        for c in &self.couplings {
            for k in 0..d {
                let v = c.potential[k];
                if v == T::zero() {
                    continue;
                }
                for a in 0..self.d_l {
                    let mut acc = C::new(T::zero(), T::zero());
                    for b in 0..self.d_l {
                        acc += c.drive[(a, b)] * psi[b * d + k];
                    }
                    out[a * d + k] += acc.scale(v);
                }
            }
        }
        out
    }

    /// V ψ for the decay part (zero when absent).
    pub fn apply_decay(&self, psi: &[C<T>]) -> Vec<C<T>> {
        match &self.decay {
            None => vec![C::new(T::zero(), T::zero()); psi.len()],
            Some(v) => psi
                .iter()
                .enumerate()
                .map(|(i, z)| z.scale(v[i % self.d]))
                .collect(),
        }
    }

    /// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩ for the Hermitian part.
    pub fn expectation(&self, psi: &[C<T>]) -> Result<T> {
        let hp = self.apply(psi);
        let num = crate::scalar::vdot(psi, &hp).re;
        let den = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if den <= T::zero() {
            return Err(Error::Degenerate("zero state".into()));
        }
        check_nonnegative_energy(num / den)
    }

    /// H_C in the θ basis: (1/d) Σ_n n ω0 e^{2πi n(k-k')/d}.
    pub fn dense_free_clock(&self) -> DMatrix<C<T>> {
        let d = self.d;
        let df = T::of_usize(d);
        let col: Vec<C<T>> = (0..d)
            .map(|m| {
                let mut s = C::new(T::zero(), T::zero());
                for n in 0..d {
                    let ph = T::two_pi() * T::of_usize((n * m) % d) / df;
                    s += cis(ph).scale(T::of_usize(n));
                }
                s.scale(self.omega0 / df)
            })
            .collect();
        DMatrix::from_fn(d, d, |k, kp| col[(k + d - kp) % d])
    }

    /// Dense Hermitian part, logical-major ordering.
    pub fn dense(&self) -> DMatrix<C<T>> {
        let (d, dl) = (self.d, self.d_l);
        let hc = self.dense_free_clock();
        let mut h = DMatrix::zeros(d * dl, d * dl);
        for a in 0..dl {
            h.view_mut((a * d, a * d), (d, d)).copy_from(&hc);
        }
        for c in &self.couplings {
            for k in 0..d {
                let v = c.potential[k];
                for a in 0..dl {
                    for b in 0..dl {
                        h[(a * d + k, b * d + k)] += c.drive[(a, b)].scale(v);
                    }
                }
            }
        }
        h
    }

    /// Dense G = H - iV.
    pub fn dense_effective(&self) -> DMatrix<C<T>> {
        let mut g = self.dense();
        if let Some(v) = &self.decay {
            let n = self.dim();
            for i in 0..n {
                g[(i, i)] -= C::new(T::zero(), v[i % self.d]);
            }
        }
        g
    }
}
