use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::generator::{gate_generator, named_gate, GateGenerator};
use crate::clockcore::ClockState;
use crate::error::{Error, Result};
use crate::scalar::{vnorm, Real, C};

/// Ordered gate generators with the initial logical state.
#[derive(Clone, Debug, Serialize)]
pub struct GateProgram<T: Real> {
    pub generators: Vec<GateGenerator<T>>,
    pub d_l: usize,
    #[serde(skip)]
    pub initial_logical: Vec<C<T>>,
}

fn basis0<T: Real>(d_l: usize) -> Vec<C<T>> {
    let mut v = vec![C::new(T::zero(), T::zero()); d_l];
    v[0] = C::new(T::one(), T::zero());
    v
}

impl<T: Real> GateProgram<T> {
    pub fn new(generators: Vec<GateGenerator<T>>, d_l: usize, initial: Vec<C<T>>) -> Result<Self> {
        if initial.len() != d_l {
            return Err(Error::DimensionMismatch { expected: d_l, got: initial.len() });
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != d_l) {
            return Err(Error::DimensionMismatch { expected: d_l, got: g.dim() });
        }
        let nrm = vnorm(&initial);
        if (nrm - T::one()).abs() > T::of(1e-8) {
            return Err(Error::param("initial_logical", "must be normalized"));
        }
        Ok(GateProgram { generators, d_l, initial_logical: initial })
    }

    /// Program with no gates on a d_l-dimensional register, starting in |0>.
    pub fn empty(d_l: usize) -> Self {
        GateProgram { generators: Vec::new(), d_l, initial_logical: basis0(d_l) }
    }

    pub fn from_unitaries(gates: &[(String, DMatrix<C<T>>)], d_l: usize) -> Result<Self> {
        let gens = gates
            .iter()
            .map(|(s, u)| gate_generator(u, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gens, d_l, basis0(d_l))
    }

    /// Program from preset names (X, Y, Z, H, S, SDG, T, I, CNOT), initial |0>.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let gates = names
            .iter()
            .map(|n| Ok((n.as_ref().to_string(), named_gate::<T>(n.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        let d_l = gates.first().map(|(_, u)| u.nrows()).unwrap_or(2);
        Self::from_unitaries(&gates, d_l)
    }

    /// `len` gates cycling through `names`.
    pub fn repeat<S: AsRef<str>>(names: &[S], len: usize) -> Result<Self> {
        if names.is_empty() {
            return Ok(Self::empty(2));
        }
        let seq: Vec<&str> = (0..len).map(|i| names[i % names.len()].as_ref()).collect();
        if seq.is_empty() {
            let d_l = named_gate::<T>(names[0].as_ref())?.nrows();
            return Ok(Self::empty(d_l));
        }
        Self::from_names(&seq)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Σ_k d̃(m_k).
    pub fn dtilde_sum(&self) -> usize {
        self.generators.iter().map(|g| g.distinct_eigenvalues).sum()
    }

    pub fn with_initial(mut self, initial: Vec<C<T>>) -> Result<Self> {
        if initial.len() != self.d_l {
            return Err(Error::DimensionMismatch { expected: self.d_l, got: initial.len() });
        }
        self.initial_logical = initial;
        Ok(self)
    }
}

pub fn apply_matrix<T: Real>(u: &DMatrix<C<T>>, v: &[C<T>]) -> Vec<C<T>> {
    let x = DVector::from_column_slice(v);
    (u * x).as_slice().to_vec()
}

/// |t_j>_L = U(m_j)…U(m_1)|0>_L for j = 0..=len, by direct unitary application.
pub fn ideal_trajectory<T: Real>(program: &GateProgram<T>) -> Vec<Vec<C<T>>> {
    let mut out = Vec::with_capacity(program.len() + 1);
    let mut cur = program.initial_logical.clone();
    out.push(cur.clone());
    for g in &program.generators {
        cur = apply_matrix(&g.unitary, &cur);
        out.push(cur.clone());
    }
    out
}

/// Pure state on L ⊗ C, logical-major, clock factor in the θ basis.
#[derive(Clone, Debug)]
pub struct JointState<T: Real> {
    pub amplitudes: Vec<C<T>>,
    pub d_l: usize,
    pub d: usize,
}

impl<T: Real> JointState<T> {
    pub fn product(logical: &[C<T>], clock: &ClockState<T>) -> Self {
        let d = clock.amplitudes.len();
        let clock_theta = crate::clockcore::basis_change(clock, crate::clockcore::Basis::Theta);
        let mut amps = Vec::with_capacity(logical.len() * d);
        for a in logical {
            amps.extend(clock_theta.amplitudes.iter().map(|z| *a * z));
        }
        JointState { amplitudes: amps, d_l: logical.len(), d }
    }

    pub fn norm(&self) -> T {
        vnorm(&self.amplitudes)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut s = self.clone();
        if n > T::zero() {
            crate::scalar::scale_in_place(&mut s.amplitudes, T::one() / n);
        }
        s
    }

    /// Logical vector at θ-site k: ⟨θ_k|ψ⟩ ∈ H_L.
    pub fn at_site(&self, k: usize) -> Vec<C<T>> {
        (0..self.d_l).map(|a| self.amplitudes[a * self.d + k]).collect()
    }
}

/// Trace distance of two normalized pure states, computed as the norm of the
/// component of b orthogonal to a.
pub fn trace_distance<T: Real>(a: &[C<T>], b: &[C<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    // 1e-8 in double precision, a few thousand ulps in single
    let tol = T::of(1e-8).max(T::default_epsilon() * T::of(1e3));
    if (vnorm(a) - T::one()).abs() > tol || (vnorm(b) - T::one()).abs() > tol {
        return Err(Error::param("state", "trace distance needs normalized inputs"));
    }
    let ov = crate::scalar::vdot(a, b);
    let r = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*y - ov * x).norm_sqr());
    Ok(r.sqrt().min(T::one()))
}
