use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real, C};

/// Hermitian generator of a gate unitary with spectrum in (0, 2π].
#[derive(Clone, Debug, Serialize)]
pub struct GateGenerator<T: Real> {
    /// M with e^{iM} = U.
    #[serde(skip)]
    pub matrix: DMatrix<C<T>>,
    pub eigenphases: Vec<T>,
    pub symbol: String,
    /// The source unitary U(m).
    #[serde(skip)]
    pub unitary: DMatrix<C<T>>,
    /// K with e^{-iK} = U, spectrum in (0, 2π]; this is what couples to the clock.
    #[serde(skip)]
    pub drive: DMatrix<C<T>>,
    /// d̃(m): number of distinct eigenvalues of U(m).
    pub distinct_eigenvalues: usize,
}

/// Tolerance used to cluster eigenphases when counting distinct eigenvalues.
pub const PHASE_CLUSTER_TOL: f64 = 1e-9;

pub fn unitarity_defect<T: Real>(u: &DMatrix<C<T>>) -> T {
    let n = u.nrows();
    let p = u.adjoint() * u - DMatrix::<C<T>>::identity(n, n);
    frobenius(&p)
}

pub fn frobenius<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

fn unitary_tol<T: Real>(n: usize) -> T {
    // 1e-10 for f64; scaled up to the working precision for f32
    let eps = T::default_epsilon();
    T::of(1e-10).max(eps * T::of(100.0 * n as f64))
}

/// Eigenphases in (0, 2π] and eigenvectors of a unitary.
///
/// U = Σ e^{iφ}|q⟩⟨q| is diagonalized through the Hermitian combination
/// cos φ + tan(1) sin φ = sec(1) cos(φ - 1), which keeps distinct phases apart
/// unless they sum to 2 rad mod 2π (never for rational multiples of π). The
/// phases come back as Rayleigh quotients and the reconstruction is checked.
pub fn unitary_spectrum<T: Real>(u: &DMatrix<C<T>>) -> Result<(DMatrix<C<T>>, Vec<T>)> {
    let n = u.nrows();
    if n != u.ncols() || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, got: u.ncols() });
    }
    let dev = unitarity_defect(u);
    if dev > unitary_tol::<T>(n) {
        return Err(Error::NotUnitary { deviation: dev.to_f64_lossy() });
    }
    let ud = u.adjoint();
    let half = C::new(T::of(0.5), T::zero());
    let herm = (u + &ud) * half;
    let anti = (u - &ud) * C::new(T::zero(), T::of(-0.5));
    let pencil = herm + anti * C::new(T::one().tan(), T::zero());
    let e = ((&pencil + pencil.adjoint()) * half).symmetric_eigen();
    let q = e.eigenvectors;
    let uq = u * &q;
    let tol = T::of(1e-12);
    let phases: Vec<T> = (0..n)
        .map(|i| {
            let z = q.column(i).dotc(&uq.column(i));
            let mut p = z.im.atan2(z.re);
            if p < T::zero() {
                p += T::two_pi();
            }
            if p <= tol || p >= T::two_pi() - tol {
                T::two_pi()
            } else {
                p
            }
        })
        .collect();
    let mut scaled = q.clone();
    for j in 0..n {
        let z = cis(phases[j]);
        for i in 0..n {
            scaled[(i, j)] *= z;
        }
    }
    let resid = frobenius(&(&scaled * q.adjoint() - u));
    if resid > unitary_tol::<T>(n) * T::of(100.0) {
        return Err(Error::NumericalFault(format!(
            "unitary eigendecomposition residual {:.3e}",
            resid.to_f64_lossy()
        )));
    }
    Ok((q, phases))
}

fn assemble<T: Real>(q: &DMatrix<C<T>>, phases: &[T]) -> DMatrix<C<T>> {
    let n = q.nrows();
    let mut scaled = q.clone();
    for j in 0..n {
        let p = C::new(phases[j], T::zero());
        for i in 0..n {
            scaled[(i, j)] *= p;
        }
    }
    let m = &scaled * q.adjoint();
    // symmetrize away rounding
    (&m + m.adjoint()).scale(T::of(0.5))
}

/// e^{i s H} for Hermitian H given its spectral data.
pub fn spectral_exp<T: Real>(q: &DMatrix<C<T>>, w: &[T], s: T) -> DMatrix<C<T>> {
    let n = q.nrows();
    let mut scaled = q.clone();
    for j in 0..n {
        let p = cis(s * w[j]);
        for i in 0..n {
            scaled[(i, j)] *= p;
        }
    }
    &scaled * q.adjoint()
}

pub fn count_distinct_phases<T: Real>(phases: &[T]) -> usize {
    let tol = T::of(PHASE_CLUSTER_TOL);
    let mut reps: Vec<T> = Vec::new();
    for &p in phases {
        let seen = reps.iter().any(|&r| {
            let mut dlt = (p - r).abs();
            if dlt > T::pi() {
                dlt = T::two_pi() - dlt;
            }
            dlt <= tol
        });
        if !seen {
            reps.push(p);
        }
    }
    reps.len()
}

/// Build the generator of `u`.
pub fn gate_generator<T: Real>(u: &DMatrix<C<T>>, symbol: &str) -> Result<GateGenerator<T>> {
    let (q, phases) = unitary_spectrum(u)?;
    let matrix = assemble(&q, &phases);
    let drive_phases: Vec<T> = phases
        .iter()
        .map(|&p| if p >= T::two_pi() { T::two_pi() } else { T::two_pi() - p })
        .collect();
    let drive = assemble(&q, &drive_phases);
    Ok(GateGenerator {
        matrix,
        distinct_eigenvalues: count_distinct_phases(&phases),
        eigenphases: phases,
        symbol: symbol.to_string(),
        unitary: u.clone(),
        drive,
    })
}

impl<T: Real> GateGenerator<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn c<T: Real>(re: f64, im: f64) -> C<T> {
    C::new(T::of(re), T::of(im))
}

/// Named single- and two-qubit gates. `A*B` is the matrix product A·B.
pub fn named_gate<T: Real>(name: &str) -> Result<DMatrix<C<T>>> {
    if name.contains('*') {
        let mut acc: Option<DMatrix<C<T>>> = None;
        for part in name.split('*') {
            let m = named_gate::<T>(part.trim())?;
            acc = Some(match acc {
                None => m,
                Some(a) if a.ncols() == m.nrows() => a * m,
                Some(a) => return Err(Error::DimensionMismatch { expected: a.ncols(), got: m.nrows() }),
            });
        }
        return Ok(acc.unwrap());
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = c::<T>(0.0, 0.0);
    let o = c::<T>(1.0, 0.0);
    let m = match name.to_ascii_uppercase().as_str() {
        "I" | "ID" => DMatrix::identity(2, 2),
        "X" => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        "Y" => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        "Z" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(-1.0, 0.0)]),
        "H" => DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
        "S" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(0.0, 1.0)]),
        "SDG" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(0.0, -1.0)]),
        "T" => DMatrix::from_row_slice(2, 2, &[o, z, z, c(h, h)]),
        "CNOT" | "CX" => {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = o;
            m[(1, 1)] = o;
            m[(2, 3)] = o;
            m[(3, 2)] = o;
            m
        }
        other => return Err(Error::param("gate", format!("unknown gate preset `{other}`"))),
    };
    Ok(m)
}
