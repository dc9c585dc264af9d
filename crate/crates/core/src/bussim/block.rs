use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gatesim::{gate_generator, GateGenerator, PHASE_CLUSTER_TOL};
use crate::scalar::{Real, C};

/// Cell content meaning "no gate"; gate symbols are 1..=|G|.
pub const ZERO_SYMBOL: usize = 0;

/// Column of L+1 memory cells feeding one bus lane.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MemoryBlock {
    pub cell_symbols: Vec<usize>,
    pub alphabet: usize,
    pub cell_dim: usize,
    pub block_dim: usize,
}

impl MemoryBlock {
    /// `column[0]` must be the zero symbol, the rest gate symbols in 1..=alphabet.
    pub fn new(column: &[usize], alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::param("alphabet", "must hold at least one gate symbol"));
        }
        if column.len() < 2 {
            return Err(Error::param("column", "needs L+1 >= 2 cells"));
        }
        if column[0] != ZERO_SYMBOL {
            return Err(Error::param("column", "cell 0 must initially hold the zero symbol"));
        }
        if let Some(&s) = column[1..].iter().find(|&&s| s == ZERO_SYMBOL || s > alphabet) {
            return Err(Error::param(
                "column",
                format!("cells 1..=L must hold gate symbols in 1..={alphabet}, got {s}"),
            ));
        }
        let cell_dim = alphabet + 1;
        let block_dim = cell_dim
            .checked_pow(column.len() as u32)
            .ok_or_else(|| Error::param("column", "block dimension overflows"))?;
        Ok(MemoryBlock { cell_symbols: column.to_vec(), alphabet, cell_dim, block_dim })
    }

    pub fn cells(&self) -> usize {
        self.cell_symbols.len()
    }

    /// Block basis index of a cell pattern, cell 0 least significant.
    pub fn index_of(&self, cells: &[usize]) -> usize {
        cells.iter().rev().fold(0, |acc, &c| acc * self.cell_dim + c)
    }

    pub fn pattern(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cells());
        for _ in 0..self.cells() {
            out.push(idx % self.cell_dim);
            idx /= self.cell_dim;
        }
        out
    }

    pub fn initial_index(&self) -> usize {
        self.index_of(&self.cell_symbols)
    }

    /// Content of cell 0 for block basis state `idx`.
    pub fn cell0(&self, idx: usize) -> usize {
        idx % self.cell_dim
    }

    /// Symbol cell 0 holds after `shifts` applications of the shift.
    pub fn symbol_after(&self, shifts: usize) -> usize {
        self.cell_symbols[shifts % self.cells()]
    }
}

/// Generator I_M of the content shift, with one spectral projector per
/// distinct eigenvalue of the drive.
#[derive(Clone, Debug)]
pub struct ShiftGenerator<T: Real> {
    pub block: MemoryBlock,
    pub generator: GateGenerator<T>,
    /// (Ω, projector) pairs; Ω in (0, 2π] is an eigenvalue of the drive K, e^{-iK} = P.
    pub projectors: Vec<(T, DMatrix<C<T>>)>,
}

impl<T: Real> ShiftGenerator<T> {
    /// M with e^{iM} = P.
    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.generator.matrix
    }

    pub fn drive(&self) -> &DMatrix<C<T>> {
        &self.generator.drive
    }
}

/// P|c_0, c_1, ..., c_L⟩ = |c_1, ..., c_L, c_0⟩ on every block basis state.
pub fn shift_permutation<T: Real>(block: &MemoryBlock) -> DMatrix<C<T>> {
    let n = block.block_dim;
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut cells = block.pattern(i);
        cells.rotate_left(1);
        p[(block.index_of(&cells), i)] = C::new(T::one(), T::zero());
    }
    p
}

pub fn shift_generator<T: Real>(column: &[usize], alphabet: usize) -> Result<ShiftGenerator<T>> {
    let block = MemoryBlock::new(column, alphabet)?;
    let p = shift_permutation::<T>(&block);
    let generator = gate_generator(&p, "shift")?;
    let e = generator.drive.clone().symmetric_eigen();
    let tol = T::of(1e-6).max(T::of(PHASE_CLUSTER_TOL));
    let mut projectors: Vec<(T, DMatrix<C<T>>)> = Vec::new();
    let n = block.block_dim;
    for j in 0..n {
        let w = e.eigenvalues[j];
        let v = e.eigenvectors.column(j);
        let outer = &v * v.adjoint();
        match projectors.iter_mut().find(|(o, _)| (*o - w).abs() <= tol) {
            Some((_, pr)) => *pr += outer,
            None => projectors.push((w, outer)),
        }
    }
    projectors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(ShiftGenerator { block, generator, projectors })
}
