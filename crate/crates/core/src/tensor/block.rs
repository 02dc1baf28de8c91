use nalgebra::DMatrix;

use crate::error::{Result, TtError};
use crate::scalar::Scalar;

/// A `R₁ × R₂` grid of equally shaped `I × J` blocks.
///
/// A TT core unfolds naturally into this form: block `(r, s)` is the slice
/// of the core between bond indices `r` and `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix<T: Scalar> {
    grid: (usize, usize),
    block_shape: (usize, usize),
    blocks: Vec<DMatrix<T>>,
}

impl<T: Scalar> BlockMatrix<T> {
    /// Blocks are given row-major over the grid.
    pub fn new(grid: (usize, usize), blocks: Vec<DMatrix<T>>) -> Result<Self> {
        if grid.0 == 0 || grid.1 == 0 {
            return Err(TtError::BlockGridMismatch(format!(
                "grid dimensions must be positive, got {grid:?}"
            )));
        }
        if blocks.len() != grid.0 * grid.1 {
            return Err(TtError::BlockGridMismatch(format!(
                "{} blocks for a {}×{} grid",
                blocks.len(),
                grid.0,
                grid.1
            )));
        }
        let block_shape = blocks[0].shape();
        if blocks.iter().any(|b| b.shape() != block_shape) {
            return Err(TtError::BlockGridMismatch(
                "blocks do not share one shape".into(),
            ));
        }
        Ok(Self {
            grid,
            block_shape,
            blocks,
        })
    }

    pub fn from_fn(
        grid: (usize, usize),
        mut f: impl FnMut(usize, usize) -> DMatrix<T>,
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(grid.0 * grid.1);
        for r in 0..grid.0 {
            for s in 0..grid.1 {
                blocks.push(f(r, s));
            }
        }
        Self::new(grid, blocks)
    }

    /// A single block.
    pub fn single(m: DMatrix<T>) -> Self {
        Self {
            grid: (1, 1),
            block_shape: m.shape(),
            blocks: vec![m],
        }
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.block_shape
    }

    pub fn block(&self, r: usize, s: usize) -> &DMatrix<T> {
        &self.blocks[r * self.grid.1 + s]
    }

    /// The assembled `R₁I × R₂J` matrix.
    pub fn to_dense(&self) -> DMatrix<T> {
        let (bi, bj) = self.block_shape;
        let mut out = DMatrix::zeros(self.grid.0 * bi, self.grid.1 * bj);
        for r in 0..self.grid.0 {
            for s in 0..self.grid.1 {
                out.view_mut((r * bi, s * bj), (bi, bj))
                    .copy_from(self.block(r, s));
            }
        }
        out
    }
}

/// Strong Kronecker product: `C_{r₁,r₃} = Σ_{r₂} A_{r₁,r₂} ⊗ B_{r₂,r₃}`.
pub fn strong_kron<T: Scalar>(a: &BlockMatrix<T>, b: &BlockMatrix<T>) -> Result<BlockMatrix<T>> {
    if a.grid.1 != b.grid.0 {
        return Err(TtError::BlockGridMismatch(format!(
            "inner grid sizes {} and {} differ",
            a.grid.1, b.grid.0
        )));
    }
    let (ai, aj) = a.block_shape;
    let (bk, bl) = b.block_shape;
    BlockMatrix::from_fn((a.grid.0, b.grid.1), |r1, r3| {
        let mut acc = DMatrix::zeros(ai * bk, aj * bl);
        for r2 in 0..a.grid.1 {
            acc += a.block(r1, r2).kronecker(b.block(r2, r3));
        }
        acc
    })
}

/// AC product of a `P × P'` grid `A` with an `R × R'` grid `B`: the result is
/// a `PR × P'R'` grid whose block `(q, q')` is the ordinary matrix product
/// `A_{p,p'} · B_{r,r'}`, with the paired index `q = r·P + p`.
pub fn ac_product<T: Scalar>(a: &BlockMatrix<T>, b: &BlockMatrix<T>) -> Result<BlockMatrix<T>> {
    if a.block_shape.1 != b.block_shape.0 {
        return Err(TtError::ShapeMismatch(format!(
            "blocks of shape {:?} cannot multiply blocks of shape {:?}",
            a.block_shape, b.block_shape
        )));
    }
    let (p0, p1) = a.grid;
    let (r0, r1) = b.grid;
    BlockMatrix::from_fn((p0 * r0, p1 * r1), |q0, q1| {
        let (r, p) = (q0 / p0, q0 % p0);
        let (s, t) = (q1 / p1, q1 % p1);
        a.block(p, t) * b.block(r, s)
    })
}
