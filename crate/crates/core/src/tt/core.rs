use nalgebra::DMatrix;

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tensor::{frobenius, row_major};

/// Order-3 core of shape `left × mode × right`, stored with the left rank
/// slowest and the right rank fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Core3<T> {
    pub(crate) left: usize,
    pub(crate) mode: usize,
    pub(crate) right: usize,
    pub(crate) data: Vec<T>,
}

impl<T: Scalar> Core3<T> {
    pub fn new(left: usize, mode: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if left == 0 || mode == 0 || right == 0 || data.len() != left * mode * right {
            return Err(TtError::ShapeMismatch(format!(
                "core {left}×{mode}×{right} with {} entries",
                data.len()
            )));
        }
        Ok(Self {
            left,
            mode,
            right,
            data,
        })
    }

    pub fn zeros(left: usize, mode: usize, right: usize) -> Self {
        Self {
            left,
            mode,
            right,
            data: vec![T::zero(); left * mode * right],
        }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> T {
        self.data[(a * self.mode + i) * self.right + b]
    }

    /// The `left × right` slice at physical index `i`.
    pub fn slice(&self, i: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.left, self.right, |a, b| self.get(a, i, b))
    }

    /// `(left·mode) × right` unfolding; its transpose is the mode-3 unfolding.
    pub fn left_unfolding(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.left * self.mode, self.right, &self.data)
    }

    /// `left × (mode·right)` unfolding (the mode-1 unfolding).
    pub fn right_unfolding(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.left, self.mode * self.right, &self.data)
    }

    pub fn from_left_unfolding(m: &DMatrix<T>, left: usize, mode: usize) -> Self {
        debug_assert_eq!(m.nrows(), left * mode);
        Self {
            left,
            mode,
            right: m.ncols(),
            data: row_major(m),
        }
    }

    pub fn from_right_unfolding(m: &DMatrix<T>, mode: usize, right: usize) -> Self {
        debug_assert_eq!(m.ncols(), mode * right);
        Self {
            left: m.nrows(),
            mode,
            right,
            data: row_major(m),
        }
    }

    pub fn norm(&self) -> T {
        frobenius(&self.data)
    }

    pub(crate) fn scale(&mut self, alpha: T) {
        for x in &mut self.data {
            *x *= alpha;
        }
    }

    pub fn param_count(&self) -> usize {
        self.data.len()
    }
}

/// Order-4 core of shape `left × rows × cols × right` (an MPO core), stored
/// with the left rank slowest, then row mode, column mode, right rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Core4<T> {
    pub(crate) left: usize,
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) right: usize,
    pub(crate) data: Vec<T>,
}

impl<T: Scalar> Core4<T> {
    pub fn new(left: usize, rows: usize, cols: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if left == 0
            || rows == 0
            || cols == 0
            || right == 0
            || data.len() != left * rows * cols * right
        {
            return Err(TtError::ShapeMismatch(format!(
                "core {left}×{rows}×{cols}×{right} with {} entries",
                data.len()
            )));
        }
        Ok(Self {
            left,
            rows,
            cols,
            right,
            data,
        })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, p: usize, i: usize, j: usize, q: usize) -> T {
        self.data[((p * self.rows + i) * self.cols + j) * self.right + q]
    }

    /// The `rows × cols` block between bond indices `p` and `q`.
    pub fn block(&self, p: usize, q: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(p, i, j, q))
    }

    /// The `left × right` slice at physical indices `(i, j)`.
    pub fn slice(&self, i: usize, j: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.left, self.right, |p, q| self.get(p, i, j, q))
    }

    /// View with the row and column modes fused (row slower).
    pub fn fused(&self) -> Core3<T> {
        Core3 {
            left: self.left,
            mode: self.rows * self.cols,
            right: self.right,
            data: self.data.clone(),
        }
    }

    pub fn from_fused(core: Core3<T>, rows: usize, cols: usize) -> Result<Self> {
        if core.mode != rows * cols {
            return Err(TtError::ShapeMismatch(format!(
                "fused mode {} is not {rows}×{cols}",
                core.mode
            )));
        }
        Self::new(core.left, rows, cols, core.right, core.data)
    }

    /// Swaps the row and column modes.
    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for p in 0..self.left {
            for j in 0..self.cols {
                for i in 0..self.rows {
                    for q in 0..self.right {
                        data.push(self.get(p, i, j, q));
                    }
                }
            }
        }
        Self {
            left: self.left,
            rows: self.cols,
            cols: self.rows,
            right: self.right,
            data,
        }
    }

    pub fn param_count(&self) -> usize {
        self.data.len()
    }
}
