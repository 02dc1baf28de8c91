//! Dense N-way tensors and the basic multilinear operations on them.
//!
//! Every tensor is stored flat in big-endian order: the last index runs
//! fastest. For a shape `(I1, ..., IN)` the zero-based multi-index
//! `(i1, ..., iN)` lives at
//!
//! ```text
//! iN + i(N-1)·IN + ... + i1·I2···IN
//! ```
//!
//! Unfoldings, reshapes, Kronecker products and the TT formats built on top all
//! use this single convention. Mode numbers in the Rust API are zero-based;
//! [`from_one_based`] and [`to_one_based`] convert indices written in the usual
//! one-based mathematical notation.

mod block;
mod products;

pub use block::{ac_product, strong_kron, BlockMatrix};
pub use products::{
    contract, hadamard, khatri_rao, kron, mode_n_mat_product, mode_n_vec_product,
    multilinear_product, outer,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TtError};
use crate::scalar::Scalar;

/// Flat big-endian offset of `index` within `shape`.
pub fn flat_index(shape: &[usize], index: &[usize]) -> Result<usize> {
    if shape.len() != index.len() || index.iter().zip(shape).any(|(&i, &n)| i >= n) {
        return Err(TtError::IndexOutOfBounds {
            index: index.to_vec(),
            shape: shape.to_vec(),
        });
    }
    Ok(index
        .iter()
        .zip(shape)
        .fold(0, |acc, (&i, &n)| acc * n + i))
}

/// Inverse of [`flat_index`].
pub fn multi_from_flat(shape: &[usize], flat: usize) -> Result<Vec<usize>> {
    let len: usize = shape.iter().product();
    if flat >= len {
        return Err(TtError::FlatIndexOutOfRange { index: flat, len });
    }
    let mut index = vec![0; shape.len()];
    let mut rest = flat;
    for (slot, &n) in index.iter_mut().zip(shape).rev() {
        *slot = rest % n;
        rest /= n;
    }
    Ok(index)
}

/// Flat offset under the little-endian (first index fastest) convention.
/// Only used to import data written column-major.
pub fn flat_index_little_endian(shape: &[usize], index: &[usize]) -> Result<usize> {
    if shape.len() != index.len() || index.iter().zip(shape).any(|(&i, &n)| i >= n) {
        return Err(TtError::IndexOutOfBounds {
            index: index.to_vec(),
            shape: shape.to_vec(),
        });
    }
    Ok(index
        .iter()
        .zip(shape)
        .rev()
        .fold(0, |acc, (&i, &n)| acc * n + i))
}

/// Converts a one-based multi-index to zero-based. Rejects zero entries.
pub fn from_one_based(index: &[usize]) -> Result<Vec<usize>> {
    index
        .iter()
        .map(|&i| {
            i.checked_sub(1).ok_or_else(|| TtError::IndexOutOfBounds {
                index: index.to_vec(),
                shape: vec![],
            })
        })
        .collect()
}

pub fn to_one_based(index: &[usize]) -> Vec<usize> {
    index.iter().map(|&i| i + 1).collect()
}

/// Advances `index` to the next multi-index in big-endian order. Returns
/// `false` after the last one wraps around.
pub(crate) fn next_index(index: &mut [usize], shape: &[usize]) -> bool {
    for (slot, &n) in index.iter_mut().zip(shape).rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// An N-way array of reals with an explicit shape.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(TtError::ShapeMismatch(format!(
                "mode sizes must be positive, got {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(TtError::ShapeMismatch(format!(
                "shape {shape:?} holds {len} entries but {} were given",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![T::zero(); len])
    }

    /// Order-0 tensor holding one value.
    pub fn scalar(value: T) -> Self {
        Self {
            shape: vec![],
            data: vec![value],
        }
    }

    /// Builds a tensor entry by entry from zero-based multi-indices.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut index = vec![0; shape.len()];
        for _ in 0..len {
            data.push(f(&index));
            next_index(&mut index, &shape);
        }
        Self::new(shape, data)
    }

    /// Reorders data given in little-endian (first index fastest) layout.
    pub fn from_little_endian(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(TtError::ShapeMismatch(format!(
                "shape {shape:?} holds {len} entries but {} were given",
                data.len()
            )));
        }
        let probe = shape.clone();
        Self::from_fn(shape, |idx| {
            data[flat_index_little_endian(&probe, idx).expect("index within shape")]
        })
    }

    /// A column vector viewed as an order-1 tensor.
    pub fn from_vector(v: &DVector<T>) -> Self {
        Self {
            shape: vec![v.len()],
            data: v.iter().copied().collect(),
        }
    }

    /// A matrix viewed as an order-2 tensor.
    pub fn from_matrix(m: &DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self {
            shape: vec![rows, cols],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[flat_index(&self.shape, index)?])
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<()> {
        let k = flat_index(&self.shape, index)?;
        self.data[k] = value;
        Ok(())
    }

    /// Frobenius norm, computed with scaling to avoid overflow.
    pub fn norm(&self) -> T {
        frobenius(&self.data)
    }

    /// `vec(T)`: the flat data as a column vector.
    pub fn to_vector(&self) -> DVector<T> {
        DVector::from_column_slice(&self.data)
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Reorders modes so that mode `perm[k]` of `self` becomes mode `k`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let order = self.order();
        let mut seen = vec![false; order];
        if perm.len() != order {
            return Err(TtError::InvalidPartition(format!(
                "permutation {perm:?} has wrong length for order {order}"
            )));
        }
        for &p in perm {
            if p >= order || seen[p] {
                return Err(TtError::InvalidPartition(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides = strides(&self.shape);
        let perm_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
        let mut data = Vec::with_capacity(self.len());
        let mut index = vec![0; order];
        for _ in 0..self.len() {
            let src: usize = index.iter().zip(&perm_strides).map(|(i, s)| i * s).sum();
            data.push(self.data[src]);
            next_index(&mut index, &new_shape);
        }
        Ok(Self {
            shape: new_shape,
            data,
        })
    }

    /// Mode-`n` unfolding: an `I_n × ∏_{k≠n} I_k` matrix whose columns follow
    /// the remaining modes in big-endian order.
    pub fn unfold(&self, n: usize) -> Result<DMatrix<T>> {
        if n >= self.order() {
            return Err(TtError::InvalidMode {
                mode: n,
                order: self.order(),
            });
        }
        self.unfold_split(&[n])
    }

    /// Inverse of [`DenseTensor::unfold`] for a tensor of the given shape.
    pub fn refold(m: &DMatrix<T>, n: usize, shape: &[usize]) -> Result<Self> {
        if n >= shape.len() {
            return Err(TtError::InvalidMode {
                mode: n,
                order: shape.len(),
            });
        }
        let len: usize = shape.iter().product();
        if m.nrows() != shape[n] || m.nrows() * m.ncols() != len {
            return Err(TtError::ShapeMismatch(format!(
                "{}×{} matrix cannot refold into {shape:?} along mode {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let rest: Vec<usize> = (0..shape.len()).filter(|&k| k != n).collect();
        let rest_shape: Vec<usize> = rest.iter().map(|&k| shape[k]).collect();
        Self::from_fn(shape.to_vec(), |idx| {
            let others: Vec<usize> = rest.iter().map(|&k| idx[k]).collect();
            let col = flat_index(&rest_shape, &others).expect("in range");
            m[(idx[n], col)]
        })
    }

    /// Generalized unfolding: rows indexed by `row_modes` (in the given
    /// order), columns by the remaining modes in increasing order. Both
    /// groups are linearized big-endian.
    pub fn unfold_split(&self, row_modes: &[usize]) -> Result<DMatrix<T>> {
        let order = self.order();
        if row_modes.is_empty() {
            return Err(TtError::InvalidPartition("row modes are empty".into()));
        }
        let mut used = vec![false; order];
        for &m in row_modes {
            if m >= order {
                return Err(TtError::InvalidMode { mode: m, order });
            }
            if used[m] {
                return Err(TtError::InvalidPartition(format!(
                    "mode {m} listed twice in {row_modes:?}"
                )));
            }
            used[m] = true;
        }
        let col_modes: Vec<usize> = (0..order).filter(|&k| !used[k]).collect();
        let mut perm = row_modes.to_vec();
        perm.extend_from_slice(&col_modes);
        let permuted = self.permute(&perm)?;
        let rows: usize = row_modes.iter().map(|&k| self.shape[k]).product();
        let cols = self.len() / rows;
        Ok(DMatrix::from_row_slice(rows, cols, &permuted.data))
    }

    /// Matrix with rows and columns in row-major order of the flat data
    /// (the first `split` modes index rows).
    pub(crate) fn as_matrix(&self, split: usize) -> DMatrix<T> {
        let rows: usize = self.shape[..split].iter().product();
        let cols = self.len() / rows;
        DMatrix::from_row_slice(rows, cols, &self.data)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.shape != other.shape {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.shape != other.shape {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let diff: Vec<T> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a - *b)
            .collect();
        Ok(frobenius(&diff))
    }
}

/// Big-endian strides of a shape.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Two-norm of a slice with scaling.
pub(crate) fn frobenius<T: Scalar>(data: &[T]) -> T {
    let scale = data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let sum = data.iter().fold(T::zero(), |acc, x| {
        let y = *x / scale;
        acc + y * y
    });
    scale * sum.sqrt()
}

/// Matrix data in row-major order.
pub fn row_major<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    m.transpose().as_slice().to_vec()
}

/// Inverse of [`row_major`].
pub fn matrix_from_row_major<T: Scalar>(rows: usize, cols: usize, data: &[T]) -> DMatrix<T> {
    DMatrix::from_row_slice(rows, cols, data)
}
