use nalgebra::{DMatrix, DVector};

use super::DenseTensor;
#[cfg(test)]
use super::{next_index, strides};
use crate::error::{Result, TtError};
use crate::scalar::Scalar;

fn check_mode<T: Scalar>(t: &DenseTensor<T>, n: usize) -> Result<()> {
    if n >= t.order() {
        return Err(TtError::InvalidMode {
            mode: n,
            order: t.order(),
        });
    }
    Ok(())
}

/// Sizes of the modes before and after `n`, as flat block counts.
fn split_at_mode(shape: &[usize], n: usize) -> (usize, usize, usize) {
    let left = shape[..n].iter().product();
    let right = shape[n + 1..].iter().product();
    (left, shape[n], right)
}

/// Mode-`n` product `T ×ₙ M`: `unfold(result, n) = M · unfold(T, n)`.
pub fn mode_n_mat_product<T: Scalar>(
    t: &DenseTensor<T>,
    m: &DMatrix<T>,
    n: usize,
) -> Result<DenseTensor<T>> {
    check_mode(t, n)?;
    let (left, size, right) = split_at_mode(t.shape(), n);
    if m.ncols() != size {
        return Err(TtError::ShapeMismatch(format!(
            "matrix has {} columns but mode {n} has size {size}",
            m.ncols()
        )));
    }
    let rows = m.nrows();
    let src = t.data();
    let mut out = vec![T::zero(); left * rows * right];
    for l in 0..left {
        for k in 0..rows {
            let dst = &mut out[(l * rows + k) * right..(l * rows + k + 1) * right];
            for i in 0..size {
                let w = m[(k, i)];
                if w == T::zero() {
                    continue;
                }
                let s = &src[(l * size + i) * right..(l * size + i + 1) * right];
                for (d, x) in dst.iter_mut().zip(s) {
                    *d += w * *x;
                }
            }
        }
    }
    let mut shape = t.shape().to_vec();
    shape[n] = rows;
    DenseTensor::new(shape, out)
}

/// Mode-`n` product with a vector; mode `n` is summed out.
pub fn mode_n_vec_product<T: Scalar>(
    t: &DenseTensor<T>,
    v: &DVector<T>,
    n: usize,
) -> Result<DenseTensor<T>> {
    let as_row = DMatrix::from_row_slice(1, v.len(), v.as_slice());
    let p = mode_n_mat_product(t, &as_row, n)?;
    let mut shape = t.shape().to_vec();
    shape.remove(n);
    p.reshape(shape)
}

/// Full multilinear product `T ×₁ B⁽¹⁾ ×₂ B⁽²⁾ ··· ×_N B⁽ᴺ⁾`.
pub fn multilinear_product<T: Scalar>(
    t: &DenseTensor<T>,
    factors: &[DMatrix<T>],
) -> Result<DenseTensor<T>> {
    if factors.len() != t.order() {
        return Err(TtError::ShapeMismatch(format!(
            "{} factors for a tensor of order {}",
            factors.len(),
            t.order()
        )));
    }
    factors
        .iter()
        .enumerate()
        .try_fold(t.clone(), |acc, (n, b)| mode_n_mat_product(&acc, b, n))
}

/// Contracts `modes_a[k]` of `a` with `modes_b[k]` of `b`. The result carries
/// the free modes of `a` followed by the free modes of `b`; contracting every
/// mode yields an order-0 tensor.
pub fn contract<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    modes_a: &[usize],
    modes_b: &[usize],
) -> Result<DenseTensor<T>> {
    if modes_a.len() != modes_b.len() {
        return Err(TtError::InvalidPartition(format!(
            "unpaired modes {modes_a:?} / {modes_b:?}"
        )));
    }
    let free = |t: &DenseTensor<T>, modes: &[usize]| -> Result<Vec<usize>> {
        let mut used = vec![false; t.order()];
        for &m in modes {
            if m >= t.order() {
                return Err(TtError::InvalidMode {
                    mode: m,
                    order: t.order(),
                });
            }
            if used[m] {
                return Err(TtError::InvalidPartition(format!("mode {m} repeated")));
            }
            used[m] = true;
        }
        Ok((0..t.order()).filter(|&k| !used[k]).collect())
    };
    let free_a = free(a, modes_a)?;
    let free_b = free(b, modes_b)?;
    for (&ma, &mb) in modes_a.iter().zip(modes_b) {
        if a.shape()[ma] != b.shape()[mb] {
            return Err(TtError::ShapeMismatch(format!(
                "mode {ma} (size {}) cannot contract with mode {mb} (size {})",
                a.shape()[ma],
                b.shape()[mb]
            )));
        }
    }
    let mut perm_a = free_a.clone();
    perm_a.extend_from_slice(modes_a);
    let mut perm_b = modes_b.to_vec();
    perm_b.extend_from_slice(&free_b);
    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let ma = pa.as_matrix(free_a.len());
    let mb = pb.as_matrix(modes_b.len());
    let prod = ma * mb;
    let mut shape: Vec<usize> = free_a.iter().map(|&k| a.shape()[k]).collect();
    shape.extend(free_b.iter().map(|&k| b.shape()[k]));
    DenseTensor::new(shape, super::row_major(&prod))
}

/// Outer product `a ∘ b`: order adds, `c[i, j] = a[i]·b[j]`.
pub fn outer<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> DenseTensor<T> {
    let mut data = Vec::with_capacity(a.len() * b.len());
    for &x in a.data() {
        data.extend(b.data().iter().map(|&y| x * y));
    }
    let mut shape = a.shape().to_vec();
    shape.extend_from_slice(b.shape());
    DenseTensor::new(shape, data).expect("outer shape consistent")
}

/// Kronecker product of two tensors of equal order: mode `n` of the result
/// has size `Iₙ·Jₙ` with the index of `a` slower.
pub fn kron<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    if a.order() != b.order() {
        return Err(TtError::ShapeMismatch(format!(
            "Kronecker product needs equal orders, got {} and {}",
            a.order(),
            b.order()
        )));
    }
    let order = a.order();
    // (i1, .., iN, j1, .., jN) -> (i1, j1, .., iN, jN), then fuse the pairs.
    let o = outer(a, b);
    let perm: Vec<usize> = (0..order).flat_map(|k| [k, order + k]).collect();
    let shape: Vec<usize> = a
        .shape()
        .iter()
        .zip(b.shape())
        .map(|(i, j)| i * j)
        .collect();
    o.permute(&perm)?.reshape(shape)
}

/// Column-wise Kronecker product of two matrices with equal column counts.
pub fn khatri_rao<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    if a.ncols() != b.ncols() {
        return Err(TtError::ShapeMismatch(format!(
            "Khatri-Rao product needs equal column counts, got {} and {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let (i, k) = (a.nrows(), b.nrows());
    Ok(DMatrix::from_fn(i * k, a.ncols(), |r, c| {
        a[(r / k, c)] * b[(r % k, c)]
    }))
}

/// Element-wise product of equally shaped tensors.
pub fn hadamard<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    if a.shape() != b.shape() {
        return Err(TtError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    DenseTensor::new(
        a.shape().to_vec(),
        a.data().iter().zip(b.data()).map(|(x, y)| *x * *y).collect(),
    )
}

/// Brute-force multi-mode contraction by index enumeration. Test oracle.
#[cfg(test)]
pub(crate) fn contract_by_enumeration(
    a: &DenseTensor<f64>,
    b: &DenseTensor<f64>,
    modes_a: &[usize],
    modes_b: &[usize],
) -> DenseTensor<f64> {
    let free_a: Vec<usize> = (0..a.order()).filter(|k| !modes_a.contains(k)).collect();
    let free_b: Vec<usize> = (0..b.order()).filter(|k| !modes_b.contains(k)).collect();
    let mut shape: Vec<usize> = free_a.iter().map(|&k| a.shape()[k]).collect();
    shape.extend(free_b.iter().map(|&k| b.shape()[k]));
    let sum_shape: Vec<usize> = modes_a.iter().map(|&k| a.shape()[k]).collect();
    let sa = strides(a.shape());
    let sb = strides(b.shape());
    DenseTensor::from_fn(shape, |idx| {
        let mut acc = 0.0;
        let mut s = vec![0; sum_shape.len()];
        loop {
            let mut ia = 0;
            for (p, &k) in free_a.iter().enumerate() {
                ia += idx[p] * sa[k];
            }
            for (q, &k) in modes_a.iter().enumerate() {
                ia += s[q] * sa[k];
            }
            let mut ib = 0;
            for (p, &k) in free_b.iter().enumerate() {
                ib += idx[free_a.len() + p] * sb[k];
            }
            for (q, &k) in modes_b.iter().enumerate() {
                ib += s[q] * sb[k];
            }
            acc += a.data()[ia] * b.data()[ib];
            if !next_index(&mut s, &sum_shape) {
                break;
            }
        }
        acc
    })
    .unwrap()
}
