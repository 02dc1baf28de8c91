//! Arithmetic inside the TT formats. Products are exact; rounding is always
//! an explicit step driven by a [`TruncationPolicy`].
//!
//! Paired bond indices of products are ordered `q = r·P + p`, where `p`
//! runs over the operator's bond and `r` over the operand's.

use nalgebra::DMatrix;

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tt::{Core3, Core4, TruncationPolicy, TtMatrix, TtVector};

fn same_modes<T: Scalar>(x: &TtVector<T>, y: &TtVector<T>) -> Result<()> {
    if x.modes() != y.modes() {
        return Err(TtError::ShapeMismatch(format!(
            "modes {:?} and {:?} differ",
            x.modes(),
            y.modes()
        )));
    }
    Ok(())
}

/// Exact sum with block-diagonal cores: interior ranks add, boundary ranks
/// stay one.
pub fn tt_add<T: Scalar>(x: &TtVector<T>, y: &TtVector<T>) -> Result<TtVector<T>> {
    same_modes(x, y)?;
    let n = x.order();
    if n == 1 {
        let data = x.core(0).data().iter().zip(y.core(0).data()).map(|(a, b)| *a + *b).collect();
        return TtVector::from_cores(vec![Core3::new(1, x.modes()[0], 1, data)?]);
    }
    let mut cores = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (x.core(k), y.core(k));
        let m = a.mode;
        let left = if k == 0 { 1 } else { a.left + b.left };
        let right = if k == n - 1 { 1 } else { a.right + b.right };
        let mut data = vec![T::zero(); left * m * right];
        let (bl, br) = (
            if k == 0 { 0 } else { a.left },
            if k == n - 1 { 0 } else { a.right },
        );
        for (c, lo, ro) in [(a, 0, 0), (b, bl, br)] {
            for p in 0..c.left {
                for i in 0..m {
                    for q in 0..c.right {
                        data[((p + lo) * m + i) * right + q + ro] = c.get(p, i, q);
                    }
                }
            }
        }
        cores.push(Core3::new(left, m, right, data)?);
    }
    TtVector::from_cores(cores)
}

/// `α·x`, scaling the first core only.
pub fn tt_scale<T: Scalar>(x: &TtVector<T>, alpha: T) -> TtVector<T> {
    let mut y = x.clone();
    y.cores_mut()[0].scale(alpha);
    y
}

/// `x + α·y` without rounding.
pub fn tt_axpy<T: Scalar>(x: &TtVector<T>, alpha: T, y: &TtVector<T>) -> Result<TtVector<T>> {
    tt_add(x, &tt_scale(y, alpha))
}

/// `⟨x, y⟩` by a left-to-right zip contraction, never forming a dense
/// intermediate larger than `R_x × R_y` per mode index.
pub fn tt_inner<T: Scalar>(x: &TtVector<T>, y: &TtVector<T>) -> Result<T> {
    same_modes(x, y)?;
    let mut env = DMatrix::from_element(1, 1, T::one());
    for (a, b) in x.cores().iter().zip(y.cores()) {
        let mut next = DMatrix::zeros(a.right, b.right);
        for i in 0..a.mode {
            next += a.slice(i).transpose() * &env * b.slice(i);
        }
        env = next;
    }
    Ok(env[(0, 0)])
}

/// `‖x‖` as the Frobenius norm of the first core after right-orthogonalizing
/// the rest.
pub fn tt_norm<T: Scalar>(x: &TtVector<T>) -> T {
    x.clone()
        .orthogonalized(0)
        .expect("site 0 exists")
        .core(0)
        .norm()
}

fn check_apply<T: Scalar>(a: &TtMatrix<T>, x: &TtVector<T>) -> Result<()> {
    if a.col_modes() != x.modes() {
        return Err(TtError::ShapeMismatch(format!(
            "operator columns {:?} do not match vector modes {:?}",
            a.col_modes(),
            x.modes()
        )));
    }
    Ok(())
}

/// `A·x` with ranks `PₙRₙ` (no rounding).
pub fn mpo_apply_exact<T: Scalar>(a: &TtMatrix<T>, x: &TtVector<T>) -> Result<TtVector<T>> {
    check_apply(a, x)?;
    let cores = a
        .cores()
        .iter()
        .zip(x.cores())
        .map(|(ac, xc)| {
            let (p0, p1, r0, r1) = (ac.left, ac.right, xc.left, xc.right);
            let (mi, mj) = (ac.rows, ac.cols);
            let (left, right) = (p0 * r0, p1 * r1);
            let mut data = vec![T::zero(); left * mi * right];
            for r in 0..r0 {
                for p in 0..p0 {
                    let q0 = r * p0 + p;
                    for i in 0..mi {
                        for j in 0..mj {
                            for pp in 0..p1 {
                                let w = ac.get(p, i, j, pp);
                                if w == T::zero() {
                                    continue;
                                }
                                for rr in 0..r1 {
                                    data[(q0 * mi + i) * right + rr * p1 + pp] += w * xc.get(r, j, rr);
                                }
                            }
                        }
                    }
                }
            }
            Core3::new(left, mi, right, data)
        })
        .collect::<Result<_>>()?;
    TtVector::from_cores(cores)
}

/// `A·x` rounded with `policy`.
pub fn mpo_apply<T: Scalar>(
    a: &TtMatrix<T>,
    x: &TtVector<T>,
    policy: &TruncationPolicy,
) -> Result<TtVector<T>> {
    mpo_apply_exact(a, x)?.round(policy)
}

/// `A·B` with ranks `PₙRₙ` (no rounding).
pub fn mpo_mul_exact<T: Scalar>(a: &TtMatrix<T>, b: &TtMatrix<T>) -> Result<TtMatrix<T>> {
    if a.col_modes() != b.row_modes() {
        return Err(TtError::ShapeMismatch(format!(
            "inner modes {:?} and {:?} differ",
            a.col_modes(),
            b.row_modes()
        )));
    }
    let cores = a
        .cores()
        .iter()
        .zip(b.cores())
        .map(|(ac, bc)| {
            let (p0, p1, r0, r1) = (ac.left, ac.right, bc.left, bc.right);
            let (mi, mj, mk) = (ac.rows, ac.cols, bc.cols);
            let (left, right) = (p0 * r0, p1 * r1);
            let mut data = vec![T::zero(); left * mi * mk * right];
            for r in 0..r0 {
                for p in 0..p0 {
                    let q0 = r * p0 + p;
                    for i in 0..mi {
                        for j in 0..mj {
                            for pp in 0..p1 {
                                let w = ac.get(p, i, j, pp);
                                if w == T::zero() {
                                    continue;
                                }
                                for k in 0..mk {
                                    for rr in 0..r1 {
                                        data[((q0 * mi + i) * mk + k) * right + rr * p1 + pp] +=
                                            w * bc.get(r, j, k, rr);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Core4::new(left, mi, mk, right, data)
        })
        .collect::<Result<_>>()?;
    TtMatrix::from_cores(cores)
}

/// `A·B` rounded with `policy`.
pub fn mpo_mul<T: Scalar>(
    a: &TtMatrix<T>,
    b: &TtMatrix<T>,
    policy: &TruncationPolicy,
) -> Result<TtMatrix<T>> {
    mpo_mul_exact(a, b)?.round(policy)
}

/// `Aᵀ` with the row and column modes of every core swapped.
pub fn mpo_transpose<T: Scalar>(a: &TtMatrix<T>) -> TtMatrix<T> {
    a.transpose()
}

/// `A + B` for operators of equal shape, via the fused-mode sum.
pub fn mpo_add<T: Scalar>(a: &TtMatrix<T>, b: &TtMatrix<T>) -> Result<TtMatrix<T>> {
    if a.row_modes() != b.row_modes() || a.col_modes() != b.col_modes() {
        return Err(TtError::ShapeMismatch("operators differ in shape".into()));
    }
    let s = tt_add(&a.to_fused(), &b.to_fused())?;
    TtMatrix::from_fused(s, &a.row_modes(), &a.col_modes())
}

/// `α·A`, scaling the first core.
pub fn mpo_scale<T: Scalar>(a: &TtMatrix<T>, alpha: T) -> TtMatrix<T> {
    TtMatrix::from_fused(tt_scale(&a.to_fused(), alpha), &a.row_modes(), &a.col_modes())
        .expect("shape is unchanged")
}
