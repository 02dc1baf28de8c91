//! Splitting a train around one or two cores: interface matrices of the
//! partial trains and the frame matrices that map a core to the full vector.
//!
//! Everything here materializes dense matrices with one row per tensor
//! entry, so it is meant for verification at small sizes and refuses to
//! build frames with more than [`FRAME_ROW_CAP`] rows.

use nalgebra::DMatrix;

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tt::{contract_partial, TtVector};

/// Largest number of rows a frame matrix may have.
pub const FRAME_ROW_CAP: usize = 1 << 16;

fn guard<T: Scalar>(x: &TtVector<T>) -> Result<()> {
    let size = x
        .modes()
        .iter()
        .try_fold(1usize, |a, &m| a.checked_mul(m))
        .unwrap_or(usize::MAX);
    if size > FRAME_ROW_CAP {
        return Err(TtError::SizeGuard {
            size,
            cap: FRAME_ROW_CAP,
        });
    }
    Ok(())
}

fn check_site<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<()> {
    if n >= x.order() {
        return Err(TtError::InvalidMode {
            mode: n,
            order: x.order(),
        });
    }
    Ok(())
}

/// Left interface `G^{<n}`: the `R_{n−1} × I₁⋯I_{n−1}` unfolding of the
/// cores before site `n` (a `1 × 1` unit for `n = 0`).
pub fn left_interface<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<DMatrix<T>> {
    check_site(x, n)?;
    guard(x)?;
    let (_, middle, rank, data) = contract_partial(&x.cores()[..n]);
    Ok(DMatrix::from_row_slice(middle, rank, &data).transpose())
}

/// Right interface `G^{>n}`: the `Rₙ × I_{n+1}⋯I_N` unfolding of the cores
/// after site `n` (a `1 × 1` unit for the last site).
pub fn right_interface<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<DMatrix<T>> {
    check_site(x, n)?;
    guard(x)?;
    let (rank, middle, _, data) = contract_partial(&x.cores()[n + 1..]);
    Ok(DMatrix::from_row_slice(rank, middle, &data))
}

/// Frame matrix `G_{≠n} = (G^{<n})ᵀ ⊗ I_{Iₙ} ⊗ (G^{>n})ᵀ`, so that
/// `vec(x) = G_{≠n} · vec(G⁽ⁿ⁾)` with the core vectorized in its stored
/// order.
pub fn frame_matrix<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<DMatrix<T>> {
    let l = left_interface(x, n)?;
    let r = right_interface(x, n)?;
    let id = DMatrix::identity(x.core(n).mode(), x.core(n).mode());
    Ok(l.transpose().kronecker(&id).kronecker(&r.transpose()))
}

/// Two-core frame `G_{≠n,n+1} = (G^{<n})ᵀ ⊗ I_{Iₙ} ⊗ I_{I_{n+1}} ⊗ (G^{>n+1})ᵀ`,
/// so that `vec(x) = G_{≠n,n+1} · vec(supercore(x, n))`.
pub fn frame_matrix_two<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<DMatrix<T>> {
    check_site(x, n + 1)?;
    let l = left_interface(x, n)?;
    let r = right_interface(x, n + 1)?;
    let m = x.core(n).mode() * x.core(n + 1).mode();
    let id = DMatrix::identity(m, m);
    Ok(l.transpose().kronecker(&id).kronecker(&r.transpose()))
}

/// Merged supercore of sites `n, n+1` as the `R_{n−1}Iₙ × I_{n+1}R_{n+1}`
/// product of the left unfolding of core `n` and the right unfolding of
/// core `n+1`. Its row-major entries are `vec` of the merged core.
pub fn supercore<T: Scalar>(x: &TtVector<T>, n: usize) -> Result<DMatrix<T>> {
    check_site(x, n + 1)?;
    Ok(x.core(n).left_unfolding() * x.core(n + 1).right_unfolding())
}

/// Row-major entries of a matrix as a column vector.
pub fn vec_row_major<T: Scalar>(m: &DMatrix<T>) -> nalgebra::DVector<T> {
    nalgebra::DVector::from_vec(crate::tensor::row_major(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;
    use nalgebra::DVector;

    fn full(x: &TtVector<f64>) -> DVector<f64> {
        x.to_dense().to_vector()
    }

    fn core_vec(x: &TtVector<f64>, n: usize) -> DVector<f64> {
        DVector::from_column_slice(x.core(n).data())
    }

    #[test]
    fn frame_equation_every_site() {
        let mut rng = Rng::seeded(61);
        let x = TtVector::<f64>::random(&[2, 3, 2, 3], &[1, 2, 3, 2, 1], &mut rng).unwrap();
        let v = full(&x);
        for n in 0..4 {
            let g = frame_matrix(&x, n).unwrap();
            assert_eq!(g.shape(), (36, x.core(n).param_count()));
            assert!((&g * core_vec(&x, n) - &v).norm() <= 1e-12 * v.norm());
        }
        for n in 0..3 {
            let g = frame_matrix_two(&x, n).unwrap();
            let s = vec_row_major(&supercore(&x, n).unwrap());
            assert!((&g * s - &v).norm() <= 1e-12 * v.norm());
        }
    }

    #[test]
    fn single_core_frames_are_identities() {
        let x = TtVector::<f64>::rank_one(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(frame_matrix(&x, 0).unwrap(), DMatrix::identity(3, 3));
        let y = TtVector::<f64>::rank_one(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(frame_matrix_two(&y, 0).unwrap(), DMatrix::identity(4, 4));
        assert!(frame_matrix_two(&y, 1).is_err());
    }

    #[test]
    fn first_site_structure() {
        let mut rng = Rng::seeded(62);
        let x = TtVector::<f64>::random(&[3, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let r = right_interface(&x, 0).unwrap();
        let expected = DMatrix::<f64>::identity(3, 3).kronecker(&r.transpose());
        assert_eq!(frame_matrix(&x, 0).unwrap(), expected);
    }

    #[test]
    fn orthonormal_frames_in_mixed_canonical_form() {
        let mut rng = Rng::seeded(63);
        let x = TtVector::<f64>::random(&[2, 2, 3, 2], &[1, 2, 4, 2, 1], &mut rng).unwrap();
        for n in 0..4 {
            let y = x.clone().orthogonalized(n).unwrap();
            let g = frame_matrix(&y, n).unwrap();
            let gram = g.transpose() * &g;
            assert!((gram.clone() - DMatrix::identity(gram.nrows(), gram.ncols())).amax() < 1e-12);
            let l = left_interface(&y, n).unwrap();
            assert!((&l * l.transpose() - DMatrix::identity(l.nrows(), l.nrows())).amax() < 1e-12);
        }
        for n in 0..3 {
            // centre on n; the two-core frame only needs cores outside n, n+1
            let y = x.clone().orthogonalized(n).unwrap();
            let g = frame_matrix_two(&y, n).unwrap();
            let gram = g.transpose() * &g;
            assert!((gram.clone() - DMatrix::identity(gram.nrows(), gram.ncols())).amax() < 1e-12);
        }
    }

    #[test]
    fn one_and_two_core_frames_are_related() {
        let mut rng = Rng::seeded(64);
        let x = TtVector::<f64>::random(&[2, 3, 2, 2], &[1, 2, 3, 2, 1], &mut rng).unwrap();
        for n in 0..3 {
            let two = frame_matrix_two(&x, n).unwrap();
            let (a, b) = (x.core(n), x.core(n + 1));
            // G_{≠n+1} = G_{≠n,n+1} (Gₙ_left ⊗ I_{I_{n+1}R_{n+1}})
            let tail = DMatrix::<f64>::identity(b.mode() * b.right(), b.mode() * b.right());
            let rel = &two * a.left_unfolding().kronecker(&tail);
            assert!((rel - frame_matrix(&x, n + 1).unwrap()).amax() < 1e-12);
            // G_{≠n} = G_{≠n,n+1} (I_{R_{n−1}Iₙ} ⊗ G_{n+1,right}ᵀ)
            let head = DMatrix::<f64>::identity(a.left() * a.mode(), a.left() * a.mode());
            let rel = &two * head.kronecker(&b.right_unfolding().transpose());
            assert!((rel - frame_matrix(&x, n).unwrap()).amax() < 1e-12);
        }
    }

    #[test]
    fn perturbing_a_core_moves_the_vector_linearly() {
        let mut rng = Rng::seeded(65);
        let x = TtVector::<f64>::random(&[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let n = 1;
        let g = frame_matrix(&x, n).unwrap();
        let delta: Vec<f64> = rng.fill(x.core(n).param_count());
        let mut y = x.clone();
        let c = x.core(n);
        let moved: Vec<f64> = c.data().iter().zip(&delta).map(|(a, d)| a + d).collect();
        y.set_core(n, crate::tt::Core3::new(c.left(), c.mode(), c.right(), moved).unwrap())
            .unwrap();
        let diff = full(&y) - full(&x);
        assert!((diff - g * DVector::from_vec(delta)).amax() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let x = TtVector::<f64>::zeros(&[2; 17]).unwrap();
        assert!(matches!(frame_matrix(&x, 0), Err(TtError::SizeGuard { .. })));
    }
}
