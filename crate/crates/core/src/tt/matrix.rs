use nalgebra::DMatrix;

use super::core::Core4;
use super::policy::TruncationPolicy;
use super::vector::TtVector;
use crate::error::{Result, TtError};
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tensor::{BlockMatrix, DenseTensor};

/// A matrix of size `∏Iₙ × ∏Jₙ` in TT/MPO format, with cores
/// `A⁽ⁿ⁾ ∈ ℝ^{P_{n−1} × Iₙ × Jₙ × Pₙ}`.
///
/// Row index `(i1, ..., iN)` and column index `(j1, ..., jN)` are both
/// big-endian; internally the train runs over the interleaved pairs
/// `(iₙ, jₙ)` with `iₙ` slower.
#[derive(Clone, Debug, PartialEq)]
pub struct TtMatrix<T> {
    pub(crate) cores: Vec<Core4<T>>,
}

impl<T: Scalar> TtMatrix<T> {
    pub fn from_cores(cores: Vec<Core4<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(TtError::ShapeMismatch("an MPO needs at least one core".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(TtError::ShapeMismatch("boundary ranks must be 1".into()));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(TtError::ShapeMismatch(format!(
                    "bond {} joins ranks {} and {}",
                    k + 1,
                    w[0].right,
                    w[1].left
                )));
            }
        }
        Ok(Self { cores })
    }

    /// Identity with all ranks one.
    pub fn identity(modes: &[usize]) -> Result<Self> {
        Self::from_cores(
            modes
                .iter()
                .map(|&m| {
                    let mut data = vec![T::zero(); m * m];
                    for i in 0..m {
                        data[i * m + i] = T::one();
                    }
                    Core4::new(1, m, m, 1, data)
                })
                .collect::<Result<_>>()?,
        )
    }

    /// Kronecker product `A₁ ⊗ A₂ ⊗ ··· ⊗ A_N`: a rank-one MPO.
    pub fn kron(factors: &[DMatrix<T>]) -> Result<Self> {
        Self::from_cores(
            factors
                .iter()
                .map(|f| {
                    let (r, c) = f.shape();
                    Core4::new(1, r, c, 1, crate::tensor::row_major(f))
                })
                .collect::<Result<_>>()?,
        )
    }

    /// `diag(vec(d))` with the ranks of `d`.
    pub fn diagonal(d: &TtVector<T>) -> Result<Self> {
        Self::from_cores(
            d.cores()
                .iter()
                .map(|c| {
                    let mut data = vec![T::zero(); c.left * c.mode * c.mode * c.right];
                    for p in 0..c.left {
                        for i in 0..c.mode {
                            for q in 0..c.right {
                                data[((p * c.mode + i) * c.mode + i) * c.right + q] = c.get(p, i, q);
                            }
                        }
                    }
                    Core4::new(c.left, c.mode, c.mode, c.right, data)
                })
                .collect::<Result<_>>()?,
        )
    }

    pub fn random(
        row_modes: &[usize],
        col_modes: &[usize],
        ranks: &[usize],
        rng: &mut Rng,
    ) -> Result<Self> {
        if row_modes.len() != col_modes.len() {
            return Err(TtError::ShapeMismatch("row/column mode counts differ".into()));
        }
        let fused: Vec<usize> = row_modes.iter().zip(col_modes).map(|(i, j)| i * j).collect();
        let v = TtVector::random(&fused, ranks, rng)?;
        Self::from_fused(v, row_modes, col_modes)
    }

    /// MPO-SVD: reshape to order `2N`, interleave `(iₙ, jₙ)`, fuse the pairs
    /// and run TT-SVD.
    pub fn from_dense(
        m: &DMatrix<T>,
        row_modes: &[usize],
        col_modes: &[usize],
        policy: &TruncationPolicy,
    ) -> Result<Self> {
        let n = row_modes.len();
        if n == 0 || col_modes.len() != n {
            return Err(TtError::ShapeMismatch(format!(
                "row shape {row_modes:?} and column shape {col_modes:?} need equal, nonzero length"
            )));
        }
        if row_modes.iter().product::<usize>() != m.nrows()
            || col_modes.iter().product::<usize>() != m.ncols()
        {
            return Err(TtError::ShapeMismatch(format!(
                "{}×{} matrix does not factor as {row_modes:?} × {col_modes:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut shape = row_modes.to_vec();
        shape.extend_from_slice(col_modes);
        let t = DenseTensor::from_matrix(m).reshape(shape)?;
        let perm: Vec<usize> = (0..n).flat_map(|k| [k, n + k]).collect();
        let fused: Vec<usize> = row_modes.iter().zip(col_modes).map(|(i, j)| i * j).collect();
        let grouped = t.permute(&perm)?.reshape(fused)?;
        let v = TtVector::from_dense(&grouped, policy)?;
        Self::from_fused(v, row_modes, col_modes)
    }

    /// Interprets a TT over fused `(iₙ, jₙ)` modes as an MPO.
    pub fn from_fused(v: TtVector<T>, row_modes: &[usize], col_modes: &[usize]) -> Result<Self> {
        if v.order() != row_modes.len() || row_modes.len() != col_modes.len() {
            return Err(TtError::ShapeMismatch("mode counts differ".into()));
        }
        Self::from_cores(
            v.into_cores()
                .into_iter()
                .zip(row_modes.iter().zip(col_modes))
                .map(|(c, (&i, &j))| Core4::from_fused(c, i, j))
                .collect::<Result<_>>()?,
        )
    }

    /// The same train viewed as a TT vector over fused `(iₙ, jₙ)` modes.
    pub fn to_fused(&self) -> TtVector<T> {
        TtVector {
            cores: self.cores.iter().map(Core4::fused).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn row_modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.rows).collect()
    }

    pub fn col_modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.cols).collect()
    }

    pub fn nrows(&self) -> usize {
        self.cores.iter().map(|c| c.rows).product()
    }

    pub fn ncols(&self) -> usize {
        self.cores.iter().map(|c| c.cols).product()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.left).collect();
        r.push(1);
        r
    }

    pub fn cores(&self) -> &[Core4<T>] {
        &self.cores
    }

    pub fn core(&self, n: usize) -> &Core4<T> {
        &self.cores[n]
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(Core4::param_count).sum()
    }

    /// Dense `∏Iₙ × ∏Jₙ` matrix.
    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.order();
        let fused = self.to_fused().to_dense();
        let mut shape = Vec::with_capacity(2 * n);
        for c in &self.cores {
            shape.push(c.rows);
            shape.push(c.cols);
        }
        let t = fused.reshape(shape).expect("fused sizes factor");
        // (i1, j1, ..., iN, jN) -> (i1, ..., iN, j1, ..., jN)
        let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
        let p = t.permute(&perm).expect("valid permutation");
        DMatrix::from_row_slice(self.nrows(), self.ncols(), p.data())
    }

    /// Cores as `P_{n−1} × Pₙ` grids of `Iₙ × Jₙ` blocks; their strong
    /// Kronecker chain is the dense matrix.
    pub fn to_block_matrices(&self) -> Vec<BlockMatrix<T>> {
        self.cores
            .iter()
            .map(|c| {
                BlockMatrix::from_fn((c.left, c.right), |p, q| c.block(p, q))
                    .expect("core grid is positive")
            })
            .collect()
    }

    /// Swaps row and column modes in every core.
    pub fn transpose(&self) -> Self {
        Self {
            cores: self.cores.iter().map(Core4::transpose).collect(),
        }
    }

    /// Recompresses the operator as a TT over fused modes.
    pub fn round(&self, policy: &TruncationPolicy) -> Result<Self> {
        let r = self.to_fused().round(policy)?;
        Self::from_fused(r, &self.row_modes(), &self.col_modes())
    }

    pub fn cast<U: Scalar>(&self) -> TtMatrix<U> {
        TtMatrix {
            cores: self
                .cores
                .iter()
                .map(|c| Core4 {
                    left: c.left,
                    rows: c.rows,
                    cols: c.cols,
                    right: c.right,
                    data: c.data.iter().map(|x| U::of(x.as_f64())).collect(),
                })
                .collect(),
        }
    }
}
