use nalgebra::DMatrix;

use super::core::Core3;
use super::policy::TruncationPolicy;
use crate::error::{Result, TtError};
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tensor::{row_major, BlockMatrix, DenseTensor};

/// A vector or tensor in TT/MPS format: a chain of order-3 cores
/// `G⁽ⁿ⁾ ∈ ℝ^{R_{n−1} × Iₙ × Rₙ}` with `R₀ = R_N = 1`, so that
///
/// ```text
/// x[i1, ..., iN] = G⁽¹⁾(i1) · G⁽²⁾(i2) ··· G⁽ᴺ⁾(iN)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct TtVector<T> {
    pub(crate) cores: Vec<Core3<T>>,
}

/// Largest useful bond ranks for the given modes, optionally capped.
pub fn rank_bounds(modes: &[usize], cap: Option<usize>) -> Vec<usize> {
    let n = modes.len();
    let mut ranks = vec![1; n + 1];
    for k in 1..n {
        let left = modes[..k].iter().fold(1usize, |a, &m| a.saturating_mul(m));
        let right = modes[k..].iter().fold(1usize, |a, &m| a.saturating_mul(m));
        ranks[k] = left.min(right).min(cap.unwrap_or(usize::MAX));
    }
    ranks
}

impl<T: Scalar> TtVector<T> {
    pub fn from_cores(cores: Vec<Core3<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(TtError::ShapeMismatch("a TT needs at least one core".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(TtError::ShapeMismatch(
                "boundary ranks must be 1".into(),
            ));
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

    /// All-ranks-one train with zero cores.
    pub fn zeros(modes: &[usize]) -> Result<Self> {
        Self::from_cores(modes.iter().map(|&m| Core3::zeros(1, m, 1)).collect())
    }

    /// Rank-one train `v₁ ∘ v₂ ∘ ··· ∘ v_N`.
    pub fn rank_one(factors: &[Vec<T>]) -> Result<Self> {
        Self::from_cores(
            factors
                .iter()
                .map(|f| Core3::new(1, f.len(), 1, f.clone()))
                .collect::<Result<_>>()?,
        )
    }

    /// Random cores with the given bond ranks (clamped to the rank bounds).
    pub fn random(modes: &[usize], ranks: &[usize], rng: &mut Rng) -> Result<Self> {
        if ranks.len() != modes.len() + 1 {
            return Err(TtError::ShapeMismatch(format!(
                "{} ranks for {} modes",
                ranks.len(),
                modes.len()
            )));
        }
        let bounds = rank_bounds(modes, None);
        let ranks: Vec<usize> = ranks
            .iter()
            .zip(&bounds)
            .map(|(&r, &b)| r.clamp(1, b))
            .collect();
        Self::from_cores(
            modes
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    Core3::new(ranks[k], m, ranks[k + 1], rng.fill(ranks[k] * m * ranks[k + 1]))
                })
                .collect::<Result<_>>()?,
        )
    }

    /// TT-SVD: left-to-right sequence of truncated SVDs of the unfoldings.
    /// The error satisfies `‖T − full(x)‖_F ≤ ε‖T‖_F` and every core except
    /// the last is left-orthogonal.
    pub fn from_dense(t: &DenseTensor<T>, policy: &TruncationPolicy) -> Result<Self> {
        if t.order() == 0 {
            return Err(TtError::ShapeMismatch(
                "an order-0 tensor has no TT representation".into(),
            ));
        }
        let modes = t.shape().to_vec();
        let n = modes.len();
        let norm = t.norm();
        if norm == T::zero() {
            return Self::zeros(&modes);
        }
        let delta = T::of(policy.bond_delta(norm.as_f64(), n - 1));
        let mut cores = Vec::with_capacity(n);
        let mut rest: Vec<T> = t.data().to_vec();
        let mut r_prev = 1;
        for &m in &modes[..n - 1] {
            let rows = r_prev * m;
            let cols = rest.len() / rows;
            let mat = DMatrix::from_row_slice(rows, cols, &rest);
            let svd = linalg::truncated_svd(&mat, delta, policy.max_rank())?;
            cores.push(Core3::from_left_unfolding(&svd.u, r_prev, m));
            rest = row_major(&svd.s_vt());
            r_prev = svd.rank();
        }
        cores.push(Core3::new(r_prev, modes[n - 1], 1, rest)?);
        Self::from_cores(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode).collect()
    }

    /// `(R₀, R₁, ..., R_N)`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.left).collect();
        r.push(1);
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[Core3<T>] {
        &self.cores
    }

    pub fn core(&self, n: usize) -> &Core3<T> {
        &self.cores[n]
    }

    /// Replaces core `n`; its ranks must match the neighbours.
    pub fn set_core(&mut self, n: usize, core: Core3<T>) -> Result<()> {
        let old = &self.cores[n];
        if core.left != old.left || core.right != old.right || core.mode != old.mode {
            return Err(TtError::ShapeMismatch(format!(
                "core {n} must keep shape {}×{}×{}",
                old.left, old.mode, old.right
            )));
        }
        self.cores[n] = core;
        Ok(())
    }

    pub fn into_cores(self) -> Vec<Core3<T>> {
        self.cores
    }

    /// Number of stored entries `Σ R_{n−1}IₙRₙ`.
    pub fn param_count(&self) -> usize {
        self.cores.iter().map(Core3::param_count).sum()
    }

    /// Number of entries of the represented tensor.
    pub fn full_len(&self) -> usize {
        self.cores.iter().map(|c| c.mode).product()
    }

    /// One entry as a product of slice matrices.
    pub fn entry(&self, index: &[usize]) -> Result<T> {
        let modes = self.modes();
        if index.len() != modes.len() || index.iter().zip(&modes).any(|(i, m)| i >= m) {
            return Err(TtError::IndexOutOfBounds {
                index: index.to_vec(),
                shape: modes,
            });
        }
        let mut row = vec![T::one()];
        for (core, &i) in self.cores.iter().zip(index) {
            let mut next = vec![T::zero(); core.right];
            for (a, &w) in row.iter().enumerate() {
                for (b, slot) in next.iter_mut().enumerate() {
                    *slot += w * core.get(a, i, b);
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// Contracts the whole chain into a dense tensor.
    pub fn to_dense(&self) -> DenseTensor<T> {
        let mut acc: Vec<T> = vec![T::one()];
        let mut outer = 1;
        let mut rank = 1;
        for core in &self.cores {
            let lhs = DMatrix::from_row_slice(outer, rank, &acc);
            let prod = lhs * core.right_unfolding();
            acc = row_major(&prod);
            outer *= core.mode;
            rank = core.right;
        }
        DenseTensor::new(self.modes(), acc).expect("modes match contraction")
    }

    /// Cores as block matrices `G̃⁽ⁿ⁾`: an `R_{n−1} × Rₙ` grid of `Iₙ × 1`
    /// fibers. Their strong Kronecker chain is `vec(x)`.
    pub fn to_block_matrices(&self) -> Vec<BlockMatrix<T>> {
        self.cores
            .iter()
            .map(|c| {
                BlockMatrix::from_fn((c.left, c.right), |a, b| {
                    DMatrix::from_fn(c.mode, 1, |i, _| c.get(a, i, b))
                })
                .expect("core grid is positive")
            })
            .collect()
    }

    /// Moves the orthogonality center to core `n`: cores left of `n` become
    /// left-orthogonal, cores right of `n` right-orthogonal.
    pub fn orthogonalize(&mut self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(TtError::InvalidMode {
                mode: n,
                order: self.order(),
            });
        }
        for k in 0..n {
            self.left_orthogonalize_core(k);
        }
        for k in (n + 1..self.order()).rev() {
            self.right_orthogonalize_core(k);
        }
        Ok(())
    }

    /// Consuming variant of [`TtVector::orthogonalize`].
    pub fn orthogonalized(mut self, n: usize) -> Result<Self> {
        self.orthogonalize(n)?;
        Ok(self)
    }

    /// QR of core `k`'s left unfolding; `R` moves into core `k + 1`.
    pub(crate) fn left_orthogonalize_core(&mut self, k: usize) {
        let core = &self.cores[k];
        let (q, r) = linalg::qr(&core.left_unfolding());
        let (left, mode) = (core.left, core.mode);
        self.cores[k] = Core3::from_left_unfolding(&q, left, mode);
        let next = &self.cores[k + 1];
        let merged = r * next.right_unfolding();
        let (mode, right) = (next.mode, next.right);
        self.cores[k + 1] = Core3::from_right_unfolding(&merged, mode, right);
    }

    /// LQ of core `k`'s right unfolding; `L` moves into core `k − 1`.
    pub(crate) fn right_orthogonalize_core(&mut self, k: usize) {
        let core = &self.cores[k];
        let (q, r) = linalg::qr(&core.right_unfolding().transpose());
        let (mode, right) = (core.mode, core.right);
        self.cores[k] = Core3::from_right_unfolding(&q.transpose(), mode, right);
        let prev = &self.cores[k - 1];
        let merged = prev.left_unfolding() * r.transpose();
        let (left, mode) = (prev.left, prev.mode);
        self.cores[k - 1] = Core3::from_left_unfolding(&merged, left, mode);
    }

    /// Maximum entry of `G_(3) G_(3)ᵀ − I` over cores `< n` and of
    /// `G_(1) G_(1)ᵀ − I` over cores `> n`.
    pub fn orthogonality_residual(&self, n: usize) -> T {
        let mut worst = T::zero();
        for (k, core) in self.cores.iter().enumerate() {
            let gram = if k < n {
                let u = core.left_unfolding();
                u.transpose() * u
            } else if k > n {
                let u = core.right_unfolding();
                &u * u.transpose()
            } else {
                continue;
            };
            let id = DMatrix::identity(gram.nrows(), gram.ncols());
            worst = worst.max((gram - id).amax());
        }
        worst
    }

    /// Recompresses to the smallest ranks meeting `‖x − x̃‖ ≤ ε‖x‖`: a
    /// right-to-left orthogonalization followed by a left-to-right sweep of
    /// truncated SVDs. The result is left-orthogonal up to the last core.
    pub fn round(&self, policy: &TruncationPolicy) -> Result<Self> {
        let n = self.order();
        let mut x = self.clone();
        for k in (1..n).rev() {
            x.right_orthogonalize_core(k);
        }
        let norm = x.cores[0].norm();
        if norm == T::zero() {
            return Self::zeros(&self.modes());
        }
        let delta = T::of(policy.bond_delta(norm.as_f64(), n - 1));
        for k in 0..n - 1 {
            let core = &x.cores[k];
            let svd = linalg::truncated_svd(&core.left_unfolding(), delta, policy.max_rank())?;
            let (left, mode) = (core.left, core.mode);
            x.cores[k] = Core3::from_left_unfolding(&svd.u, left, mode);
            let next = &x.cores[k + 1];
            let merged = svd.s_vt() * next.right_unfolding();
            let (mode, right) = (next.mode, next.right);
            x.cores[k + 1] = Core3::from_right_unfolding(&merged, mode, right);
        }
        Ok(x)
    }

    pub(crate) fn cores_mut(&mut self) -> &mut [Core3<T>] {
        &mut self.cores
    }

    /// Converts the entries to another scalar type.
    pub fn cast<U: Scalar>(&self) -> TtVector<U> {
        TtVector {
            cores: self
                .cores
                .iter()
                .map(|c| Core3 {
                    left: c.left,
                    mode: c.mode,
                    right: c.right,
                    data: c.data.iter().map(|x| U::of(x.as_f64())).collect(),
                })
                .collect(),
        }
    }
}

/// Dense contraction of a partial train with open boundary ranks: returns
/// the `left_rank × ∏modes × right_rank` array, row-major.
pub(crate) fn contract_partial<T: Scalar>(cores: &[Core3<T>]) -> (usize, usize, usize, Vec<T>) {
    let Some(first) = cores.first() else {
        return (1, 1, 1, vec![T::one()]);
    };
    let left = first.left;
    let mut acc = first.data.clone();
    let mut middle = first.mode;
    let mut rank = first.right;
    for core in &cores[1..] {
        let lhs = DMatrix::from_row_slice(left * middle, rank, &acc);
        acc = row_major(&(lhs * core.right_unfolding()));
        middle *= core.mode;
        rank = core.right;
    }
    (left, middle, rank, acc)
}
