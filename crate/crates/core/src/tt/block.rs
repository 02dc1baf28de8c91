use nalgebra::DMatrix;

use super::core::Core3;
use super::policy::TruncationPolicy;
use super::vector::{rank_bounds, TtVector};
use crate::error::{Result, TtError};
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tensor::row_major;

/// `K` tensors sharing all cores but one: the block core at position `p`
/// has shape `R_{p−1} × I_p × K × R_p`.
///
/// The block core is stored as a [`Core3`] whose mode is the fused pair
/// `(i_p, k)` with `i_p` slower, so the whole chain contracts like a
/// [`TtVector`] over modes `(I₁, ..., I_p·K, ..., I_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTt<T> {
    pub(crate) cores: Vec<Core3<T>>,
    pub(crate) pos: usize,
    pub(crate) k: usize,
}

impl<T: Scalar> BlockTt<T> {
    /// `cores[pos]` must have fused mode `I_pos·k`.
    pub fn from_parts(cores: Vec<Core3<T>>, pos: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(TtError::BlockIndex { index: 0, count: 0 });
        }
        if pos >= cores.len() {
            return Err(TtError::InvalidMode {
                mode: pos,
                order: cores.len(),
            });
        }
        if !cores[pos].mode.is_multiple_of(k) {
            return Err(TtError::ShapeMismatch(format!(
                "block core mode {} is not a multiple of K = {k}",
                cores[pos].mode
            )));
        }
        let chain = TtVector::from_cores(cores)?;
        Ok(Self {
            cores: chain.into_cores(),
            pos,
            k,
        })
    }

    /// A single TT as a block TT with `K = 1`.
    pub fn from_vector(x: TtVector<T>, pos: usize) -> Result<Self> {
        Self::from_parts(x.into_cores(), pos, 1)
    }

    /// Stacks `K` trains of equal modes with block-diagonal cores. The result
    /// represents each input exactly; bond ranks are the sums of the inputs'.
    pub fn from_vectors(xs: &[TtVector<T>], pos: usize) -> Result<Self> {
        let Some(first) = xs.first() else {
            return Err(TtError::BlockIndex { index: 0, count: 0 });
        };
        let modes = first.modes();
        if xs.iter().any(|x| x.modes() != modes) {
            return Err(TtError::ShapeMismatch(
                "stacked trains must share mode sizes".into(),
            ));
        }
        let n = modes.len();
        if pos >= n {
            return Err(TtError::InvalidMode { mode: pos, order: n });
        }
        let k = xs.len();
        let mut cores = Vec::with_capacity(n);
        for (site, &m) in modes.iter().enumerate() {
            let parts: Vec<&Core3<T>> = xs.iter().map(|x| x.core(site)).collect();
            let left: usize = if site == 0 { 1 } else { parts.iter().map(|c| c.left).sum() };
            let right: usize = if site == n - 1 { 1 } else { parts.iter().map(|c| c.right).sum() };
            let kk = if site == pos { k } else { 1 };
            let mut data = vec![T::zero(); left * m * kk * right];
            let (mut lo, mut ro) = (0, 0);
            for (col, c) in parts.iter().enumerate() {
                let kidx = if site == pos { col } else { 0 };
                for a in 0..c.left {
                    for i in 0..m {
                        for b in 0..c.right {
                            let (aa, bb) = (a + lo, b + ro);
                            data[((aa * m + i) * kk + kidx) * right + bb] = c.get(a, i, b);
                        }
                    }
                }
                if site > 0 {
                    lo += c.left;
                }
                if site < n - 1 {
                    ro += c.right;
                }
            }
            cores.push(Core3::new(left, m * kk, right, data)?);
        }
        Self::from_parts(cores, pos, k)
    }

    /// Random cores with the given bond ranks (clamped to the rank bounds of
    /// the fused modes).
    pub fn random(modes: &[usize], ranks: &[usize], k: usize, pos: usize, rng: &mut Rng) -> Result<Self> {
        if pos >= modes.len() {
            return Err(TtError::InvalidMode {
                mode: pos,
                order: modes.len(),
            });
        }
        let mut fused = modes.to_vec();
        fused[pos] *= k;
        let x = TtVector::random(&fused, ranks, rng)?;
        Self::from_parts(x.into_cores(), pos, k)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    /// Physical mode sizes (without the block index).
    pub fn modes(&self) -> Vec<usize> {
        self.cores
            .iter()
            .enumerate()
            .map(|(n, c)| if n == self.pos { c.mode / self.k } else { c.mode })
            .collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.left).collect();
        r.push(1);
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn block_count(&self) -> usize {
        self.k
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn cores(&self) -> &[Core3<T>] {
        &self.cores
    }

    pub fn core(&self, n: usize) -> &Core3<T> {
        &self.cores[n]
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(Core3::param_count).sum()
    }

    /// Replaces core `n`, keeping its shape.
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

    /// Column `k` as an ordinary TT.
    pub fn extract(&self, k: usize) -> Result<TtVector<T>> {
        if k >= self.k {
            return Err(TtError::BlockIndex {
                index: k,
                count: self.k,
            });
        }
        let mut cores = self.cores.clone();
        let c = &self.cores[self.pos];
        let m = c.mode / self.k;
        let mut data = Vec::with_capacity(c.left * m * c.right);
        for a in 0..c.left {
            for i in 0..m {
                for b in 0..c.right {
                    data.push(c.get(a, i * self.k + k, b));
                }
            }
        }
        cores[self.pos] = Core3::new(c.left, m, c.right, data)?;
        TtVector::from_cores(cores)
    }

    /// All `K` columns.
    pub fn to_vectors(&self) -> Result<Vec<TtVector<T>>> {
        (0..self.k).map(|k| self.extract(k)).collect()
    }

    /// The train over fused modes; column `k` of the block is the fused
    /// mode's trailing index.
    pub fn as_fused(&self) -> TtVector<T> {
        TtVector {
            cores: self.cores.clone(),
        }
    }

    /// Makes every core left of the block left-orthogonal and every core to
    /// its right right-orthogonal; the represented tensors do not change.
    pub fn orthogonalize(&mut self) {
        let mut x = TtVector {
            cores: std::mem::take(&mut self.cores),
        };
        for k in 0..self.pos {
            x.left_orthogonalize_core(k);
        }
        for k in (self.pos + 1..x.order()).rev() {
            x.right_orthogonalize_core(k);
        }
        self.cores = x.cores;
    }

    /// Moves the block index one site right. The block core, unfolded as
    /// `(R_{p−1}I_p) × (K·R_p)`, is split by SVD; the left factor stays
    /// as a left-orthogonal core and the rest merges into core `p + 1`.
    ///
    pub fn shift_right(&mut self, split: &BondSplit) -> Result<()> {
        let p = self.pos;
        if p + 1 >= self.order() {
            return Err(TtError::InvalidMode {
                mode: p + 1,
                order: self.order(),
            });
        }
        let c = &self.cores[p];
        let (left, m, right, kk) = (c.left, c.mode / self.k, c.right, self.k);
        let mat = DMatrix::from_row_slice(left * m, kk * right, &c.data);
        let svd = split.apply(&mat)?;
        let s = svd.rank();
        self.cores[p] = Core3::from_left_unfolding(&svd.u, left, m);
        // (s, K, r) · next(r, I', r'') → (s, I', K, r'')
        let next = &self.cores[p + 1];
        let (m2, r2) = (next.mode, next.right);
        let carry = svd.s_vt();
        let carry = DMatrix::from_row_slice(s * kk, right, &row_major(&carry));
        let prod = carry * next.right_unfolding(); // (s·K) × (I'·r'')
        let mut data = vec![T::zero(); s * m2 * kk * r2];
        for a in 0..s {
            for q in 0..kk {
                for i in 0..m2 {
                    for b in 0..r2 {
                        data[((a * m2 + i) * kk + q) * r2 + b] = prod[(a * kk + q, i * r2 + b)];
                    }
                }
            }
        }
        self.cores[p + 1] = Core3::new(s, m2 * kk, r2, data)?;
        self.pos = p + 1;
        Ok(())
    }

    /// Mirror of [`BlockTt::shift_right`]: unfolds the block core as
    /// `(R_{p−1}·K) × (I_p R_p)`, keeps the right factor as a right-orthogonal
    /// core and merges the rest into core `p − 1`.
    pub fn shift_left(&mut self, split: &BondSplit) -> Result<()> {
        let p = self.pos;
        if p == 0 {
            return Err(TtError::InvalidMode {
                mode: 0,
                order: self.order(),
            });
        }
        let c = &self.cores[p];
        let (left, m, right, kk) = (c.left, c.mode / self.k, c.right, self.k);
        let mut mat = DMatrix::zeros(left * kk, m * right);
        for a in 0..left {
            for i in 0..m {
                for q in 0..kk {
                    for b in 0..right {
                        mat[(a * kk + q, i * right + b)] = c.get(a, i * kk + q, b);
                    }
                }
            }
        }
        let svd = split.apply(&mat)?;
        let s = svd.rank();
        self.cores[p] = Core3::from_right_unfolding(&svd.vt, m, right);
        // prev(r0, I0, r) · (r, K, s) → (r0, I0, K, s)
        let prev = &self.cores[p - 1];
        let (r0, m0) = (prev.left, prev.mode);
        let carry = svd.u_s(); // (r·K) × s
        let carry = DMatrix::from_row_slice(left, kk * s, &row_major(&carry));
        let prod = prev.left_unfolding() * carry; // (r0·I0) × (K·s)
        let data = row_major(&prod);
        self.cores[p - 1] = Core3::new(r0, m0 * kk, s, data)?;
        self.pos = p - 1;
        Ok(())
    }

    /// Moves the block to `target` one site at a time.
    pub fn move_to(&mut self, target: usize, split: &BondSplit) -> Result<()> {
        if target >= self.order() {
            return Err(TtError::InvalidMode {
                mode: target,
                order: self.order(),
            });
        }
        while self.pos < target {
            self.shift_right(split)?;
        }
        while self.pos > target {
            self.shift_left(split)?;
        }
        Ok(())
    }

    /// Dimension of the local space at site `n`, or of the merged sites
    /// `n, n + 1` when `two` is set (block index excluded).
    pub fn local_dim(&self, n: usize, two: bool) -> usize {
        let modes = self.modes();
        if two {
            self.cores[n].left * modes[n] * modes[n + 1] * self.cores[n + 1].right
        } else {
            self.cores[n].left * modes[n] * self.cores[n].right
        }
    }

    /// The block core as a `(R_{p−1}I_pR_p) × K` matrix with rows ordered
    /// `(a, i, b)`: column `k` is the core of the `k`-th tensor.
    pub fn local_matrix(&self) -> DMatrix<T> {
        let c = &self.cores[self.pos];
        let (left, m, right, kk) = (c.left, c.mode / self.k, c.right, self.k);
        DMatrix::from_fn(left * m * right, kk, |row, k| {
            let (a, rest) = (row / (m * right), row % (m * right));
            let (i, b) = (rest / right, rest % right);
            c.data[((a * m + i) * kk + k) * right + b]
        })
    }

    /// Inverse of [`BlockTt::local_matrix`].
    pub fn set_local_matrix(&mut self, w: &DMatrix<T>) -> Result<()> {
        let c = &self.cores[self.pos];
        let (left, m, right, kk) = (c.left, c.mode / self.k, c.right, self.k);
        if w.shape() != (left * m * right, kk) {
            return Err(TtError::ShapeMismatch(format!(
                "local matrix {:?} for a block core {left}×{m}×{kk}×{right}",
                w.shape()
            )));
        }
        let mut data = vec![T::zero(); left * m * kk * right];
        for a in 0..left {
            for i in 0..m {
                for b in 0..right {
                    let row = (a * m + i) * right + b;
                    for k in 0..kk {
                        data[((a * m + i) * kk + k) * right + b] = w[(row, k)];
                    }
                }
            }
        }
        self.cores[self.pos] = Core3::new(left, m * kk, right, data)?;
        Ok(())
    }

    /// Orthonormalizes the columns of the block core by QR. With
    /// orthogonal cores around the block this makes the `K` tensors
    /// orthonormal.
    pub fn orthonormalize_block(&mut self) -> Result<()> {
        let w = self.local_matrix();
        if w.nrows() < self.k {
            return Err(TtError::TooManyVectors {
                requested: self.k,
                available: w.nrows(),
                site: self.pos,
            });
        }
        let (q, _) = linalg::qr(&w);
        self.set_local_matrix(&q)
    }

    /// Replaces sites `n, n + 1` from a merged local matrix with rows
    /// `(a, i₁, i₂, b)` and `K` columns. The merged tensor is split by
    /// SVD; the block index ends on site `n + 1` when `block_right` is set
    /// (site `n` left-orthogonal) and on site `n` otherwise (site `n + 1`
    /// right-orthogonal).
    pub fn set_pair(
        &mut self,
        n: usize,
        w: &DMatrix<T>,
        block_right: bool,
        split: &BondSplit,
    ) -> Result<()> {
        if n + 1 >= self.order() || (self.pos != n && self.pos != n + 1) {
            return Err(TtError::InvalidMode {
                mode: n,
                order: self.order(),
            });
        }
        let modes = self.modes();
        let (left, m1, m2, right, kk) = (
            self.cores[n].left,
            modes[n],
            modes[n + 1],
            self.cores[n + 1].right,
            self.k,
        );
        if w.shape() != (left * m1 * m2 * right, kk) {
            return Err(TtError::ShapeMismatch(format!(
                "merged local matrix {:?} for sites {n}, {}",
                w.shape(),
                n + 1
            )));
        }
        let at = |a: usize, x: usize, y: usize, b: usize, k: usize| w[(((a * m1 + x) * m2 + y) * right + b, k)];
        if block_right {
            // rows (a, i₁), columns (i₂, k, b)
            let mat = DMatrix::from_fn(left * m1, m2 * kk * right, |r, c| {
                let (a, x) = (r / m1, r % m1);
                let (y, rest) = (c / (kk * right), c % (kk * right));
                let (k, b) = (rest / right, rest % right);
                at(a, x, y, b, k)
            });
            let svd = split.apply(&mat)?;
            let s = svd.rank();
            self.cores[n] = Core3::from_left_unfolding(&svd.u, left, m1);
            self.cores[n + 1] = Core3::new(s, m2 * kk, right, row_major(&svd.s_vt()))?;
            self.pos = n + 1;
        } else {
            // rows (a, i₁, k), columns (i₂, b)
            let mat = DMatrix::from_fn(left * m1 * kk, m2 * right, |r, c| {
                let (a, rest) = (r / (m1 * kk), r % (m1 * kk));
                let (x, k) = (rest / kk, rest % kk);
                let (y, b) = (c / right, c % right);
                at(a, x, y, b, k)
            });
            let svd = split.apply(&mat)?;
            let s = svd.rank();
            self.cores[n + 1] = Core3::from_right_unfolding(&svd.vt, m2, right);
            self.cores[n] = Core3::new(left, m1 * kk, s, row_major(&svd.u_s()))?;
            self.pos = n;
        }
        Ok(())
    }

    /// Merged local matrix of sites `n, n + 1` (block at either), rows
    /// `(a, i₁, i₂, b)` and `K` columns.
    pub fn pair_matrix(&self, n: usize) -> Result<DMatrix<T>> {
        if n + 1 >= self.order() || (self.pos != n && self.pos != n + 1) {
            return Err(TtError::InvalidMode {
                mode: n,
                order: self.order(),
            });
        }
        let modes = self.modes();
        let (c0, c1) = (&self.cores[n], &self.cores[n + 1]);
        let (left, m1, m2, right, kk) = (c0.left, modes[n], modes[n + 1], c1.right, self.k);
        let prod = c0.left_unfolding() * c1.right_unfolding();
        // prod rows (a, fused mode of n), columns (fused mode of n+1, b)
        let block_first = self.pos == n;
        Ok(DMatrix::from_fn(left * m1 * m2 * right, kk, |r, k| {
            let (a, rest) = (r / (m1 * m2 * right), r % (m1 * m2 * right));
            let (x, rest) = (rest / (m2 * right), rest % (m2 * right));
            let (y, b) = (rest / right, rest % right);
            if block_first {
                prod[(a * m1 * kk + x * kk + k, y * right + b)]
            } else {
                prod[(a * m1 + x, (y * kk + k) * right + b)]
            }
        }))
    }

    /// Rank profile bound for the physical modes with the block fused at
    /// the current position.
    pub fn rank_bounds(&self) -> Vec<usize> {
        let fused: Vec<usize> = self.cores.iter().map(|c| c.mode).collect();
        rank_bounds(&fused, None)
    }
}

/// How the bond is re-formed when the block index moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BondSplit {
    /// Keep every singular value; the tensors are reproduced exactly.
    Lossless,
    /// Keep exactly this many singular values (fewer if the unfolding is
    /// smaller), zeros included.
    Fixed(usize),
    /// Drop a tail of norm at most `ε` times the unfolding's norm, subject
    /// to the policy's rank cap.
    Truncate(TruncationPolicy),
}

impl BondSplit {
    pub(crate) fn apply<T: Scalar>(&self, m: &DMatrix<T>) -> Result<linalg::Svd<T>> {
        match self {
            BondSplit::Lossless => linalg::fixed_rank_svd(m, m.nrows().min(m.ncols())),
            BondSplit::Fixed(r) => linalg::fixed_rank_svd(m, *r),
            BondSplit::Truncate(p) => {
                let delta = T::of(p.rel_tol()) * m.norm();
                linalg::truncated_svd(m, delta, p.max_rank())
            }
        }
    }
}
