//! Cached partial contractions of a sandwich `⟨bra| A |ket⟩`.
//!
//! `left(k)` contracts sites `< k` into a `R_bra × P × R_ket` block and
//! `right(k)` contracts sites `≥ k`. Both ends are kept; a validity cursor
//! records which blocks still agree with the current cores, and reading a
//! stale block is an error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tensor::row_major;
use crate::tt::{Core3, Core4, TtMatrix};

/// Default cap on the dimension of a dense local problem.
pub const DEFAULT_LOCAL_CAP: usize = 4096;

/// Order-3 environment block, stored `bra` slowest, `ket` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Env<T> {
    bra: usize,
    op: usize,
    ket: usize,
    data: Vec<T>,
}

impl<T: Scalar> Env<T> {
    fn unit() -> Self {
        Self {
            bra: 1,
            op: 1,
            ket: 1,
            data: vec![T::one()],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.bra, self.op, self.ket)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, b: usize, p: usize, k: usize) -> T {
        self.data[(b * self.op + p) * self.ket + k]
    }
}

/// Identity MPO cores for the given modes.
fn identity_cores<T: Scalar>(modes: &[usize]) -> Vec<Core4<T>> {
    TtMatrix::identity(modes)
        .expect("modes are positive")
        .cores()
        .to_vec()
}

/// Contracts `L` with site cores into the next left block.
pub fn contract_left<T: Scalar>(l: &Env<T>, bra: &Core3<T>, a: &Core4<T>, ket: &Core3<T>) -> Env<T> {
    let (nb, np, nk) = (bra.right(), a.right(), ket.right());
    let (mi, mj) = (a.rows(), a.cols());
    // T1[b, p, j, k'] = Σ_k L[b, p, k] ket[k, j, k']
    let lm = DMatrix::from_row_slice(l.bra * l.op, l.ket, &l.data);
    let t1 = row_major(&(lm * ket.right_unfolding()));
    let t1_at = |b: usize, p: usize, j: usize, k: usize| t1[((b * l.op + p) * mj + j) * nk + k];
    // T2[b, i, p', k'] = Σ_{p, j} T1[b, p, j, k'] A[p, i, j, p']
    let mut t2 = vec![T::zero(); l.bra * mi * np * nk];
    for b in 0..l.bra {
        for p in 0..l.op {
            for i in 0..mi {
                for j in 0..mj {
                    for pp in 0..np {
                        let w = a.get(p, i, j, pp);
                        if w == T::zero() {
                            continue;
                        }
                        let base = ((b * mi + i) * np + pp) * nk;
                        for k in 0..nk {
                            t2[base + k] += w * t1_at(b, p, j, k);
                        }
                    }
                }
            }
        }
    }
    // L'[b', p', k'] = Σ_{b, i} bra[b, i, b'] T2[b, i, p', k']
    let t2m = DMatrix::from_row_slice(l.bra * mi, np * nk, &t2);
    let out = bra.left_unfolding().transpose() * t2m;
    Env {
        bra: nb,
        op: np,
        ket: nk,
        data: row_major(&out),
    }
}

/// Contracts site cores with `R` into the previous right block.
pub fn contract_right<T: Scalar>(bra: &Core3<T>, a: &Core4<T>, ket: &Core3<T>, r: &Env<T>) -> Env<T> {
    let (nb, np, nk) = (bra.left(), a.left(), ket.left());
    let (mi, mj) = (a.rows(), a.cols());
    // T1[k, j, b', p'] = Σ_{k'} ket[k, j, k'] R[b', p', k']
    let rm = DMatrix::from_row_slice(r.bra * r.op, r.ket, &r.data);
    let t1 = row_major(&(ket.left_unfolding() * rm.transpose()));
    let t1_at = |k: usize, j: usize, b: usize, p: usize| t1[((k * mj + j) * r.bra + b) * r.op + p];
    // T2[b', i, p, k] = Σ_{j, p'} A[p, i, j, p'] T1[k, j, b', p']
    let mut t2 = vec![T::zero(); r.bra * mi * np * nk];
    for p in 0..np {
        for i in 0..mi {
            for j in 0..mj {
                for pp in 0..r.op {
                    let w = a.get(p, i, j, pp);
                    if w == T::zero() {
                        continue;
                    }
                    for b in 0..r.bra {
                        let base = ((b * mi + i) * np + p) * nk;
                        for k in 0..nk {
                            t2[base + k] += w * t1_at(k, j, b, pp);
                        }
                    }
                }
            }
        }
    }
    // R'[b, p, k] = Σ_{i, b'} bra[b, i, b'] T2[b', i, p, k]; reorder T2 to (i, b')
    let mut t2r = vec![T::zero(); mi * r.bra * np * nk];
    for b in 0..r.bra {
        for i in 0..mi {
            let src = (b * mi + i) * np * nk;
            let dst = (i * r.bra + b) * np * nk;
            t2r[dst..dst + np * nk].copy_from_slice(&t2[src..src + np * nk]);
        }
    }
    let t2m = DMatrix::from_row_slice(mi * r.bra, np * nk, &t2r);
    let out = bra.right_unfolding() * t2m;
    Env {
        bra: nb,
        op: np,
        ket: nk,
        data: row_major(&out),
    }
}

/// Dense local operator `Σ_{p,p'} L[b,p,k] A[p,i,j,p'] R[b',p',k']` with
/// rows `(b, i, b')` and columns `(k, j, k')`.
pub fn local_operator<T: Scalar>(l: &Env<T>, a: &Core4<T>, r: &Env<T>) -> DMatrix<T> {
    let (mi, mj) = (a.rows(), a.cols());
    let rows = l.bra * mi * r.bra;
    let cols = l.ket * mj * r.ket;
    // M[b, k, i, j, p'] = Σ_p L[b, p, k] A[p, i, j, p']
    let np = a.right();
    let mut m = vec![T::zero(); l.bra * l.ket * mi * mj * np];
    for b in 0..l.bra {
        for p in 0..l.op {
            for k in 0..l.ket {
                let w = l.get(b, p, k);
                if w == T::zero() {
                    continue;
                }
                let base = (b * l.ket + k) * mi * mj * np;
                for (off, slot) in m[base..base + mi * mj * np].iter_mut().enumerate() {
                    let (i, rest) = (off / (mj * np), off % (mj * np));
                    let (j, pp) = (rest / np, rest % np);
                    *slot += w * a.get(p, i, j, pp);
                }
            }
        }
    }
    let mut out = DMatrix::zeros(rows, cols);
    for b in 0..l.bra {
        for k in 0..l.ket {
            for i in 0..mi {
                for j in 0..mj {
                    let base = (((b * l.ket + k) * mi + i) * mj + j) * np;
                    for pp in 0..np {
                        let w = m[base + pp];
                        if w == T::zero() {
                            continue;
                        }
                        for b2 in 0..r.bra {
                            let row = (b * mi + i) * r.bra + b2;
                            for k2 in 0..r.ket {
                                out[(row, (k * mj + j) * r.ket + k2)] += w * r.get(b2, pp, k2);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Applies the local operator to a ket core without forming it:
/// returns the bra-shaped vector `(b, i, b')`.
pub fn local_apply<T: Scalar>(l: &Env<T>, a: &Core4<T>, r: &Env<T>, ket: &Core3<T>) -> DVector<T> {
    let (mi, mj) = (a.rows(), a.cols());
    // T1[b, p, j, k'] = Σ_k L[b, p, k] ket[k, j, k']
    let lm = DMatrix::from_row_slice(l.bra * l.op, l.ket, &l.data);
    let t1 = row_major(&(lm * ket.right_unfolding()));
    let nk = ket.right();
    let np = a.right();
    // T2[b, i, p', k'] = Σ_{p, j} T1[b, p, j, k'] A[p, i, j, p']
    let mut t2 = vec![T::zero(); l.bra * mi * np * nk];
    for b in 0..l.bra {
        for p in 0..l.op {
            for i in 0..mi {
                for j in 0..mj {
                    for pp in 0..np {
                        let w = a.get(p, i, j, pp);
                        if w == T::zero() {
                            continue;
                        }
                        let base = ((b * mi + i) * np + pp) * nk;
                        let src = ((b * l.op + p) * mj + j) * nk;
                        for k in 0..nk {
                            t2[base + k] += w * t1[src + k];
                        }
                    }
                }
            }
        }
    }
    // out[b, i, b'] = Σ_{p', k'} T2[b, i, p', k'] R[b', p', k']
    let t2m = DMatrix::from_row_slice(l.bra * mi, np * nk, &t2);
    let rm = DMatrix::from_row_slice(r.bra, r.op * r.ket, &r.data);
    let out = t2m * rm.transpose();
    DVector::from_vec(row_major(&out))
}

/// Fuses two neighbouring MPO cores into one with row mode `(i₁, i₂)` and
/// column mode `(j₁, j₂)`.
pub fn merge_operator_cores<T: Scalar>(a: &Core4<T>, b: &Core4<T>) -> Core4<T> {
    let (p0, i1, j1, p1) = (a.left(), a.rows(), a.cols(), a.right());
    let (i2, j2, p2) = (b.rows(), b.cols(), b.right());
    let mut data = vec![T::zero(); p0 * i1 * i2 * j1 * j2 * p2];
    for p in 0..p0 {
        for x in 0..i1 {
            for y in 0..j1 {
                for q in 0..p1 {
                    let w = a.get(p, x, y, q);
                    if w == T::zero() {
                        continue;
                    }
                    for u in 0..i2 {
                        for v in 0..j2 {
                            for s in 0..p2 {
                                let row = x * i2 + u;
                                let col = y * j2 + v;
                                data[((p * i1 * i2 + row) * j1 * j2 + col) * p2 + s] += w * b.get(q, u, v, s);
                            }
                        }
                    }
                }
            }
        }
    }
    Core4::new(p0, i1 * i2, j1 * j2, p2, data).expect("merged sizes are positive")
}

/// Cached environments for one sandwich.
#[derive(Clone, Debug)]
pub struct EnvStack<T> {
    op: Vec<Core4<T>>,
    left: Vec<Env<T>>,
    right: Vec<Env<T>>,
    /// `left[0..=left_valid]` agree with the cores.
    left_valid: usize,
    /// `right[right_valid..=N]` agree with the cores.
    right_valid: usize,
    local_cap: usize,
}

impl<T: Scalar> EnvStack<T> {
    /// Builds the stack for `⟨bra| A |ket⟩` (`A = I` when `op` is `None`):
    /// `left(0)` and the right blocks from site 1 on are valid afterwards;
    /// site 0 may hold a block core and is left out.
    pub fn build(bra: &[Core3<T>], op: Option<&TtMatrix<T>>, ket: &[Core3<T>]) -> Result<Self> {
        let n = bra.len();
        if ket.len() != n || n == 0 {
            return Err(TtError::ShapeMismatch(format!(
                "bra has {} cores, ket has {}",
                n,
                ket.len()
            )));
        }
        let op = match op {
            Some(a) => {
                if a.order() != n {
                    return Err(TtError::ShapeMismatch(format!(
                        "operator has {} cores, vectors have {n}",
                        a.order()
                    )));
                }
                a.cores().to_vec()
            }
            None => identity_cores(&ket.iter().map(Core3::mode).collect::<Vec<_>>()),
        };
        let mut stack = Self {
            op,
            left: vec![Env::unit(); n + 1],
            right: vec![Env::unit(); n + 1],
            left_valid: 0,
            right_valid: n,
            local_cap: DEFAULT_LOCAL_CAP,
        };
        for k in (1..n).rev() {
            stack.update_right(k, bra, ket)?;
        }
        Ok(stack)
    }

    pub fn with_local_cap(mut self, cap: usize) -> Self {
        self.local_cap = cap;
        self
    }

    pub fn local_cap(&self) -> usize {
        self.local_cap
    }

    pub fn order(&self) -> usize {
        self.op.len()
    }

    fn check_site_shapes(&self, k: usize, bra: &[Core3<T>], ket: &[Core3<T>]) -> Result<()> {
        let a = &self.op[k];
        if bra[k].mode() != a.rows() || ket[k].mode() != a.cols() {
            return Err(TtError::ShapeMismatch(format!(
                "site {k}: bra mode {}, ket mode {} against operator {}×{}",
                bra[k].mode(),
                ket[k].mode(),
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }

    /// Recomputes `left(k + 1)` from `left(k)` and site `k`.
    pub fn update_left(&mut self, k: usize, bra: &[Core3<T>], ket: &[Core3<T>]) -> Result<()> {
        self.check_site_shapes(k, bra, ket)?;
        let l = self.left(k)?;
        let next = contract_left(l, &bra[k], &self.op[k], &ket[k]);
        self.left[k + 1] = next;
        self.left_valid = k + 1;
        Ok(())
    }

    /// Recomputes `right(k)` from `right(k + 1)` and site `k`.
    pub fn update_right(&mut self, k: usize, bra: &[Core3<T>], ket: &[Core3<T>]) -> Result<()> {
        self.check_site_shapes(k, bra, ket)?;
        let r = self.right(k + 1)?;
        let prev = contract_right(&bra[k], &self.op[k], &ket[k], r);
        self.right[k] = prev;
        self.right_valid = k;
        Ok(())
    }

    /// Marks every block that includes site `k` as stale.
    pub fn invalidate(&mut self, k: usize) {
        self.left_valid = self.left_valid.min(k);
        self.right_valid = self.right_valid.max(k + 1);
    }

    /// Contraction of sites `< k`.
    pub fn left(&self, k: usize) -> Result<&Env<T>> {
        if k > self.left_valid {
            return Err(TtError::StaleEnvironment { site: k });
        }
        Ok(&self.left[k])
    }

    /// Contraction of sites `≥ k`.
    pub fn right(&self, k: usize) -> Result<&Env<T>> {
        if k < self.right_valid || k > self.order() {
            return Err(TtError::StaleEnvironment { site: k });
        }
        Ok(&self.right[k])
    }

    fn cap_check(&self, site: usize, size: usize) -> Result<()> {
        if size > self.local_cap {
            return Err(TtError::LocalSizeCap {
                site,
                size,
                cap: self.local_cap,
            });
        }
        Ok(())
    }

    /// The full sandwich from the blocks meeting at `k`.
    pub fn sandwich(&self, k: usize) -> Result<T> {
        let (l, r) = (self.left(k)?, self.right(k)?);
        Ok(l.data.iter().zip(&r.data).fold(T::zero(), |acc, (a, b)| acc + *a * *b))
    }

    /// Dense one-site operator at site `n`.
    pub fn effective_operator(&self, n: usize) -> Result<DMatrix<T>> {
        let (l, r) = (self.left(n)?, self.right(n + 1)?);
        let a = &self.op[n];
        self.cap_check(n, (l.bra * a.rows() * r.bra).max(l.ket * a.cols() * r.ket))?;
        Ok(local_operator(l, a, r))
    }

    /// Dense two-site operator on the merged space of sites `n, n + 1`.
    pub fn effective_operator_two(&self, n: usize) -> Result<DMatrix<T>> {
        let (l, r) = (self.left(n)?, self.right(n + 2)?);
        let a = merge_operator_cores(&self.op[n], &self.op[n + 1]);
        self.cap_check(n, (l.bra * a.rows() * r.bra).max(l.ket * a.cols() * r.ket))?;
        Ok(local_operator(l, &a, r))
    }

    /// Local operator applied to `ket_core` (one site at `n`).
    pub fn apply(&self, n: usize, ket_core: &Core3<T>) -> Result<DVector<T>> {
        let (l, r) = (self.left(n)?, self.right(n + 1)?);
        Ok(local_apply(l, &self.op[n], r, ket_core))
    }

    /// Local operator applied to a merged ket supercore of sites `n, n + 1`.
    pub fn apply_two(&self, n: usize, ket_super: &Core3<T>) -> Result<DVector<T>> {
        let (l, r) = (self.left(n)?, self.right(n + 2)?);
        let a = merge_operator_cores(&self.op[n], &self.op[n + 1]);
        Ok(local_apply(l, &a, r, ket_super))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{mpo_transpose, tt_inner};
    use crate::frames::frame_matrix;
    use crate::random::Rng;
    use crate::tt::TtVector;

    fn setup(seed: u64) -> (TtVector<f64>, TtMatrix<f64>, TtVector<f64>) {
        let mut rng = Rng::seeded(seed);
        let x = TtVector::random(&[2, 3, 2, 2], &[1, 2, 3, 2, 1], &mut rng).unwrap();
        let a = TtMatrix::random(&[2, 3, 2, 2], &[3, 2, 2, 2], &[1, 2, 3, 2, 1], &mut rng).unwrap();
        let y = TtVector::random(&[3, 2, 2, 2], &[1, 3, 2, 2, 1], &mut rng).unwrap();
        (x, a, y)
    }

    #[test]
    fn full_zip_is_the_bilinear_form() {
        let (x, a, y) = setup(71);
        let dense = x.to_dense().to_vector().dot(&(a.to_dense() * y.to_dense().to_vector()));
        let mut s = EnvStack::build(x.cores(), Some(&a), y.cores()).unwrap();
        s.update_right(0, x.cores(), y.cores()).unwrap();
        for k in 0..4 {
            let v = s.sandwich(k).unwrap();
            assert!((v - dense).abs() < 1e-11 * dense.abs().max(1.0), "split {k}");
            s.update_left(k, x.cores(), y.cores()).unwrap();
        }
        assert!((s.sandwich(4).unwrap() - dense).abs() < 1e-11 * dense.abs().max(1.0));
    }

    #[test]
    fn identity_operator_gives_inner_product_partials() {
        let mut rng = Rng::seeded(72);
        let x = TtVector::<f64>::random(&[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let y = TtVector::<f64>::random(&[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let mut s = EnvStack::build(x.cores(), None, y.cores()).unwrap();
        assert_eq!(s.right(1).unwrap().shape(), (2, 1, 2));
        s.update_right(0, x.cores(), y.cores()).unwrap();
        assert!((s.sandwich(0).unwrap() - tt_inner(&x, &y).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn incremental_equals_rebuild() {
        let (x, a, y) = setup(73);
        let mut s = EnvStack::build(x.cores(), Some(&a), y.cores()).unwrap();
        for k in 0..3 {
            s.update_left(k, x.cores(), y.cores()).unwrap();
        }
        for k in (0..4).rev() {
            s.update_right(k, x.cores(), y.cores()).unwrap();
        }
        let fresh = EnvStack::build(x.cores(), Some(&a), y.cores()).unwrap();
        for k in 1..4 {
            assert_eq!(s.right(k).unwrap(), fresh.right(k).unwrap());
        }
    }

    #[test]
    fn effective_operator_is_the_frame_sandwich() {
        let mut rng = Rng::seeded(74);
        let a = TtMatrix::<f64>::random(&[2, 2, 3], &[2, 2, 3], &[1, 3, 2, 1], &mut rng).unwrap();
        let x = TtVector::<f64>::random(&[2, 2, 3], &[1, 2, 3, 1], &mut rng).unwrap();
        let ad = a.to_dense();
        let mut s = EnvStack::build(x.cores(), Some(&a), x.cores()).unwrap();
        for n in 0..3 {
            let g = frame_matrix(&x, n).unwrap();
            let explicit = g.transpose() * &ad * &g;
            let local = s.effective_operator(n).unwrap();
            assert!((local - explicit).amax() < 1e-11 * ad.amax().max(1.0));
            let core = x.core(n).clone();
            let applied = s.apply(n, &core).unwrap();
            let direct = g.transpose() * &ad * x.to_dense().to_vector();
            assert!((applied - direct).amax() < 1e-11 * ad.amax().max(1.0));
            s.update_left(n, x.cores(), x.cores()).unwrap();
        }
    }

    #[test]
    fn two_site_operator_and_apply() {
        let mut rng = Rng::seeded(75);
        let a = TtMatrix::<f64>::random(&[2, 2, 2], &[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let x = TtVector::<f64>::random(&[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let s = EnvStack::build(x.cores(), Some(&a), x.cores()).unwrap();
        let g = crate::frames::frame_matrix_two(&x, 0).unwrap();
        let explicit = g.transpose() * a.to_dense() * &g;
        let local = s.effective_operator_two(0).unwrap();
        assert!((&local - explicit).amax() < 1e-11);
        let sup = crate::frames::supercore(&x, 0).unwrap();
        let sup_core = Core3::new(1, 4, 2, row_major(&sup)).unwrap();
        let v = DVector::from_vec(row_major(&sup));
        assert!((s.apply_two(0, &sup_core).unwrap() - local * v).amax() < 1e-11);
    }

    #[test]
    fn symmetric_operator_gives_symmetric_local_matrix() {
        let mut rng = Rng::seeded(76);
        let b = TtMatrix::<f64>::random(&[2, 2, 2], &[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let a = crate::algebra::mpo_mul_exact(&mpo_transpose(&b), &b).unwrap();
        let x = TtVector::<f64>::random(&[2, 2, 2], &[1, 2, 2, 1], &mut rng).unwrap();
        let s = EnvStack::build(x.cores(), Some(&a), x.cores()).unwrap();
        let m = s.effective_operator(0).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-11 * m.amax());
    }

    #[test]
    fn stale_blocks_and_caps() {
        let (x, a, y) = setup(77);
        let mut s = EnvStack::build(x.cores(), Some(&a), y.cores()).unwrap();
        assert!(matches!(s.left(1), Err(TtError::StaleEnvironment { site: 1 })));
        s.invalidate(2);
        assert!(s.right(2).is_err());
        assert!(s.right(3).is_ok());
        assert!(s.effective_operator(1).is_err());
        let small = EnvStack::build(x.cores(), Some(&a), y.cores()).unwrap().with_local_cap(2);
        assert!(matches!(small.effective_operator(0), Err(TtError::LocalSizeCap { .. })));
        // identity operator needs equal bra and ket modes
        assert!(EnvStack::build(x.cores(), None, y.cores()).is_err());
        assert!(s.right(0).is_err());
    }
}
