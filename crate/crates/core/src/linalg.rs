//! Small dense factorizations with the gauge and rank conventions used by
//! every TT routine.
//!
//! - Singular vectors are sign-fixed so the largest-magnitude entry of each
//!   left vector is nonnegative (first such entry on ties).
//! - Rank selection keeps the smallest rank whose discarded tail meets the
//!   tolerance; singular values below `max(m, n)·eps·σ₁` count as zero.
//! - QR factors have a nonnegative diagonal in `R`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, TtError};
use crate::scalar::Scalar;

/// Thin SVD `U · diag(s) · Vt` with descending `s`.
#[derive(Clone, Debug)]
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: DVector<T>,
    pub vt: DMatrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `diag(s) · Vt`.
    pub fn s_vt(&self) -> DMatrix<T> {
        let mut m = self.vt.clone();
        for (k, mut row) in m.row_iter_mut().enumerate() {
            row *= self.s[k];
        }
        m
    }

    /// `U · diag(s)`.
    pub fn u_s(&self) -> DMatrix<T> {
        let mut m = self.u.clone();
        for (k, mut col) in m.column_iter_mut().enumerate() {
            col *= self.s[k];
        }
        m
    }

    /// `‖s‖₂` over all kept values.
    pub fn norm(&self) -> T {
        self.s.norm()
    }

    fn truncate(mut self, rank: usize) -> Self {
        let rank = rank.max(1).min(self.s.len());
        self.u = self.u.columns(0, rank).into_owned();
        self.s = self.s.rows(0, rank).into_owned();
        self.vt = self.vt.rows(0, rank).into_owned();
        self
    }
}

/// Full thin SVD, sorted descending, sign-gauged.
pub fn svd<T: Scalar>(m: &DMatrix<T>) -> Result<Svd<T>> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if m.iter().all(|x| *x == T::zero()) {
        return Ok(Svd {
            u: DMatrix::identity(rows, k),
            s: DVector::zeros(k),
            vt: DMatrix::identity(k, cols),
        });
    }
    let (u_raw, sv, vt_raw) = jacobi_svd(m)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = DMatrix::zeros(rows, k);
    let mut vt = DMatrix::zeros(k, cols);
    let mut s = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        vt.set_row(dst, &vt_raw.row(src));
        s[dst] = sv[src];
    }
    for j in 0..k {
        if leading_sign_negative(u.column(j).iter().copied()) {
            u.column_mut(j).neg_mut();
            vt.row_mut(j).neg_mut();
        }
    }
    Ok(Svd { u, s, vt })
}

/// Sweeps allowed before one-sided Jacobi gives up.
const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD, unsorted. Works on the orientation with
/// fewer columns; columns are rotated until pairwise orthogonal to working
/// precision, which gives small singular values to high relative accuracy.
fn jacobi_svd<T: Scalar>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DVector<T>, DMatrix<T>)> {
    if m.nrows() < m.ncols() {
        let (u, s, vt) = jacobi_svd(&m.transpose())?;
        return Ok((vt.transpose(), s, u.transpose()));
    }
    let (rows, n) = m.shape();
    let mut w = m.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let tol = T::eps() * T::of_usize(rows).sqrt();
    // columns this small are rounding noise and are not rotated
    let negligible = (T::eps() * m.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if alpha <= negligible || beta <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let t = if zeta == T::zero() { T::one() } else { t };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(TtError::Factorization(format!(
            "Jacobi SVD of a {rows}×{n} matrix did not converge"
        )));
    }
    let mut s = DVector::zeros(n);
    let mut u = DMatrix::zeros(rows, n);
    let mut missing = Vec::new();
    for j in 0..n {
        let norm = w.column(j).norm();
        s[j] = norm;
        if norm * norm > negligible {
            u.set_column(j, &(w.column(j) / norm));
        } else {
            missing.push(j);
        }
    }
    complete_orthonormal(&mut u, &missing);
    Ok((u, s, v.transpose()))
}

fn rotate_columns<T: Scalar>(m: &mut DMatrix<T>, p: usize, q: usize, c: T, s: T) {
    for i in 0..m.nrows() {
        let (a, b) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

/// Fills the listed (still zero) columns of `u` with unit vectors orthogonal to
/// all other columns, drawn from the standard basis by Gram-Schmidt.
fn complete_orthonormal<T: Scalar>(u: &mut DMatrix<T>, missing: &[usize]) {
    let rows = u.nrows();
    let mut candidate = 0;
    for &j in missing {
        while candidate < rows {
            let mut e = DVector::<T>::zeros(rows);
            e[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for c in 0..u.ncols() {
                    if c == j {
                        continue;
                    }
                    let proj = u.column(c).dot(&e);
                    e -= u.column(c) * proj;
                }
            }
            let norm = e.norm();
            if norm > T::of(0.5) {
                u.set_column(j, &(e / norm));
                break;
            }
        }
    }
}

/// True if the largest-magnitude entry (first on ties) is negative.
pub(crate) fn leading_sign_negative<T: Scalar>(v: impl Iterator<Item = T>) -> bool {
    let mut best = T::zero();
    let mut neg = false;
    for x in v {
        if x.abs() > best {
            best = x.abs();
            neg = x < T::zero();
        }
    }
    neg
}

/// Numerical rank floor for singular values of an `m × n` matrix.
fn noise_floor<T: Scalar>(s: &DVector<T>, rows: usize, cols: usize) -> T {
    let top = if s.is_empty() { T::zero() } else { s[0] };
    top * T::of_usize(rows.max(cols)) * T::eps()
}

/// Smallest rank whose discarded tail has norm at most `delta`, never below
/// one and never keeping values under the numerical floor.
pub fn select_rank<T: Scalar>(s: &DVector<T>, delta: T, floor: T) -> usize {
    let n = s.len();
    let numeric = s.iter().take_while(|&&x| x > floor).count();
    let delta_sq = delta * delta;
    let mut tail = T::zero();
    let mut rank = n;
    for k in (0..n).rev() {
        tail += s[k] * s[k];
        if tail > delta_sq {
            break;
        }
        rank = k;
    }
    rank.min(numeric).max(1)
}

/// SVD truncated to tail norm `delta` and at most `max_rank` terms.
pub fn truncated_svd<T: Scalar>(
    m: &DMatrix<T>,
    delta: T,
    max_rank: Option<usize>,
) -> Result<Svd<T>> {
    let full = svd(m)?;
    let floor = noise_floor(&full.s, m.nrows(), m.ncols());
    let mut rank = select_rank(&full.s, delta, floor);
    if let Some(cap) = max_rank {
        rank = rank.min(cap.max(1));
    }
    Ok(full.truncate(rank))
}

/// SVD keeping exactly `min(rank, m, n)` terms, zeros included.
pub fn fixed_rank_svd<T: Scalar>(m: &DMatrix<T>, rank: usize) -> Result<Svd<T>> {
    Ok(svd(m)?.truncate(rank))
}

/// Thin QR with `diag(R) ≥ 0`. A zero matrix yields the leading identity
/// columns for `Q` and a zero `R`.
pub fn qr<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if m.iter().all(|x| *x == T::zero()) {
        return (DMatrix::identity(rows, k), DMatrix::zeros(k, cols));
    }
    let dec = m.clone().qr();
    let mut q = dec.q();
    let mut r = dec.r();
    for j in 0..k {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    (q, r)
}

/// Eigen-decomposition of the symmetric part of `m`, ascending, with each
/// eigenvector sign-gauged.
pub fn sym_eig<T: Scalar>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = m.nrows();
    let half = T::of(0.5);
    let sym = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * half);
    let dec = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        dec.eigenvalues[a]
            .partial_cmp(&dec.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = dec.eigenvalues[src];
        let mut col = dec.eigenvectors.column(src).into_owned();
        if leading_sign_negative(col.iter().copied()) {
            col.neg_mut();
        }
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

/// Attempts allowed before a Gram matrix is declared indefinite.
pub const REGULARIZATION_ATTEMPTS: usize = 4;

/// Cholesky factor of a symmetric matrix, adding `μI` with
/// `μ = 10^{-12+2k}·trace/size` on the `k`-th retry. Returns the factor and
/// the number of regularizations applied.
pub fn cholesky_regularized<T: Scalar>(
    m: &DMatrix<T>,
    site: usize,
) -> Result<(DMatrix<T>, usize)> {
    let n = m.nrows();
    let half = T::of(0.5);
    let sym = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * half);
    if let Some(c) = Cholesky::new(sym.clone()) {
        return Ok((c.l(), 0));
    }
    let trace = sym.trace();
    let scale = if trace > T::zero() {
        trace / T::of_usize(n.max(1))
    } else {
        sym.amax().max(T::of(f64::MIN_POSITIVE))
    };
    let mut mu = T::of(1e-12) * scale;
    for attempt in 1..=REGULARIZATION_ATTEMPTS {
        let mut shifted = sym.clone();
        for i in 0..n {
            shifted[(i, i)] += mu;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok((c.l(), attempt));
        }
        mu *= T::of(100.0);
    }
    let min_diag = (0..n)
        .map(|i| sym[(i, i)].as_f64())
        .fold(f64::INFINITY, f64::min);
    Err(TtError::IndefiniteGram {
        site,
        attempts: REGULARIZATION_ATTEMPTS,
        min_diag,
        trace: trace.as_f64(),
    })
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower<T: Scalar>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a nonzero diagonal")
}

/// Solves `Lᵀ X = B` for lower-triangular `L`.
pub fn solve_lower_transpose<T: Scalar>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    l.tr_solve_lower_triangular(b)
        .expect("Cholesky factor has a nonzero diagonal")
}

/// Generalized symmetric-definite eigenproblem `A v = λ B v`, ascending.
/// Eigenvectors are `B`-orthonormal. Returns the regularization count of `B`.
pub fn generalized_sym_eig<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    site: usize,
) -> Result<(DVector<T>, DMatrix<T>, usize)> {
    let (l, regs) = cholesky_regularized(b, site)?;
    // C = L⁻¹ A L⁻ᵀ
    let left = solve_lower(&l, a);
    let c = solve_lower(&l, &left.transpose());
    let (vals, w) = sym_eig(&c);
    let mut v = solve_lower_transpose(&l, &w);
    for j in 0..v.ncols() {
        if leading_sign_negative(v.column(j).iter().copied()) {
            v.column_mut(j).neg_mut();
        }
    }
    Ok((vals, v, regs))
}
