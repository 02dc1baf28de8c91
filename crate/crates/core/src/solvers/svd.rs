use super::eig::EigProblem;
use super::engine::{self, initial_block, Ket, LocalSolution, Problem, Sweep};
use super::report::{Sense, SolveReport};
use super::SweepConfig;
use crate::algebra::{mpo_apply_exact, mpo_mul_exact, tt_axpy};
use crate::error::Result;
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tt::{BlockTt, TruncationPolicy, TtMatrix, TtVector};

/// Dominant singular triplet.
#[derive(Clone, Debug)]
pub struct SvdResult<T> {
    pub sigma: T,
    pub u: TtVector<T>,
    pub v: TtVector<T>,
    pub report: SolveReport,
}

/// Smallest singular values from the Gram operator `AᵀA`.
#[derive(Clone, Debug)]
pub struct SmallSvdResult<T> {
    /// Ascending, `σ_k = ‖A v_k‖`.
    pub singular_values: Vec<T>,
    /// Ritz values of `AᵀA`; `σ_k² = λ_k` at convergence.
    pub gram_values: Vec<T>,
    /// Right singular vectors.
    pub vectors: BlockTt<T>,
    pub report: SolveReport,
}

/// Maximizes `uᵀ A v` over unit `u`, `v`; each local problem is a dense SVD
/// of the projected operator.
struct DominantProblem<'a, T: Scalar> {
    a: &'a TtMatrix<T>,
    at: TtMatrix<T>,
    sigma: T,
    a_norm: f64,
}

impl<T: Scalar> Problem<T> for DominantProblem<'_, T> {
    fn name(&self) -> &'static str {
        "svd_dominant"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>> {
        let op = sw.operator(0, n, two)?;
        let svd = linalg::svd(&op)?;
        self.sigma = svd.s[0];
        Ok(LocalSolution {
            cores: vec![svd.u.columns(0, 1).into_owned(), svd.vt.rows(0, 1).transpose()],
            objective: self.sigma,
            regularizations: 0,
        })
    }

    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T> {
        let op = sw.operator(0, 0, false)?;
        let (u, v) = (sw.current(0), sw.current(1));
        Ok((u.transpose() * op * &v)[(0, 0)] / (u.norm() * v.norm()))
    }

    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64> {
        let u = unknowns[0].extract(0)?;
        let v = unknowns[1].extract(0)?;
        let r1 = engine::norm(&tt_axpy(&mpo_apply_exact(self.a, &v)?, -self.sigma, &u)?);
        let r2 = engine::norm(&tt_axpy(&mpo_apply_exact(&self.at, &u)?, -self.sigma, &v)?);
        Ok((r1 + r2) / self.a_norm.max(f64::MIN_POSITIVE))
    }

    fn scale(&self) -> f64 {
        self.a_norm
    }

    fn values(&self) -> Vec<f64> {
        vec![self.sigma.as_f64()]
    }
}

/// Largest singular value of `a` with its singular vectors. The residual is
/// `(‖Av − σu‖ + ‖Aᵀu − σv‖) / ‖A‖_F`.
pub fn svd_dominant<T: Scalar>(a: &TtMatrix<T>, config: &SweepConfig) -> Result<SvdResult<T>> {
    config.validate()?;
    let mut rng = Rng::seeded(config.seed);
    let u = initial_block::<T>(&a.row_modes(), 1, config, &mut rng)?;
    let v = initial_block::<T>(&a.col_modes(), 1, config, &mut rng)?;
    let mut sw = Sweep::new(vec![u, v], vec![(0, Some(a), Ket::Unknown(1))], config.local_cap)?;
    let mut p = DominantProblem {
        a,
        at: a.transpose(),
        sigma: T::zero(),
        a_norm: engine::op_norm(a),
    };
    let report = engine::run(&mut sw, &mut p, config)?;
    let mut xs = sw.into_unknowns();
    let v = xs.remove(1).extract(0)?;
    let u = xs.remove(0).extract(0)?;
    Ok(SvdResult {
        sigma: p.sigma,
        u,
        v,
        report,
    })
}

/// `K` smallest singular values of `a`, computed as eigenpairs of the Gram
/// operator `AᵀA` (formed exactly, then rounded to drop numerically zero
/// singular values). Singular values are reported as `‖A v_k‖`, which
/// equals `√λ_k` for a converged Ritz pair but keeps full accuracy when
/// `λ_k` is near zero.
pub fn svd_small_k<T: Scalar>(a: &TtMatrix<T>, k: usize, config: &SweepConfig) -> Result<SmallSvdResult<T>> {
    config.validate()?;
    let limit = a.nrows().min(a.ncols());
    if k > limit {
        return Err(engine::too_many(k, limit, 0));
    }
    let gram = mpo_mul_exact(&a.transpose(), a)?.round(&TruncationPolicy::exact())?;
    let mut rng = Rng::seeded(config.seed);
    let x = initial_block::<T>(&gram.row_modes(), k, config, &mut rng)?;
    let mut sw = Sweep::new(vec![x], vec![(0, Some(&gram), Ket::Unknown(0))], config.local_cap)?;
    let mut p = EigProblem {
        a: &gram,
        k,
        values: Vec::new(),
        a_norm: engine::op_norm(&gram),
        name: "svd_small_k",
    };
    let mut report = engine::run(&mut sw, &mut p, config)?;
    let vectors = sw.into_unknowns().remove(0);
    let mut singular_values = Vec::with_capacity(k);
    for j in 0..k {
        let v = vectors.extract(j)?;
        singular_values.push(crate::algebra::tt_norm(&mpo_apply_exact(a, &v)?));
    }
    report.values = singular_values.iter().map(|s| s.as_f64()).collect();
    Ok(SmallSvdResult {
        singular_values,
        gram_values: p.values,
        vectors,
        report,
    })
}
