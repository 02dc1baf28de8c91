use super::engine::{self, initial_block, Ket, LocalSolution, Problem, Sweep};
use super::report::{Sense, SolveReport};
use super::SweepConfig;
use crate::error::Result;
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tt::{BlockTt, TtMatrix, TtVector};

/// Smallest eigenpair.
#[derive(Clone, Debug)]
pub struct EigResult<T> {
    pub value: T,
    pub vector: TtVector<T>,
    pub report: SolveReport,
}

/// `K` extreme eigenpairs sharing one block train.
#[derive(Clone, Debug)]
pub struct BlockEigResult<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors (`B`-orthonormal for `gevd`).
    pub vectors: BlockTt<T>,
    pub report: SolveReport,
}

/// Smallest `K` eigenpairs of a symmetric operator by Rayleigh-Ritz on the
/// local spaces; the objective is the sum of the `K` Ritz values.
pub(crate) struct EigProblem<'a, T: Scalar> {
    pub a: &'a TtMatrix<T>,
    pub k: usize,
    pub values: Vec<T>,
    pub a_norm: f64,
    pub name: &'static str,
}

impl<T: Scalar> Problem<T> for EigProblem<'_, T> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>> {
        let op = sw.operator(0, n, two)?;
        if op.nrows() < self.k {
            return Err(engine::too_many(self.k, op.nrows(), n));
        }
        let (vals, vecs) = linalg::sym_eig(&op);
        self.values = vals.iter().take(self.k).copied().collect();
        Ok(LocalSolution {
            cores: vec![vecs.columns(0, self.k).into_owned()],
            objective: self.values.iter().fold(T::zero(), |a, &v| a + v),
            regularizations: 0,
        })
    }

    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T> {
        let op = sw.operator(0, 0, false)?;
        let (q, _) = linalg::qr(&sw.current(0));
        Ok((q.transpose() * op * q).trace())
    }

    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, &lambda) in self.values.iter().enumerate() {
            let x = unknowns[0].extract(k)?;
            let r = engine::eig_residual(self.a, None, &x, lambda)?;
            worst = worst.max(r / self.a_norm.max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }

    fn scale(&self) -> f64 {
        self.a_norm
    }

    fn values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

/// Smallest `K` eigenpairs of the symmetric operator `a`. The residual is
/// `max_k ‖A x_k − λ_k x_k‖ / ‖A‖_F`.
pub fn eig_block<T: Scalar>(a: &TtMatrix<T>, k: usize, config: &SweepConfig) -> Result<BlockEigResult<T>> {
    config.validate()?;
    engine::check_square(a, "eigen operator")?;
    let mut rng = Rng::seeded(config.seed);
    let x = initial_block::<T>(&a.row_modes(), k, config, &mut rng)?;
    let mut sw = Sweep::new(vec![x], vec![(0, Some(a), Ket::Unknown(0))], config.local_cap)?;
    let mut p = EigProblem {
        a,
        k,
        values: Vec::new(),
        a_norm: engine::op_norm(a),
        name: "eig_block",
    };
    let report = engine::run(&mut sw, &mut p, config)?;
    Ok(BlockEigResult {
        values: p.values,
        vectors: sw.into_unknowns().remove(0),
        report,
    })
}

/// Smallest eigenpair of the symmetric operator `a`.
pub fn eig_min<T: Scalar>(a: &TtMatrix<T>, config: &SweepConfig) -> Result<EigResult<T>> {
    let mut r = eig_block(a, 1, config)?;
    r.report.solver = "eig_min".into();
    Ok(EigResult {
        value: r.values[0],
        vector: r.vectors.extract(0)?,
        report: r.report,
    })
}
