use nalgebra::DMatrix;

use super::engine::{self, initial_block, Ket, LocalSolution, Problem, Sweep};
use super::report::{Sense, SolveReport};
use super::SweepConfig;
use crate::algebra::{mpo_apply_exact, mpo_mul_exact, tt_axpy};
use crate::error::{Result, TtError};
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tt::{BlockTt, TruncationPolicy, TtMatrix, TtVector};

#[derive(Clone, Debug)]
pub struct LinsolveResult<T> {
    pub x: TtVector<T>,
    pub report: SolveReport,
}

/// `min ‖Ax − y‖²` through the normal equations. The objective is
/// `xᵀAᵀAx − 2xᵀAᵀy`, which differs from the squared residual by `‖y‖²`.
struct LinsolveProblem<'a, T: Scalar> {
    a: &'a TtMatrix<T>,
    y: &'a TtVector<T>,
    y_norm: f64,
}

fn objective<T: Scalar>(g: &DMatrix<T>, b: &DMatrix<T>, w: &DMatrix<T>) -> T {
    (w.transpose() * g * w)[(0, 0)] - (w.transpose() * b)[(0, 0)] * T::of(2.0)
}

impl<T: Scalar> Problem<T> for LinsolveProblem<'_, T> {
    fn name(&self) -> &'static str {
        "linsolve"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>> {
        let g = sw.operator(0, n, two)?;
        let b = DMatrix::from_column_slice(g.nrows(), 1, sw.rhs(1, n, two)?.as_slice());
        let (l, regs) = linalg::cholesky_regularized(&g, n)?;
        let w = linalg::solve_lower_transpose(&l, &linalg::solve_lower(&l, &b));
        Ok(LocalSolution {
            objective: objective(&g, &b, &w),
            cores: vec![w],
            regularizations: regs,
        })
    }

    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T> {
        let g = sw.operator(0, 0, false)?;
        let b = DMatrix::from_column_slice(g.nrows(), 1, sw.rhs(1, 0, false)?.as_slice());
        Ok(objective(&g, &b, &sw.current(0)))
    }

    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64> {
        let x = unknowns[0].extract(0)?;
        let r = tt_axpy(&mpo_apply_exact(self.a, &x)?, -T::one(), self.y)?;
        Ok(engine::norm(&r) / self.y_norm.max(f64::MIN_POSITIVE))
    }

    fn scale(&self) -> f64 {
        (self.y_norm * self.y_norm).max(f64::MIN_POSITIVE)
    }

    fn values(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Least-squares solution of `A x = y`. The local systems use the Gram
/// operator `AᵀA` (formed exactly, then rounded to drop numerically zero
/// singular values) and are solved by Cholesky, with a small diagonal shift
/// when a local Gram is numerically singular. The residual is
/// `‖Ax − y‖ / ‖y‖`.
pub fn linsolve<T: Scalar>(a: &TtMatrix<T>, y: &TtVector<T>, config: &SweepConfig) -> Result<LinsolveResult<T>> {
    config.validate()?;
    if a.row_modes() != y.modes() {
        return Err(TtError::ShapeMismatch(format!(
            "operator rows {:?} against right-hand side {:?}",
            a.row_modes(),
            y.modes()
        )));
    }
    let at = a.transpose();
    let gram = mpo_mul_exact(&at, a)?.round(&TruncationPolicy::exact())?;
    let mut rng = Rng::seeded(config.seed);
    let x = initial_block::<T>(&a.col_modes(), 1, config, &mut rng)?;
    let mut sw = Sweep::new(
        vec![x],
        vec![(0, Some(&gram), Ket::Unknown(0)), (0, Some(&at), Ket::Fixed(y.clone()))],
        config.local_cap,
    )?;
    let mut p = LinsolveProblem {
        a,
        y,
        y_norm: engine::norm(y),
    };
    let mut report = engine::run(&mut sw, &mut p, config)?;
    report.values = vec![report.final_residual()];
    Ok(LinsolveResult {
        x: sw.into_unknowns().remove(0).extract(0)?,
        report,
    })
}
