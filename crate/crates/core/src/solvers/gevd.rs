use super::eig::BlockEigResult;
use super::engine::{self, initial_block, Ket, LocalSolution, Problem, Sweep};
use super::report::Sense;
use super::SweepConfig;
use crate::algebra::mpo_mul_exact;
use crate::error::{Result, TtError};
use crate::linalg;
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tt::{BlockTt, TruncationPolicy, TtMatrix};

/// `min tr(VᵀCV)` subject to `VᵀBV = I`; each local problem is a dense
/// symmetric-definite pencil.
struct GevdProblem<'a, T: Scalar> {
    c: TtMatrix<T>,
    b: &'a TtMatrix<T>,
    k: usize,
    values: Vec<T>,
    c_norm: f64,
    b_norm: f64,
}

impl<T: Scalar> Problem<T> for GevdProblem<'_, T> {
    fn name(&self) -> &'static str {
        "gevd"
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>> {
        let c = sw.operator(0, n, two)?;
        let b = sw.operator(1, n, two)?;
        if c.nrows() < self.k {
            return Err(engine::too_many(self.k, c.nrows(), n));
        }
        let (vals, vecs, regs) = linalg::generalized_sym_eig(&c, &b, n)?;
        self.values = vals.iter().take(self.k).copied().collect();
        Ok(LocalSolution {
            cores: vec![vecs.columns(0, self.k).into_owned()],
            objective: self.values.iter().fold(T::zero(), |a, &v| a + v),
            regularizations: regs,
        })
    }

    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T> {
        let x = sw.current(0);
        let c = x.transpose() * sw.operator(0, 0, false)? * &x;
        let b = x.transpose() * sw.operator(1, 0, false)? * &x;
        let (vals, _, _) = linalg::generalized_sym_eig(&c, &b, 0)?;
        Ok(vals.sum())
    }

    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = unknowns[0].extract(k)?;
            let r = engine::eig_residual(&self.c, Some(self.b), &v, lambda)?;
            let scale = self.c_norm + lambda.as_f64().abs() * self.b_norm;
            worst = worst.max(r / scale.max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }

    fn scale(&self) -> f64 {
        self.c_norm
    }

    fn values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

/// Smallest `K` generalized eigenpairs of `C v = λ B v` with `C = X A Xᵀ`
/// and `B` symmetric positive definite. Eigenvectors come out
/// `B`-orthonormal. The residual is
/// `max_k ‖C v_k − λ_k B v_k‖ / (‖C‖_F + |λ_k|‖B‖_F)`.
///
/// Local Gram matrices that fail Cholesky are shifted by a small multiple
/// of their mean diagonal; the count is in the report.
pub fn gevd<T: Scalar>(
    x: &TtMatrix<T>,
    a: &TtMatrix<T>,
    b: &TtMatrix<T>,
    k: usize,
    config: &SweepConfig,
) -> Result<BlockEigResult<T>> {
    config.validate()?;
    engine::check_square(a, "A")?;
    engine::check_square(b, "B")?;
    if x.col_modes() != a.row_modes() || x.row_modes() != b.row_modes() {
        return Err(TtError::ShapeMismatch(format!(
            "X is {:?} × {:?}, A has rows {:?}, B has rows {:?}",
            x.row_modes(),
            x.col_modes(),
            a.row_modes(),
            b.row_modes()
        )));
    }
    let exact = TruncationPolicy::exact();
    let c = mpo_mul_exact(&mpo_mul_exact(x, a)?, &x.transpose())?.round(&exact)?;
    let mut rng = Rng::seeded(config.seed);
    let v = initial_block::<T>(&b.row_modes(), k, config, &mut rng)?;
    let mut sw = Sweep::new(
        vec![v],
        vec![(0, Some(&c), Ket::Unknown(0)), (0, Some(b), Ket::Unknown(0))],
        config.local_cap,
    )?;
    let mut p = GevdProblem {
        c_norm: engine::op_norm(&c),
        b_norm: engine::op_norm(b),
        c,
        b,
        k,
        values: Vec::new(),
    };
    let report = engine::run(&mut sw, &mut p, config)?;
    Ok(BlockEigResult {
        values: p.values,
        vectors: sw.into_unknowns().remove(0),
        report,
    })
}
