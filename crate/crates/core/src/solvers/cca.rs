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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CcaOptions {
    /// Number of canonical pairs.
    pub k: usize,
    /// Replace the local covariance Grams by identities. This solves the
    /// cheaper partial-least-squares style problem `max tr(WxᵀCxyWy)` with
    /// orthonormal `Wx`, `Wy`; the values are then not correlations.
    pub identity_gram: bool,
}

impl CcaOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            identity_gram: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CcaResult<T> {
    /// Descending canonical correlations.
    pub correlations: Vec<T>,
    pub wx: BlockTt<T>,
    pub wy: BlockTt<T>,
    pub report: SolveReport,
}

/// `max tr(WxᵀCxyWy)` subject to `WxᵀCxxWx = WyᵀCyyWy = I`. Locally the
/// Grams are whitened by Cholesky and the whitened cross-covariance is
/// split by SVD.
struct CcaProblem<T: Scalar> {
    cxy: TtMatrix<T>,
    cyx: TtMatrix<T>,
    cxx: Option<TtMatrix<T>>,
    cyy: Option<TtMatrix<T>>,
    k: usize,
    correlations: Vec<T>,
    norms: [f64; 3],
}

/// Cholesky factor of a local Gram, or the identity.
fn whitener<T: Scalar>(sw: &Sweep<T>, term: Option<usize>, dim: usize, n: usize, two: bool) -> Result<(DMatrix<T>, usize)> {
    match term {
        Some(t) => linalg::cholesky_regularized(&sw.operator(t, n, two)?, n),
        None => Ok((DMatrix::identity(dim, dim), 0)),
    }
}

impl<T: Scalar> CcaProblem<T> {
    fn gram_terms(&self) -> (Option<usize>, Option<usize>) {
        if self.cxx.is_some() {
            (Some(1), Some(2))
        } else {
            (None, None)
        }
    }
}

impl<T: Scalar> Problem<T> for CcaProblem<T> {
    fn name(&self) -> &'static str {
        "cca"
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>> {
        let cxy = sw.operator(0, n, two)?;
        let (dx, dy) = cxy.shape();
        if dx.min(dy) < self.k {
            return Err(engine::too_many(self.k, dx.min(dy), n));
        }
        let (tx, ty) = self.gram_terms();
        let (lx, rx) = whitener(sw, tx, dx, n, two)?;
        let (ly, ry) = whitener(sw, ty, dy, n, two)?;
        // Lx⁻¹ Cxy Ly⁻ᵀ
        let half = linalg::solve_lower(&lx, &cxy);
        let m = linalg::solve_lower(&ly, &half.transpose()).transpose();
        let svd = linalg::svd(&m)?;
        let wx = linalg::solve_lower_transpose(&lx, &svd.u.columns(0, self.k).into_owned());
        let wy = linalg::solve_lower_transpose(&ly, &svd.vt.rows(0, self.k).transpose());
        self.correlations = svd.s.iter().take(self.k).copied().collect();
        Ok(LocalSolution {
            cores: vec![wx, wy],
            objective: self.correlations.iter().fold(T::zero(), |a, &v| a + v),
            regularizations: rx + ry,
        })
    }

    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T> {
        let (wx, wy) = (sw.current(0), sw.current(1));
        let cross = wx.transpose() * sw.operator(0, 0, false)? * &wy;
        let gram = |t: Option<usize>, w: &DMatrix<T>| -> Result<DMatrix<T>> {
            Ok(match t {
                Some(t) => w.transpose() * sw.operator(t, 0, false)? * w,
                None => w.transpose() * w,
            })
        };
        let (tx, ty) = self.gram_terms();
        let (lx, _) = linalg::cholesky_regularized(&gram(tx, &wx)?, 0)?;
        let (ly, _) = linalg::cholesky_regularized(&gram(ty, &wy)?, 0)?;
        let half = linalg::solve_lower(&lx, &cross);
        let m = linalg::solve_lower(&ly, &half.transpose()).transpose();
        Ok(linalg::svd(&m)?.s.sum())
    }

    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64> {
        let apply = |op: &Option<TtMatrix<T>>, w: &TtVector<T>| -> Result<TtVector<T>> {
            match op {
                Some(op) => mpo_apply_exact(op, w),
                None => Ok(w.clone()),
            }
        };
        let mut worst = 0.0f64;
        for (k, &rho) in self.correlations.iter().enumerate() {
            let wx = unknowns[0].extract(k)?;
            let wy = unknowns[1].extract(k)?;
            let r1 = tt_axpy(&mpo_apply_exact(&self.cxy, &wy)?, -rho, &apply(&self.cxx, &wx)?)?;
            let r2 = tt_axpy(&mpo_apply_exact(&self.cyx, &wx)?, -rho, &apply(&self.cyy, &wy)?)?;
            let scale = self.norms[0] + rho.as_f64() * (self.norms[1] + self.norms[2]);
            worst = worst.max((engine::norm(&r1) + engine::norm(&r2)) / scale.max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }

    fn scale(&self) -> f64 {
        1.0
    }

    fn values(&self) -> Vec<f64> {
        self.correlations.iter().map(|v| v.as_f64()).collect()
    }
}

/// Canonical correlation analysis of two data operators sharing their
/// observation (column) modes: `Cxx = XXᵀ`, `Cyy = YYᵀ`, `Cxy = XYᵀ`. The
/// residual is `max_k (‖Cxy wy − ρ Cxx wx‖ + ‖Cyx wx − ρ Cyy wy‖)` scaled
/// by `‖Cxy‖_F + ρ(‖Cxx‖_F + ‖Cyy‖_F)`.
pub fn cca<T: Scalar>(
    x: &TtMatrix<T>,
    y: &TtMatrix<T>,
    options: CcaOptions,
    config: &SweepConfig,
) -> Result<CcaResult<T>> {
    config.validate()?;
    if x.col_modes() != y.col_modes() || x.order() != y.order() {
        return Err(TtError::ShapeMismatch(format!(
            "X has observation modes {:?}, Y has {:?}",
            x.col_modes(),
            y.col_modes()
        )));
    }
    let exact = TruncationPolicy::exact();
    let cxy = mpo_mul_exact(x, &y.transpose())?.round(&exact)?;
    let cyx = cxy.transpose();
    let (cxx, cyy) = if options.identity_gram {
        (None, None)
    } else {
        (
            Some(mpo_mul_exact(x, &x.transpose())?.round(&exact)?),
            Some(mpo_mul_exact(y, &y.transpose())?.round(&exact)?),
        )
    };
    let mut rng = Rng::seeded(config.seed);
    let wx = initial_block::<T>(&x.row_modes(), options.k, config, &mut rng)?;
    let wy = initial_block::<T>(&y.row_modes(), options.k, config, &mut rng)?;
    let mut terms = vec![(0, Some(&cxy), Ket::Unknown(1))];
    if let (Some(cxx), Some(cyy)) = (&cxx, &cyy) {
        terms.push((0, Some(cxx), Ket::Unknown(0)));
        terms.push((1, Some(cyy), Ket::Unknown(1)));
    }
    let mut sw = Sweep::new(vec![wx, wy], terms, config.local_cap)?;
    let norms = [
        engine::op_norm(&cxy),
        cxx.as_ref().map_or(1.0, engine::op_norm),
        cyy.as_ref().map_or(1.0, engine::op_norm),
    ];
    let mut p = CcaProblem {
        cxy: cxy.clone(),
        cyx,
        cxx: cxx.clone(),
        cyy: cyy.clone(),
        k: options.k,
        correlations: Vec::new(),
        norms,
    };
    let report = engine::run(&mut sw, &mut p, config)?;
    let mut ws = sw.into_unknowns();
    let wy = ws.remove(1);
    let wx = ws.remove(0);
    Ok(CcaResult {
        correlations: p.correlations,
        wx,
        wy,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::testing::block_gram;

    /// Dense canonical correlations by whitening and SVD.
    fn dense_cca(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
        let lx = x * x.transpose();
        let ly = y * y.transpose();
        let cx = lx.cholesky().unwrap().l();
        let cy = ly.cholesky().unwrap().l();
        let m = cx.solve_lower_triangular(&(x * y.transpose())).unwrap();
        let m = cy.solve_lower_triangular(&m.transpose()).unwrap().transpose();
        linalg::svd(&m).unwrap().s.iter().copied().collect()
    }

    fn data(seed: u64) -> (DMatrix<f64>, DMatrix<f64>, TtMatrix<f64>, TtMatrix<f64>) {
        let mut rng = Rng::seeded(seed);
        // 8 features by 32 observations, with shared latent structure
        let latent = DMatrix::from_fn(2, 32, |_, _| rng.normal());
        let mx = DMatrix::from_fn(8, 2, |_, _| rng.normal());
        let my = DMatrix::from_fn(8, 2, |_, _| rng.normal());
        let x = &mx * &latent + DMatrix::from_fn(8, 32, |_, _| 0.5 * rng.normal());
        let y = &my * &latent + DMatrix::from_fn(8, 32, |_, _| 0.5 * rng.normal());
        let p = TruncationPolicy::exact();
        let tx = TtMatrix::from_dense(&x, &[2, 2, 2], &[4, 4, 2], &p).unwrap();
        let ty = TtMatrix::from_dense(&y, &[2, 2, 2], &[4, 4, 2], &p).unwrap();
        (x, y, tx, ty)
    }

    #[test]
    fn matches_dense_correlations() {
        let (x, y, tx, ty) = data(41);
        let exact = dense_cca(&x, &y);
        let r = cca(&tx, &ty, CcaOptions::new(2), &SweepConfig::fixed(8).with_seed(3)).unwrap();
        assert!(r.report.converged, "{:?}", r.report);
        assert!(r.report.is_monotone(1e-10));
        for k in 0..2 {
            assert!((r.correlations[k] - exact[k]).abs() < 1e-8, "{k}: {} vs {}", r.correlations[k], exact[k]);
            assert!(r.correlations[k] <= 1.0 + 1e-12);
        }
        let gx = block_gram(&r.wx, Some(&(&x * x.transpose())));
        assert!((gx - DMatrix::identity(2, 2)).amax() < 1e-8);
    }

    #[test]
    fn identity_gram_gives_orthonormal_weights() {
        let (x, y, tx, ty) = data(42);
        let opts = CcaOptions {
            k: 2,
            identity_gram: true,
        };
        let r = cca(&tx, &ty, opts, &SweepConfig::fixed(8)).unwrap();
        let exact = linalg::svd(&(&x * y.transpose())).unwrap().s;
        assert!((r.correlations[0] - exact[0]).abs() < 1e-8 * exact[0]);
        let g = block_gram(&r.wx, None);
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn observation_modes_must_agree() {
        let (_, _, tx, _) = data(43);
        let mut rng = Rng::seeded(1);
        let ty = TtMatrix::<f64>::random(&[2, 2, 2], &[2, 4, 4], &[1, 2, 2, 1], &mut rng).unwrap();
        assert!(cca(&tx, &ty, CcaOptions::new(1), &SweepConfig::default()).is_err());
    }
}
