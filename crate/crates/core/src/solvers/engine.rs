//! Shared sweep driver: unknown block trains, their environment stacks and
//! the left-right schedule.

use nalgebra::{DMatrix, DVector};

use super::report::{Sense, SolveReport};
use super::{RankPolicy, SweepConfig};
use crate::env::EnvStack;
use crate::error::{Result, TtError};
use crate::random::Rng;
use crate::scalar::Scalar;
use crate::tt::{BlockTt, BondSplit, Core3, TtMatrix, TtVector};

/// Right-hand factor of a sandwich.
pub(crate) enum Ket<T> {
    Unknown(usize),
    Fixed(TtVector<T>),
}

/// `(bra unknown, operator, ket)` of one sandwich.
pub(crate) type TermSpec<'a, T> = (usize, Option<&'a TtMatrix<T>>, Ket<T>);

struct Term<T> {
    bra: usize,
    ket: Ket<T>,
    stack: EnvStack<T>,
}

/// Output of one local solve: a `local_dim × K` matrix per unknown.
pub(crate) struct LocalSolution<T> {
    pub cores: Vec<DMatrix<T>>,
    pub objective: T,
    pub regularizations: usize,
}

/// A problem that can be solved one local space at a time.
pub(crate) trait Problem<T: Scalar> {
    fn name(&self) -> &'static str;
    fn sense(&self) -> Sense;
    /// Optimal local cores at site `n` (or sites `n, n + 1` when `two`).
    fn solve(&mut self, sw: &Sweep<T>, n: usize, two: bool) -> Result<LocalSolution<T>>;
    /// Objective of the current unknowns; every block sits on site 0.
    fn evaluate(&mut self, sw: &Sweep<T>) -> Result<T>;
    /// Residual of the current unknowns; every block sits on site 0 and the
    /// last local solve was at site 0.
    fn residual(&mut self, unknowns: &[BlockTt<T>]) -> Result<f64>;
    /// Objective scale below which changes count as absolute.
    fn scale(&self) -> f64;
    fn values(&self) -> Vec<f64>;
}

pub(crate) struct Sweep<T> {
    unknowns: Vec<BlockTt<T>>,
    terms: Vec<Term<T>>,
}

/// Random block train with orthonormal columns, block on site 0.
pub(crate) fn initial_block<T: Scalar>(
    modes: &[usize],
    k: usize,
    config: &SweepConfig,
    rng: &mut Rng,
) -> Result<BlockTt<T>> {
    let mut ranks = vec![config.initial_rank(k); modes.len() + 1];
    ranks[0] = 1;
    ranks[modes.len()] = 1;
    let mut b = BlockTt::random(modes, &ranks, k, 0, rng)?;
    b.orthogonalize();
    b.orthonormalize_block()?;
    Ok(b)
}

impl<T: Scalar> Sweep<T> {
    /// `terms` lists `(bra unknown, operator, ket)` sandwiches; all unknowns
    /// must have their block on site 0 and orthogonal cores elsewhere.
    pub fn new(
        unknowns: Vec<BlockTt<T>>,
        terms: Vec<TermSpec<'_, T>>,
        local_cap: usize,
    ) -> Result<Self> {
        let order = unknowns[0].order();
        if unknowns.iter().any(|u| u.order() != order || u.position() != 0) {
            return Err(TtError::ShapeMismatch(
                "unknowns must share their order and start with the block on site 0".into(),
            ));
        }
        let mut built = Vec::with_capacity(terms.len());
        for (bra, op, ket) in terms {
            let ket_cores = match &ket {
                Ket::Unknown(i) => unknowns[*i].cores(),
                Ket::Fixed(v) => v.cores(),
            };
            let stack = EnvStack::build(unknowns[bra].cores(), op, ket_cores)?.with_local_cap(local_cap);
            built.push(Term { bra, ket, stack });
        }
        Ok(Self {
            unknowns,
            terms: built,
        })
    }

    pub fn order(&self) -> usize {
        self.unknowns[0].order()
    }

    pub fn into_unknowns(self) -> Vec<BlockTt<T>> {
        self.unknowns
    }

    pub fn local_dim(&self, u: usize, n: usize, two: bool) -> usize {
        self.unknowns[u].local_dim(n, two)
    }

    /// Dense local operator of term `t`.
    pub fn operator(&self, t: usize, n: usize, two: bool) -> Result<DMatrix<T>> {
        let s = &self.terms[t].stack;
        if two {
            s.effective_operator_two(n)
        } else {
            s.effective_operator(n)
        }
    }

    /// Local operator of term `t` applied to its fixed ket.
    pub fn rhs(&self, t: usize, n: usize, two: bool) -> Result<DVector<T>> {
        let term = &self.terms[t];
        let Ket::Fixed(v) = &term.ket else {
            return Err(TtError::ShapeMismatch(format!("term {t} has no fixed ket")));
        };
        if two {
            let (a, b) = (v.core(n), v.core(n + 1));
            let merged = a.left_unfolding() * b.right_unfolding();
            let core = Core3::new(
                a.left(),
                a.mode() * b.mode(),
                b.right(),
                crate::tensor::row_major(&merged),
            )?;
            term.stack.apply_two(n, &core)
        } else {
            term.stack.apply(n, v.core(n))
        }
    }

    /// Current block core of unknown `u` as a local matrix.
    pub fn current(&self, u: usize) -> DMatrix<T> {
        self.unknowns[u].local_matrix()
    }

    fn check_solution(&self, sol: &LocalSolution<T>, n: usize, two: bool) -> Result<()> {
        if sol.cores.len() != self.unknowns.len() {
            return Err(TtError::ShapeMismatch("one local matrix per unknown expected".into()));
        }
        for (u, w) in sol.cores.iter().enumerate() {
            let expect = (self.local_dim(u, n, two), self.unknowns[u].block_count());
            if w.shape() != expect {
                return Err(TtError::ShapeMismatch(format!(
                    "local solution {:?} for unknown {u}, expected {expect:?}",
                    w.shape()
                )));
            }
        }
        Ok(())
    }

    /// Writes a one-site solution at `n` and, if `step` is given, moves the
    /// blocks one site (`+1` right, `-1` left) and refreshes environments.
    fn write_one(&mut self, n: usize, sol: &LocalSolution<T>, step: Option<isize>, split: &BondSplit) -> Result<()> {
        self.check_solution(sol, n, false)?;
        for (u, w) in self.unknowns.iter_mut().zip(&sol.cores) {
            u.set_local_matrix(w)?;
            match step {
                Some(1) => u.shift_right(split)?,
                Some(_) => u.shift_left(split)?,
                None => {}
            }
        }
        let Self { unknowns, terms } = self;
        for term in terms.iter_mut() {
            term.stack.invalidate(n);
            let bra = unknowns[term.bra].cores();
            let ket = match &term.ket {
                Ket::Unknown(i) => unknowns[*i].cores(),
                Ket::Fixed(v) => v.cores(),
            };
            match step {
                Some(1) => {
                    term.stack.invalidate(n + 1);
                    term.stack.update_left(n, bra, ket)?;
                }
                Some(_) => {
                    term.stack.invalidate(n - 1);
                    term.stack.update_right(n, bra, ket)?;
                }
                None => {}
            }
        }
        Ok(())
    }

    /// Writes a two-site solution on `n, n + 1`, leaving the blocks on
    /// `n + 1` (`right`) or `n`.
    fn write_pair(&mut self, n: usize, sol: &LocalSolution<T>, right: bool, split: &BondSplit) -> Result<()> {
        self.check_solution(sol, n, true)?;
        for (u, w) in self.unknowns.iter_mut().zip(&sol.cores) {
            u.set_pair(n, w, right, split)?;
        }
        let Self { unknowns, terms } = self;
        for term in terms.iter_mut() {
            term.stack.invalidate(n);
            term.stack.invalidate(n + 1);
            let bra = unknowns[term.bra].cores();
            let ket = match &term.ket {
                Ket::Unknown(i) => unknowns[*i].cores(),
                Ket::Fixed(v) => v.cores(),
            };
            if right {
                term.stack.update_left(n, bra, ket)?;
            } else {
                term.stack.update_right(n + 1, bra, ket)?;
            }
        }
        Ok(())
    }
}

/// Runs sweeps until the objective settles and the residual is small, or
/// the sweep budget runs out. Every full sweep ends with a one-site solve
/// on site 0, whose objective drives the stopping test.
pub(crate) fn run<T: Scalar, P: Problem<T>>(
    sw: &mut Sweep<T>,
    problem: &mut P,
    config: &SweepConfig,
) -> Result<SolveReport> {
    let order = sw.order();
    let (two, split) = match config.rank {
        RankPolicy::Fixed(r) => (false, BondSplit::Fixed(r)),
        RankPolicy::Adaptive(p) => (true, BondSplit::Truncate(p)),
    };
    let mut last = problem.evaluate(sw)?.as_f64();
    let mut objective = vec![last];
    let mut residuals = Vec::new();
    let mut regularizations = 0;
    let mut converged = false;
    let mut sweeps = 0;

    for _ in 0..config.max_sweeps {
        sweeps += 1;
        let mut j = last;
        if two {
            for n in 0..order.saturating_sub(1) {
                let sol = problem.solve(sw, n, true)?;
                regularizations += sol.regularizations;
                j = sol.objective.as_f64();
                sw.write_pair(n, &sol, true, &split)?;
            }
            objective.push(j);
            for n in (0..order.saturating_sub(1)).rev() {
                let sol = problem.solve(sw, n, true)?;
                regularizations += sol.regularizations;
                j = sol.objective.as_f64();
                sw.write_pair(n, &sol, false, &split)?;
            }
        } else {
            for n in 0..order - 1 {
                let sol = problem.solve(sw, n, false)?;
                regularizations += sol.regularizations;
                j = sol.objective.as_f64();
                sw.write_one(n, &sol, Some(1), &split)?;
            }
            objective.push(j);
            for n in (1..order).rev() {
                let sol = problem.solve(sw, n, false)?;
                regularizations += sol.regularizations;
                j = sol.objective.as_f64();
                sw.write_one(n, &sol, Some(-1), &split)?;
            }
        }
        objective.push(j);

        let sol = problem.solve(sw, 0, false)?;
        regularizations += sol.regularizations;
        sw.write_one(0, &sol, None, &split)?;
        let closing = sol.objective.as_f64();
        let residual = problem.residual(&sw.unknowns)?;
        residuals.push(residual);
        let denom = closing.abs().max(last.abs()).max(problem.scale());
        let change = (closing - last).abs() / denom;
        last = closing;
        if change < config.tol && residual < config.residual_tol {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        solver: problem.name().to_string(),
        sense: problem.sense(),
        objective,
        residuals,
        final_objective: last,
        sweeps,
        converged,
        regularizations,
        ranks: sw.unknowns.iter().map(BlockTt::ranks).collect(),
        values: problem.values(),
    })
}

/// `‖x‖` computed through the train, for residual norms.
pub(crate) fn norm<T: Scalar>(x: &TtVector<T>) -> f64 {
    crate::algebra::tt_norm(x).as_f64()
}

/// Frobenius norm of an operator.
pub(crate) fn op_norm<T: Scalar>(a: &TtMatrix<T>) -> f64 {
    norm(&a.to_fused())
}

/// `‖a x − λ b x‖` with `b = I` when absent.
pub(crate) fn eig_residual<T: Scalar>(
    a: &TtMatrix<T>,
    b: Option<&TtMatrix<T>>,
    x: &TtVector<T>,
    lambda: T,
) -> Result<f64> {
    use crate::algebra::{mpo_apply_exact, tt_axpy};
    let ax = mpo_apply_exact(a, x)?;
    let bx = match b {
        Some(b) => mpo_apply_exact(b, x)?,
        None => x.clone(),
    };
    Ok(norm(&tt_axpy(&ax, -lambda, &bx)?))
}

pub(crate) fn check_square<T: Scalar>(a: &TtMatrix<T>, what: &str) -> Result<()> {
    if a.row_modes() != a.col_modes() {
        return Err(TtError::ShapeMismatch(format!(
            "{what} must be square with equal row and column modes, got {:?} × {:?}",
            a.row_modes(),
            a.col_modes()
        )));
    }
    Ok(())
}

pub(crate) fn too_many(k: usize, available: usize, site: usize) -> TtError {
    TtError::TooManyVectors {
        requested: k,
        available,
        site,
    }
}
