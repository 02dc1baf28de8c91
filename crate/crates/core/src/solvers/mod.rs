//! Alternating optimization over tensor trains.
//!
//! Every solver keeps its unknowns as block trains and sweeps a local
//! problem from left to right and back. With [`RankPolicy::Fixed`] one core
//! is optimized at a time (ALS) and the ranks stay put; with
//! [`RankPolicy::Adaptive`] two neighbouring cores are merged, solved and
//! split by a truncated SVD (MALS), so ranks follow the solution.

mod cca;
mod eig;
mod engine;
mod gevd;
mod linsolve;
mod report;
mod svd;

pub use cca::{cca, CcaOptions, CcaResult};
pub use eig::{eig_block, eig_min, BlockEigResult, EigResult};
pub use gevd::gevd;
pub use linsolve::{linsolve, LinsolveResult};
pub use report::{Sense, SolveReport};
pub use svd::{svd_dominant, svd_small_k, SmallSvdResult, SvdResult};

use crate::env::DEFAULT_LOCAL_CAP;
use crate::error::{Result, TtError};
use crate::tt::TruncationPolicy;

/// How bond ranks of the unknowns are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankPolicy {
    /// One-site sweeps with every bond capped at this rank.
    Fixed(usize),
    /// Two-site sweeps; merged cores are split with this policy, the
    /// tolerance taken relative to the merged core's norm.
    Adaptive(TruncationPolicy),
}

/// Sweep controls shared by all solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub max_sweeps: usize,
    /// Relative change of the objective over one full sweep.
    pub tol: f64,
    /// Bound on the solver-specific residual.
    pub residual_tol: f64,
    pub local_cap: usize,
    pub rank: RankPolicy,
    /// Seed of the random initial guess.
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 20,
            tol: 1e-8,
            residual_tol: 1e-8,
            local_cap: DEFAULT_LOCAL_CAP,
            rank: RankPolicy::Fixed(4),
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn fixed(rank: usize) -> Self {
        Self {
            rank: RankPolicy::Fixed(rank),
            ..Self::default()
        }
    }

    pub fn adaptive(policy: TruncationPolicy) -> Self {
        Self {
            rank: RankPolicy::Adaptive(policy),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_sweeps(mut self, sweeps: usize) -> Self {
        self.max_sweeps = sweeps;
        self
    }

    /// Sets both the objective and the residual tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.residual_tol = tol;
        self
    }

    pub fn with_local_cap(mut self, cap: usize) -> Self {
        self.local_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(TtError::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        for (name, v) in [("tol", self.tol), ("residual_tol", self.residual_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TtError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.local_cap == 0 {
            return Err(TtError::InvalidConfig("local_cap must be positive".into()));
        }
        if self.rank == RankPolicy::Fixed(0) {
            return Err(TtError::InvalidConfig("fixed rank must be positive".into()));
        }
        Ok(())
    }

    /// Starting rank of the random guess.
    pub(crate) fn initial_rank(&self, k: usize) -> usize {
        match self.rank {
            RankPolicy::Fixed(r) => r,
            RankPolicy::Adaptive(p) => {
                let r = k + 1;
                p.max_rank().map_or(r, |cap| r.min(cap))
            }
        }
    }
}
