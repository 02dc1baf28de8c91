use crate::error::{Result, TtError};

/// Accuracy target for TT construction and rounding.
///
/// A relative tolerance `ε` bounds the Frobenius error of the whole train by
/// `ε‖x‖`; it is split evenly across the `N − 1` bonds, so each truncated SVD
/// may discard a tail of norm at most `ε‖x‖/√(N−1)`. An optional cap limits
/// every bond rank on top of that.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    rel_tol: f64,
    max_rank: Option<usize>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

impl TruncationPolicy {
    pub fn new(rel_tol: f64, max_rank: Option<usize>) -> Result<Self> {
        if !rel_tol.is_finite() || rel_tol < 0.0 {
            return Err(TtError::InvalidPolicy(format!(
                "relative tolerance must be finite and nonnegative, got {rel_tol}"
            )));
        }
        if max_rank == Some(0) {
            return Err(TtError::InvalidPolicy("rank cap must be positive".into()));
        }
        Ok(Self { rel_tol, max_rank })
    }

    /// No truncation beyond numerically zero singular values.
    pub fn exact() -> Self {
        Self {
            rel_tol: 0.0,
            max_rank: None,
        }
    }

    pub fn tol(rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, None)
    }

    pub fn with_max_rank(self, cap: usize) -> Result<Self> {
        Self::new(self.rel_tol, Some(cap))
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.max_rank
    }

    /// Per-bond tail budget `ε·norm/√(bonds)`.
    pub(crate) fn bond_delta(&self, norm: f64, bonds: usize) -> f64 {
        self.rel_tol * norm / (bonds.max(1) as f64).sqrt()
    }
}
