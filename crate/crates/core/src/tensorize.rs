//! Folding vectors and matrices into long trains of small "virtual" modes
//! (quantization) and unfolding them back.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;
use crate::tt::{BlockTt, TruncationPolicy, TtMatrix, TtVector};

/// Factorization of each physical mode into virtual modes.
///
/// Virtual modes are listed per physical mode, most significant first, so
/// a big-endian reshape maps physical index `iₙ` to its mixed-radix digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantizationPlan {
    base: usize,
    factors: Vec<Vec<usize>>,
}

impl QuantizationPlan {
    pub fn new(base: usize, factors: Vec<Vec<usize>>) -> Result<Self> {
        if base < 2 {
            return Err(TtError::InvalidConfig(format!("base must be at least 2, got {base}")));
        }
        if factors.is_empty() || factors.iter().any(|f| f.is_empty() || f.contains(&0)) {
            return Err(TtError::InvalidConfig("every physical mode needs positive factors".into()));
        }
        for f in &factors {
            let first_one = f.iter().position(|&x| x == 1).unwrap_or(f.len());
            if f[first_one..].iter().any(|&x| x != 1) {
                return Err(TtError::InvalidConfig(format!(
                    "unit factors may only trail a factorization, got {f:?}"
                )));
            }
        }
        Ok(Self { base, factors })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Virtual factors of each physical mode.
    pub fn factors(&self) -> &[Vec<usize>] {
        &self.factors
    }

    /// Physical mode sizes.
    pub fn physical(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.iter().product()).collect()
    }

    /// All virtual modes, concatenated in physical-mode order.
    pub fn modes(&self) -> Vec<usize> {
        self.factors.iter().flatten().copied().collect()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(Vec::len).sum()
    }

    /// Pads a single-mode plan with trailing unit factors.
    pub fn padded(&self, len: usize) -> Result<Self> {
        if self.factors.len() != 1 {
            return Err(TtError::InvalidConfig("only single-mode plans can be padded".into()));
        }
        let mut f = self.factors[0].clone();
        if f.len() > len {
            return Err(TtError::InvalidConfig(format!(
                "plan of order {} cannot be padded to {len}",
                f.len()
            )));
        }
        f.resize(len, 1);
        Self::new(self.base, vec![f])
    }
}

impl fmt::Display for QuantizationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .factors
            .iter()
            .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join("x"))
            .collect();
        write!(f, "base={};{}", self.base, groups.join(";"))
    }
}

fn factor_size(size: usize, base: usize, mixed_radix: bool) -> Result<Vec<usize>> {
    if size == 0 {
        return Err(TtError::NotFactorizable { size, base });
    }
    if size == 1 {
        return Ok(vec![1]);
    }
    let mut out = Vec::new();
    let mut rest = size;
    while rest.is_multiple_of(base) {
        out.push(base);
        rest /= base;
    }
    if rest != 1 {
        if !mixed_radix {
            return Err(TtError::NotFactorizable { size, base });
        }
        let mut p = 2;
        let mut primes = Vec::new();
        while p * p <= rest {
            while rest.is_multiple_of(p) {
                primes.push(p);
                rest /= p;
            }
            p += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        out.extend(primes);
    }
    Ok(out)
}

/// Finest plan for a vector of `len` entries: as many factors `base` as
/// possible. With `mixed_radix`, the remaining cofactor is split into its
/// prime factors in ascending order; otherwise a cofactor is an error.
pub fn plan_auto(len: usize, base: usize, mixed_radix: bool) -> Result<QuantizationPlan> {
    plan_shape(&[len], base, mixed_radix)
}

/// [`plan_auto`] applied to every physical mode.
pub fn plan_shape(shape: &[usize], base: usize, mixed_radix: bool) -> Result<QuantizationPlan> {
    if base < 2 {
        return Err(TtError::InvalidConfig(format!("base must be at least 2, got {base}")));
    }
    let factors = shape
        .iter()
        .map(|&s| factor_size(s, base, mixed_radix))
        .collect::<Result<_>>()?;
    QuantizationPlan::new(base, factors)
}

/// Row and column plans for an `m × n` matrix, padded with unit factors to
/// a common order.
pub fn plan_matrix(
    rows: usize,
    cols: usize,
    base: usize,
    mixed_radix: bool,
) -> Result<(QuantizationPlan, QuantizationPlan)> {
    let r = plan_auto(rows, base, mixed_radix)?;
    let c = plan_auto(cols, base, mixed_radix)?;
    let len = r.order().max(c.order());
    Ok((r.padded(len)?, c.padded(len)?))
}

/// Reshapes a dense tensor into the plan's virtual modes and compresses it.
pub fn quantize_tensor<T: Scalar>(
    t: &DenseTensor<T>,
    plan: &QuantizationPlan,
    policy: &TruncationPolicy,
) -> Result<TtVector<T>> {
    if t.shape() != plan.physical().as_slice() {
        return Err(TtError::ShapeMismatch(format!(
            "tensor shape {:?} does not match plan sizes {:?}",
            t.shape(),
            plan.physical()
        )));
    }
    TtVector::from_dense(&t.clone().reshape(plan.modes())?, policy)
}

/// QTT of a vector.
pub fn quantize_vector<T: Scalar>(
    v: &[T],
    plan: &QuantizationPlan,
    policy: &TruncationPolicy,
) -> Result<TtVector<T>> {
    let t = DenseTensor::new(vec![v.len()], v.to_vec())?;
    quantize_tensor(&t, plan, policy)
}

/// QTT-MPO of a matrix; the plans must have equal order.
pub fn quantize_matrix<T: Scalar>(
    m: &DMatrix<T>,
    row_plan: &QuantizationPlan,
    col_plan: &QuantizationPlan,
    policy: &TruncationPolicy,
) -> Result<TtMatrix<T>> {
    if row_plan.physical() != [m.nrows()] || col_plan.physical() != [m.ncols()] {
        return Err(TtError::ShapeMismatch(format!(
            "{}×{} matrix does not match plans {row_plan} and {col_plan}",
            m.nrows(),
            m.ncols()
        )));
    }
    TtMatrix::from_dense(m, &row_plan.modes(), &col_plan.modes(), policy)
}

/// Dense tensor over the plan's physical modes.
pub fn dequantize_tensor<T: Scalar>(x: &TtVector<T>, plan: &QuantizationPlan) -> Result<DenseTensor<T>> {
    if x.modes() != plan.modes() {
        return Err(TtError::ShapeMismatch(format!(
            "train modes {:?} do not match plan {plan}",
            x.modes()
        )));
    }
    x.to_dense().reshape(plan.physical())
}

/// Flat vector of a QTT.
pub fn dequantize_vector<T: Scalar>(x: &TtVector<T>, plan: &QuantizationPlan) -> Result<DVector<T>> {
    Ok(dequantize_tensor(x, plan)?.to_vector())
}

/// Dense matrix of a QTT-MPO.
pub fn dequantize_matrix<T: Scalar>(
    a: &TtMatrix<T>,
    row_plan: &QuantizationPlan,
    col_plan: &QuantizationPlan,
) -> Result<DMatrix<T>> {
    if a.row_modes() != row_plan.modes() || a.col_modes() != col_plan.modes() {
        return Err(TtError::ShapeMismatch("operator modes do not match the plans".into()));
    }
    Ok(a.to_dense())
}

/// Storage accounting for a train.
#[derive(Clone, Debug, PartialEq)]
pub struct StorageReport {
    pub kind: &'static str,
    pub order: usize,
    pub modes: Vec<usize>,
    pub ranks: Vec<usize>,
    /// Entries of the uncompressed object.
    pub raw: u128,
    /// Stored entries `Σ R_{n−1}IₙRₙ` (with `IₙJₙ` for operators).
    pub params: u128,
}

impl StorageReport {
    pub fn for_vector<T: Scalar>(x: &TtVector<T>) -> Self {
        Self {
            kind: "tt_vector",
            order: x.order(),
            modes: x.modes(),
            ranks: x.ranks(),
            raw: x.modes().iter().map(|&m| m as u128).product(),
            params: x.param_count() as u128,
        }
    }

    pub fn for_matrix<T: Scalar>(a: &TtMatrix<T>) -> Self {
        let mut modes = Vec::with_capacity(2 * a.order());
        for c in a.cores() {
            modes.push(c.rows());
            modes.push(c.cols());
        }
        Self {
            kind: "tt_matrix",
            order: a.order(),
            raw: modes.iter().map(|&m| m as u128).product(),
            modes,
            ranks: a.ranks(),
            params: a.param_count() as u128,
        }
    }

    /// Block trains count all `K` tensors as raw data.
    pub fn for_block<T: Scalar>(b: &BlockTt<T>) -> Self {
        let modes = b.modes();
        Self {
            kind: "block_tt",
            order: b.order(),
            raw: modes.iter().map(|&m| m as u128).product::<u128>() * b.block_count() as u128,
            modes,
            ranks: b.ranks(),
            params: b.param_count() as u128,
        }
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(1)
    }

    /// `params / raw`; below one means the train is smaller.
    pub fn compression_ratio(&self) -> f64 {
        self.params as f64 / self.raw as f64
    }

    /// One `key=value` pair per line.
    pub fn to_key_value(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        format!(
            "kind={}\norder={}\nmodes={}\nranks={}\nmax_rank={}\nraw_elements={}\nparameters={}\ncompression_ratio={:.6e}\n",
            self.kind,
            self.order,
            join(&self.modes),
            join(&self.ranks),
            self.max_rank(),
            self.raw,
            self.params,
            self.compression_ratio()
        )
    }
}
