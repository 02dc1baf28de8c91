//! Tensor-train compression and alternating-sweep solvers.
//!
//! Dense tensors ([`DenseTensor`]) are the exact reference layer. Vectors and
//! matrices are compressed into [`TtVector`] (MPS) and [`TtMatrix`] (MPO)
//! trains, combined with the routines in [`algebra`], folded into quantized
//! trains by [`tensorize`], and optimized in place by the sweep solvers in
//! [`solvers`].
//!
//! All indices are 0-based and multi-indices are linearized big-endian
//! (last index fastest).

pub mod algebra;
pub mod env;
pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod random;
pub mod scalar;
pub mod solvers;
pub mod tensor;
pub mod tensorize;
pub mod tt;

pub use error::{Result, TtError};
pub use random::Rng;
pub use scalar::Scalar;
pub use tensor::{BlockMatrix, DenseTensor};
pub use tt::{BlockTt, Core3, Core4, TruncationPolicy, TtMatrix, TtVector};

pub type DenseTensorF64 = DenseTensor<f64>;
pub type TtVectorF64 = TtVector<f64>;
pub type TtMatrixF64 = TtMatrix<f64>;
pub type BlockTtF64 = BlockTt<f64>;

pub type DenseTensorF32 = DenseTensor<f32>;
pub type TtVectorF32 = TtVector<f32>;
pub type TtMatrixF32 = TtMatrix<f32>;
pub type BlockTtF32 = BlockTt<f32>;
