//! Tensor-train containers: vectors (MPS), matrices (MPO) and block trains.

mod block;
mod core;
mod matrix;
mod policy;
mod vector;

pub use self::block::{BlockTt, BondSplit};
pub use self::core::{Core3, Core4};
pub use self::matrix::TtMatrix;
pub use self::policy::TruncationPolicy;
pub use self::vector::{rank_bounds, TtVector};

#[allow(unused_imports)]
pub(crate) use self::vector::contract_partial;
