//! Gaussian-state simulator for ((2,3)) threshold continuous-variable quantum
//! secret sharing, its security analysis, and its use for dense coding and
//! erasure correction.

pub mod error;
pub mod exec;
pub mod gaussian;
pub mod metrics;

pub use error::{QssError, Result};
pub use exec::Exec;
pub use gaussian::{GaussianChannel, GaussianState, SymplecticOp};
pub mod dense;
pub mod erasure;
pub mod numerics;
pub mod protocol;
pub mod security;
