//! Multimode Gaussian states, symplectic operations and Gaussian channels.

mod channel;
mod linalg;
mod state;

pub use channel::{GaussianChannel, SymplecticOp, SYMPLECTIC_TOL};
pub use linalg::{omega, rotation, symplectic_eigenvalues, ADMISSIBILITY_TOL, SYMMETRY_TOL, VACUUM_VARIANCE};
pub use state::GaussianState;

/// Squeezing parameter `r` for a level of `db` decibels (`e^{-2r} = 10^{-db/10}`).
pub fn db_to_r(db: f64) -> f64 {
    db / 20.0 * std::f64::consts::LN_10
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
