//! Correction procedure via reconstruction (flux reconstruction) in
//! summation-by-parts form for 1D scalar conservation laws, with a conservative
//! artificial dissipation operator and an adaptive choice of its strength that
//! makes explicit Euler steps energy stable.

pub mod config;
pub mod dissipation;
pub mod error;
pub mod io;
pub mod legendre;
pub mod sbp;
pub mod semidisc;
pub mod time;

pub use error::{Error, Result};
