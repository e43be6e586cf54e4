//! Spectral solvers for the focusing fractional nonlinear Schrödinger
//! equation in a harmonic trap,
//!
//! ```text
//! i psi_t = (-Delta)^s psi + V(x) psi - |psi|^{2 sigma} psi,   x in [-L, L) periodic,
//! ```
//!
//! with ground states from normalized gradient flows ([`groundstate`]), time
//! evolution by Strang split-step Fourier ([`dynamics`]), scalar diagnostics
//! ([`diagnostics`]) and a reproducible experiment harness ([`experiments`]).

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod parallel;
pub mod potential;
pub mod spectral;

pub use num_complex::Complex64;
pub use diagnostics::{Energies, StabilityReference, TimeSeriesRecord};
pub use dynamics::{EvolveConfig, Evolution, ModelParams};
pub use error::{BlowUp, Error, Result};
pub use field::{ComplexField, RealField, Sampled};
pub use grid::Grid;
pub use groundstate::{Constraint, GroundStateResult, InitialGuess, NgfConfig};
pub use potential::Potential;
pub use spectral::{Spectral, Spectrum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
