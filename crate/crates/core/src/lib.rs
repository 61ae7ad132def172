//! Truncated odd-class pseudo-differential calculus on the circle.
//!
//! The crate implements, at finite truncation, the operator machinery of the
//! h-deformed KP hierarchy on `S^1`: matrix-valued trigonometric polynomial
//! coefficients, the one-variable formal symbol ring with its D/S splitting,
//! the graded h-series algebra with its Birkhoff-Mulase factorization, the KP
//! flows with dual-number time jets, the Fourier-integral-operator group
//! `DO^{0,*} ⋊ Diff_+(S^1)` with a spectral-matrix numeric oracle, and the
//! Bell-polynomial Taylor bridge.
//!
//! All values are immutable after construction and all operations are pure,
//! so anything here can be shared freely across threads. With the `parallel`
//! feature (on by default) the embarrassingly parallel kernels run on rayon;
//! without it they fall back to sequential loops behind the same API.

pub mod bell;
pub mod error;
pub mod exec;
pub mod fio;
pub mod hseries;
pub mod jet;
pub mod kp;
pub mod sample;
pub mod scalar;
pub mod spectral;
pub mod symbol;
pub mod taylor;
pub mod trig;

pub use error::Error;
pub use scalar::{Dual, Scalar, C64};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
