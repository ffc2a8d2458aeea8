//! Evaluation of L-functions attached to level-one Hecke eigenforms and of
//! their derivatives `L_f^(m)(s)`.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It provides
//!
//! - exact Fourier coefficients of the six level-one eigenforms that span a
//!   one-dimensional cusp-form space ([`forms`]),
//! - complex log-gamma, polygamma and incomplete gamma ([`special`]),
//! - the functional-equation factor `chi_f`, its derivatives and the
//!   correction integrals `gamma_j` ([`chifactor`]),
//! - smooth cutoffs and their Mellin moments ([`smoothing`]),
//! - four evaluators for `L_f^(m)(s)` ([`lseries`]),
//! - the mean-square experiment ([`meanvalue`]).
//!
//! IO, file formats, threading and the command-line interface live in the
//! companion `cuspl` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chifactor;
mod error;
pub mod forms;
pub mod jet;
pub mod lseries;
pub mod meanvalue;
mod ntt;
pub mod quad;
pub mod smoothing;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use chifactor::{ChiContext, ContourSpec};
pub use forms::CuspForm;
pub use lseries::{EvalRequest, EvalResult, Method};
pub use meanvalue::{MomentReport, RankinEstimate};
pub use quad::QuadratureSpec;
pub use smoothing::SmoothingFunction;
pub use special::PrecisionPolicy;
