use alloc::string::String;
use core::fmt;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Weight outside {12, 16, 18, 20, 22, 26}.
    UnsupportedWeight(u32),
    /// Requested coefficient index or table size is out of range.
    OutOfRange { what: &'static str, value: f64, limit: f64 },
    /// Argument at (or numerically on top of) a pole.
    Pole { function: &'static str, re: f64, im: f64 },
    /// A precondition on the arguments is violated.
    Domain(String),
    /// An iterative or quadrature routine did not converge.
    NoConvergence { routine: &'static str, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedWeight(k) => write!(
                f,
                "weight {k}: no one-dimensional cusp-form space at level 1 \
                 (supported weights: 12, 16, 18, 20, 22, 26)"
            ),
            Error::OutOfRange { what, value, limit } => {
                write!(f, "{what} = {value} is out of range (limit {limit})")
            }
            Error::Pole { function, re, im } => {
                write!(f, "{function}: pole at {re}{im:+}i")
            }
            Error::Domain(msg) => write!(f, "{msg}"),
            Error::NoConvergence { routine, detail } => {
                write!(f, "{routine} did not converge: {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}
