// SPDX-License-Identifier: Apache-2.0 OR MIT

use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the analytic model and the simulator.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A time parameter is negative, NaN or infinite.
    InvalidParameter { name: &'static str, value: f64 },
    /// Worker count below one (or not finite).
    InvalidWorkers(f64),
    /// The quantity is undefined for the given parameters.
    Undefined(&'static str),
    /// A requested `K` range contains no points.
    EmptyRange { min: u64, max: u64, step: u64 },
    /// A per-worker compute list does not have one entry per worker.
    ComputeLength { expected: usize, found: usize },
    /// Zero iterations requested.
    NoIterations,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}: must be finite and nonnegative")
            }
            Error::InvalidWorkers(k) => write!(f, "invalid worker count {k}: must be >= 1"),
            Error::Undefined(what) => write!(f, "{what}"),
            Error::EmptyRange { min, max, step } => {
                write!(f, "empty worker range {min}..={max} step {step}")
            }
            Error::ComputeLength { expected, found } => write!(
                f,
                "per-worker compute list has {found} entries, expected {expected}"
            ),
            Error::NoIterations => write!(f, "iteration count must be at least 1"),
        }
    }
}

impl core::error::Error for Error {}
