// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Reference iterative programs: Jacobi iteration, least-squares gradient
//! descent, and a synthetic payload with configurable cost.

mod gd;
mod jacobi;
mod matrix;
mod synthetic;

pub use gd::{GdOutput, GdPartial, GdState, GradientDescentProgram, LeastSquaresProblem};
pub use jacobi::{JacobiOutput, JacobiProgram, JacobiState, LinearSystem};
pub use matrix::{diagonally_dominant_system, random_least_squares, Matrix};
pub use synthetic::{SyntheticProgram, SYNTHETIC_ITEMS};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PayloadError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("matrix is not strictly diagonally dominant in row {row}")]
    NotDiagonallyDominant { row: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
