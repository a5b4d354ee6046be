// SPDX-License-Identifier: Apache-2.0 OR MIT

use std::ops::Range;

use bsf_core::BsfProgram;

use super::matrix::{norm_inf, Matrix};
use super::PayloadError;

/// `A·x = b` with a starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Vec<f64>, x0: Vec<f64>) -> Result<Self, PayloadError> {
        if !a.is_square() {
            return Err(PayloadError::Dimension(format!(
                "system matrix is {}x{}, expected square",
                a.rows(),
                a.cols()
            )));
        }
        if b.len() != a.rows() || x0.len() != a.rows() {
            return Err(PayloadError::Dimension(format!(
                "n = {}, but b has {} and x0 has {} entries",
                a.rows(),
                b.len(),
                x0.len()
            )));
        }
        Ok(Self { a, b, x0 })
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// `‖A·x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let ax = self.a.mul_vec(x);
        norm_inf(&ax.iter().zip(&self.b).map(|(p, q)| p - q).collect::<Vec<_>>())
    }
}

/// Jacobi iteration. The order is the current iterate; worker `i` returns
/// the updated components of its row slice.
#[derive(Clone, Debug)]
pub struct JacobiProgram {
    sys: LinearSystem,
    tol: f64,
    record_iterates: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiState {
    pub x: Vec<f64>,
    /// Residual of `x`.
    pub residual: f64,
    /// Residual after each iteration.
    pub residual_history: Vec<f64>,
    /// Filled when iterate recording is on.
    pub iterates: Vec<Vec<f64>>,
}

pub type JacobiOutput = JacobiState;

impl JacobiProgram {
    /// Rejects zero diagonal entries and rows that are not strictly
    /// diagonally dominant.
    pub fn new(sys: LinearSystem, tol: f64) -> Result<Self, PayloadError> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(PayloadError::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        for i in 0..sys.n() {
            let row = sys.a.row(i);
            if row[i] == 0.0 {
                return Err(PayloadError::ZeroDiagonal { row: i });
            }
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.abs())
                .sum();
            if row[i].abs() <= off {
                return Err(PayloadError::NotDiagonallyDominant { row: i });
            }
        }
        Ok(Self {
            sys,
            tol,
            record_iterates: false,
        })
    }

    /// Keep every iterate in the state.
    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn system(&self) -> &LinearSystem {
        &self.sys
    }
}

impl BsfProgram for JacobiProgram {
    type State = JacobiState;
    type Order = Vec<f64>;
    type Partial = Vec<f64>;
    type Output = JacobiOutput;
    type Error = PayloadError;

    fn init(&self) -> Result<JacobiState, PayloadError> {
        Ok(JacobiState {
            residual: self.sys.residual(&self.sys.x0),
            x: self.sys.x0.clone(),
            residual_history: Vec::new(),
            iterates: Vec::new(),
        })
    }

    fn n_items(&self) -> usize {
        self.sys.n()
    }

    fn make_order(&self, state: &JacobiState) -> Vec<f64> {
        state.x.clone()
    }

    fn worker_step(&self, x: &Vec<f64>, rows: Range<usize>, _rank: usize) -> Result<Vec<f64>, PayloadError> {
        Ok(rows
            .map(|i| {
                let row = self.sys.a.row(i);
                let mut sigma = 0.0;
                for (j, (a, xj)) in row.iter().zip(x).enumerate() {
                    if j != i {
                        sigma += a * xj;
                    }
                }
                (self.sys.b[i] - sigma) / row[i]
            })
            .collect())
    }

    fn reduce(&self, partials: Vec<Vec<f64>>, mut state: JacobiState) -> Result<JacobiState, PayloadError> {
        let x = partials.concat();
        if x.len() != self.sys.n() {
            return Err(PayloadError::Dimension(format!(
                "gathered {} components, expected {}",
                x.len(),
                self.sys.n()
            )));
        }
        state.residual = self.sys.residual(&x);
        state.residual_history.push(state.residual);
        if self.record_iterates {
            state.iterates.push(x.clone());
        }
        state.x = x;
        Ok(state)
    }

    fn exit_condition(&self, state: &JacobiState) -> bool {
        state.residual < self.tol
    }

    fn finalize(&self, state: JacobiState) -> JacobiOutput {
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{run_bsf, RunConfig};

    #[test]
    fn identity_converges_in_one_iteration() {
        let b = vec![3.0, -1.5, 2.0, 7.0];
        let sys = LinearSystem::new(Matrix::identity(4), b.clone(), vec![0.0; 4]).unwrap();
        let out = run_bsf(&JacobiProgram::new(sys, 1e-12).unwrap(), &RunConfig::new(2)).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.output.x, b);
    }

    #[test]
    fn two_by_two_matches_direct_solve() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 5.0]]).unwrap();
        let sys = LinearSystem::new(a, vec![9.0, 12.0], vec![0.0; 2]).unwrap();
        let out = run_bsf(&JacobiProgram::new(sys, 1e-10).unwrap(), &RunConfig::new(2)).unwrap();
        assert!(out.converged());
        // Cramer's rule: det = 18
        assert!((out.output.x[0] - 33.0 / 18.0).abs() < 1e-10);
        assert!((out.output.x[1] - 30.0 / 18.0).abs() < 1e-10);
    }

    #[test]
    fn construction_errors() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 5.0]]).unwrap();
        let sys = LinearSystem::new(a, vec![1.0, 1.0], vec![0.0; 2]).unwrap();
        assert_eq!(JacobiProgram::new(sys, 1e-8).unwrap_err(), PayloadError::ZeroDiagonal { row: 0 });

        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 5.0]]).unwrap();
        let sys = LinearSystem::new(a, vec![1.0, 1.0], vec![0.0; 2]).unwrap();
        assert_eq!(
            JacobiProgram::new(sys, 1e-8).unwrap_err(),
            PayloadError::NotDiagonallyDominant { row: 0 }
        );

        assert!(LinearSystem::new(Matrix::zeros(2, 3), vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(LinearSystem::new(Matrix::identity(2), vec![0.0; 3], vec![0.0; 2]).is_err());
        let sys = LinearSystem::new(Matrix::identity(2), vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert!(JacobiProgram::new(sys, 0.0).is_err());
    }
}
