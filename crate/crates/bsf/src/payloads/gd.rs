// SPDX-License-Identifier: Apache-2.0 OR MIT

use std::ops::Range;

use bsf_core::{BsfProgram, WireSize};

use super::matrix::{dot, norm2, Matrix};
use super::PayloadError;

/// Minimise `f(x) = ½‖A·x − b‖²` by fixed-step gradient descent.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresProblem {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub step_size: f64,
    pub x0: Vec<f64>,
}

impl LeastSquaresProblem {
    pub fn new(a: Matrix, b: Vec<f64>, x0: Vec<f64>, step_size: f64) -> Result<Self, PayloadError> {
        if b.len() != a.rows() {
            return Err(PayloadError::Dimension(format!(
                "A has {} rows but b has {} entries",
                a.rows(),
                b.len()
            )));
        }
        if x0.len() != a.cols() {
            return Err(PayloadError::Dimension(format!(
                "A has {} columns but x0 has {} entries",
                a.cols(),
                x0.len()
            )));
        }
        if !(step_size.is_finite() && step_size > 0.0) {
            return Err(PayloadError::InvalidArgument(format!(
                "step size {step_size} must be positive"
            )));
        }
        Ok(Self { a, b, step_size, x0 })
    }

    /// Uses step `1/λ`, where `λ` estimates the largest eigenvalue of `AᵀA`.
    /// Descent is monotone for any step below `2/λ_max`.
    pub fn with_safe_step(a: Matrix, b: Vec<f64>, x0: Vec<f64>) -> Result<Self, PayloadError> {
        let lambda = largest_eigenvalue_ata(&a);
        let step = if lambda > 0.0 { 1.0 / lambda } else { 1.0 };
        Self::new(a, b, x0, step)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = self.a.mul_vec(x).iter().zip(&self.b).map(|(p, q)| p - q).collect();
        0.5 * dot(&r, &r)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self.a.mul_vec(x).iter().zip(&self.b).map(|(p, q)| p - q).collect();
        self.a.tr_mul_vec(&r)
    }
}

/// Power iteration on `AᵀA`.
pub(crate) fn largest_eigenvalue_ata(a: &Matrix) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    // slightly uneven start so it is unlikely to be orthogonal to the top eigenvector
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let norm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w = a.tr_mul_vec(&a.mul_vec(&v));
        let next = norm2(&w);
        if next == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / next).collect();
        let converged = (next - lambda).abs() <= 1e-12 * next;
        lambda = next;
        if converged {
            break;
        }
    }
    lambda
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientDescentProgram {
    problem: LeastSquaresProblem,
    tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdState {
    pub x: Vec<f64>,
    /// `‖∇f(x)‖₂`.
    pub grad_norm: f64,
    /// `f` at each iterate the workers evaluated, in order.
    pub objective_history: Vec<f64>,
}

pub type GdOutput = GdState;

/// Contribution of one row slice: `A_sᵀ(A_s·x − b_s)` and `‖A_s·x − b_s‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct GdPartial {
    pub grad: Vec<f64>,
    pub sq_residual: f64,
}

impl WireSize for GdPartial {
    fn wire_size(&self) -> usize {
        self.grad.wire_size() + self.sq_residual.wire_size()
    }
}

impl GradientDescentProgram {
    pub fn new(problem: LeastSquaresProblem, tol: f64) -> Result<Self, PayloadError> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(PayloadError::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        Ok(Self { problem, tol })
    }

    pub fn problem(&self) -> &LeastSquaresProblem {
        &self.problem
    }
}

impl BsfProgram for GradientDescentProgram {
    type State = GdState;
    type Order = Vec<f64>;
    type Partial = GdPartial;
    type Output = GdOutput;
    type Error = PayloadError;

    fn init(&self) -> Result<GdState, PayloadError> {
        let x = self.problem.x0.clone();
        Ok(GdState {
            grad_norm: norm2(&self.problem.gradient(&x)),
            x,
            objective_history: Vec::new(),
        })
    }

    fn n_items(&self) -> usize {
        self.problem.a.rows()
    }

    fn make_order(&self, state: &GdState) -> Vec<f64> {
        state.x.clone()
    }

    fn worker_step(&self, x: &Vec<f64>, rows: Range<usize>, _rank: usize) -> Result<GdPartial, PayloadError> {
        let a = &self.problem.a;
        let mut grad = vec![0.0; a.cols()];
        let mut sq_residual = 0.0;
        for i in rows {
            let row = a.row(i);
            let r = dot(row, x) - self.problem.b[i];
            sq_residual += r * r;
            for (g, aij) in grad.iter_mut().zip(row) {
                *g += aij * r;
            }
        }
        Ok(GdPartial { grad, sq_residual })
    }

    fn reduce(&self, partials: Vec<GdPartial>, mut state: GdState) -> Result<GdState, PayloadError> {
        let n = self.problem.a.cols();
        let mut grad = vec![0.0; n];
        let mut sq_residual = 0.0;
        for p in &partials {
            if p.grad.len() != n {
                return Err(PayloadError::Dimension(format!(
                    "partial gradient has {} entries, expected {n}",
                    p.grad.len()
                )));
            }
            for (g, pg) in grad.iter_mut().zip(&p.grad) {
                *g += pg;
            }
            sq_residual += p.sq_residual;
        }
        state.objective_history.push(0.5 * sq_residual);
        state.grad_norm = norm2(&grad);
        // a converged iterate is kept as is
        if state.grad_norm >= self.tol {
            let step = self.problem.step_size;
            for (x, g) in state.x.iter_mut().zip(&grad) {
                *x -= step * g;
            }
        }
        Ok(state)
    }

    fn exit_condition(&self, state: &GdState) -> bool {
        state.grad_norm < self.tol
    }

    fn finalize(&self, state: GdState) -> GdOutput {
        state
    }
}
