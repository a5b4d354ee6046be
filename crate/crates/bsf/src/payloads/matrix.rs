// SPDX-License-Identifier: Apache-2.0 OR MIT

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LeastSquaresProblem, LinearSystem, PayloadError};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, PayloadError> {
        if data.len() != rows * cols {
            return Err(PayloadError::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PayloadError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PayloadError::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ·y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Random `n×n` system with off-diagonal entries in `[-1, 1]` and diagonal
/// entries in `[n, n + 1)`, so every row is strictly diagonally dominant.
/// `b` is uniform in `[-n, n]` and `x0 = 0`.
pub fn diagonally_dominant_system(n: usize, seed: u64) -> LinearSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = if i == j {
                n as f64 + rng.gen::<f64>()
            } else {
                rng.gen_range(-1.0..=1.0)
            };
        }
    }
    let b = (0..n).map(|_| rng.gen_range(-(n as f64)..=n as f64)).collect();
    LinearSystem::new(a, b, vec![0.0; n]).expect("generated dimensions agree")
}

/// Random overdetermined `m×n` least-squares problem with a safe step size.
pub fn random_least_squares(m: usize, n: usize, seed: u64) -> LeastSquaresProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..m * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let a = Matrix::new(m, n, data).expect("generated dimensions agree");
    let b = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    LeastSquaresProblem::with_safe_step(a, b, vec![0.0; n]).expect("generated dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, -1.0]), [-1.0, -1.0, -1.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 0.0, 1.0]), [6.0, 8.0]);
        assert!(Matrix::new(2, 2, vec![1.0]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn generator_is_seeded_and_dominant() {
        let s1 = diagonally_dominant_system(16, 7);
        let s2 = diagonally_dominant_system(16, 7);
        assert_eq!(s1, s2);
        assert_ne!(s1, diagonally_dominant_system(16, 8));
        for i in 0..16 {
            let row = s1.a.row(i);
            let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
            assert!(row[i].abs() > off);
        }
    }
}
