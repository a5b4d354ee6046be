// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Direct solvers used as oracles for the iterative payloads.

#![allow(dead_code)]

use bsf::payloads::Matrix;

/// Solves `A·x = b` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col] != 0.0, "singular matrix");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Least-squares solution through the normal equations `AᵀA·x = Aᵀb`.
pub fn least_squares_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.cols();
    let mut ata = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            ata[(i, j)] = (0..a.rows()).map(|r| a[(r, i)] * a[(r, j)]).sum();
        }
    }
    gauss_solve(&ata, &a.tr_mul_vec(b))
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
