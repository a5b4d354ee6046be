// SPDX-License-Identifier: Apache-2.0 OR MIT

mod support;

use bsf::payloads::{diagonally_dominant_system, random_least_squares, GradientDescentProgram, JacobiProgram};
use bsf::runtime::{run_bsf, Execution, RunConfig};
use support::{gauss_solve, least_squares_solve, max_abs_diff};

const WORKER_COUNTS: [usize; 4] = [1, 2, 4, 8];

#[test]
fn jacobi_matches_direct_solve_for_every_worker_count() {
    for seed in 0..4 {
        let sys = diagonally_dominant_system(48, seed);
        let exact = gauss_solve(&sys.a, &sys.b);
        let program = JacobiProgram::new(sys, 1e-12).unwrap().recording();
        let runs: Vec<_> = WORKER_COUNTS
            .iter()
            .map(|&k| run_bsf(&program, &RunConfig::new(k)).unwrap())
            .collect();
        for run in &runs {
            assert!(run.converged());
            assert!(max_abs_diff(&run.output.x, &exact) <= 1e-10);
            assert_eq!(run.iterations, runs[0].iterations);
            assert_eq!(run.output.iterates, runs[0].output.iterates);
        }
    }
}

#[test]
fn jacobi_error_and_residual_decrease() {
    let sys = diagonally_dominant_system(40, 11);
    let exact = gauss_solve(&sys.a, &sys.b);
    let program = JacobiProgram::new(sys, 1e-11).unwrap().recording();
    let out = run_bsf(&program, &RunConfig::new(4)).unwrap().output;
    let errors: Vec<f64> = out.iterates.iter().map(|x| max_abs_diff(x, &exact)).collect();
    assert!(errors.len() > 3);
    // rounding floor of the direct solve
    let floor = 1e-13;
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] + floor, "{w:?}");
    }
    for w in out.residual_history.windows(2) {
        if w[0] > floor {
            assert!(w[1] < w[0], "{w:?}");
        }
    }
}

#[test]
fn execution_order_does_not_change_results() {
    let program = JacobiProgram::new(diagonally_dominant_system(30, 5), 1e-10).unwrap();
    let reference = run_bsf(&program, &RunConfig::new(4).execution(Execution::Sequential)).unwrap();
    for exec in [Execution::Threaded, Execution::Shuffled(1), Execution::Shuffled(99)] {
        let out = run_bsf(&program, &RunConfig::new(4).execution(exec)).unwrap();
        assert_eq!(out.output.x, reference.output.x);
        assert_eq!(out.iterations, reference.iterations);
    }
}

#[test]
fn gradient_descent_matches_least_squares_solution() {
    let problem = random_least_squares(64, 8, 2);
    let exact = least_squares_solve(&problem.a, &problem.b);
    let program = GradientDescentProgram::new(problem, 1e-10).unwrap();
    let runs: Vec<_> = WORKER_COUNTS
        .iter()
        .map(|&k| run_bsf(&program, &RunConfig::new(k)).unwrap())
        .collect();
    for run in &runs {
        assert!(run.converged());
        assert!(max_abs_diff(&run.output.x, &exact) <= 1e-8);
        let scale = run.output.x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(&run.output.x, &runs[0].output.x) <= 1e-12 * scale);
        let h = &run.output.objective_history;
        for w in h.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{w:?}");
        }
    }
}

#[test]
fn more_workers_than_rows() {
    let sys = diagonally_dominant_system(3, 0);
    let exact = gauss_solve(&sys.a, &sys.b);
    let out = run_bsf(&JacobiProgram::new(sys, 1e-12).unwrap(), &RunConfig::new(8)).unwrap();
    assert!(max_abs_diff(&out.output.x, &exact) <= 1e-10);
}
