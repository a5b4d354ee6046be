// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Text and JSON formats.
//!
//! Dense matrices are stored as a header line `rows cols` followed by
//! `rows·cols` whitespace-separated values in row-major order. A file may
//! hold several matrices back to back; `#` starts a comment. A linear system
//! file holds `A` (`n×n`), then `b` (`n` values, as `n 1` or `1 n`), then
//! optionally `x0`. A least-squares file holds `A` (`m×n`), `b` and
//! optionally `x0` the same way.
//!
//! CSV outputs always start with a header row and format numbers with the
//! shortest representation that round-trips, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;

use bsf_core::sim::MeasuredPoint;
use bsf_core::{IterationTimeline, SweepRow};

use crate::payloads::{LeastSquaresProblem, LinearSystem, Matrix, PayloadError};
use crate::runtime::{IterationTiming, Phase};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        line.split_whitespace().map(move |t| (i + 1, t))
    })
}

/// Parses every matrix block in `text`.
pub fn parse_dense(text: &str) -> Result<Vec<Matrix>, FormatError> {
    let mut toks = tokens(text).peekable();
    let mut out = Vec::new();
    let last_line = text.lines().count().max(1);
    while toks.peek().is_some() {
        let mut dim = || -> Result<usize, FormatError> {
            let (line, t) = toks.next().ok_or(FormatError::Parse {
                line: last_line,
                message: "truncated header".into(),
            })?;
            t.parse().map_err(|_| FormatError::Parse {
                line,
                message: format!("expected a dimension, found {t:?}"),
            })
        };
        let rows = dim()?;
        let cols = dim()?;
        let count = rows.checked_mul(cols).ok_or(FormatError::Parse {
            line: last_line,
            message: "matrix too large".into(),
        })?;
        let mut data = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let (line, t) = toks.next().ok_or(FormatError::Parse {
                line: last_line,
                message: format!("{rows}x{cols} matrix ended after {} values", data.len()),
            })?;
            let v: f64 = t.parse().map_err(|_| FormatError::Parse {
                line,
                message: format!("expected a number, found {t:?}"),
            })?;
            data.push(v);
        }
        out.push(Matrix::new(rows, cols, data)?);
    }
    Ok(out)
}

pub fn write_dense(m: &Matrix) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn as_vector(m: &Matrix, what: &str) -> Result<Vec<f64>, FormatError> {
    if m.rows() != 1 && m.cols() != 1 {
        return Err(PayloadError::Dimension(format!("{what} must be a vector, got {}x{}", m.rows(), m.cols())).into());
    }
    Ok(m.data().to_vec())
}

/// `A`, `b` and an optional `x0`.
type ProblemParts = (Matrix, Vec<f64>, Option<Vec<f64>>);

fn split_problem(text: &str) -> Result<ProblemParts, FormatError> {
    let mut blocks = parse_dense(text)?.into_iter();
    let a = blocks.next().ok_or(FormatError::Parse {
        line: 1,
        message: "missing matrix A".into(),
    })?;
    let b = blocks.next().ok_or(FormatError::Parse {
        line: 1,
        message: "missing vector b".into(),
    })?;
    let b = as_vector(&b, "b")?;
    let x0 = blocks.next().map(|m| as_vector(&m, "x0")).transpose()?;
    if blocks.next().is_some() {
        return Err(FormatError::Parse {
            line: 1,
            message: "unexpected extra matrix block".into(),
        });
    }
    Ok((a, b, x0))
}

/// Reads a linear system; `x0` defaults to zero.
pub fn read_linear_system(text: &str) -> Result<LinearSystem, FormatError> {
    let (a, b, x0) = split_problem(text)?;
    let x0 = x0.unwrap_or_else(|| vec![0.0; a.cols()]);
    Ok(LinearSystem::new(a, b, x0)?)
}

/// Reads a least-squares problem with a safe step size; `x0` defaults to zero.
pub fn read_least_squares(text: &str) -> Result<LeastSquaresProblem, FormatError> {
    let (a, b, x0) = split_problem(text)?;
    let x0 = x0.unwrap_or_else(|| vec![0.0; a.cols()]);
    Ok(LeastSquaresProblem::with_safe_step(a, b, x0)?)
}

pub fn write_linear_system(sys: &LinearSystem) -> String {
    let n = sys.n();
    let mut s = write_dense(&sys.a);
    s.push_str(&write_dense(&Matrix::new(n, 1, sys.b.clone()).expect("length n")));
    s.push_str(&write_dense(&Matrix::new(n, 1, sys.x0.clone()).expect("length n")));
    s
}

/// `timestamp,node,kind`, one event per row.
pub fn timeline_csv(tl: &IterationTimeline) -> String {
    let mut s = String::from("timestamp,node,kind\n");
    for e in &tl.events {
        let _ = writeln!(s, "{},{},{}", e.timestamp, e.node, e.kind);
    }
    s
}

pub fn timeline_json(tl: &IterationTimeline) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(tl)?)
}

/// `iteration,phase,duration`, one row per phase per iteration.
pub fn timing_csv(timings: &[IterationTiming]) -> String {
    let mut s = String::from("iteration,phase,duration\n");
    for t in timings {
        for phase in Phase::ALL {
            let _ = writeln!(s, "{},{},{}", t.iteration, phase.as_str(), t.phase(phase));
        }
    }
    s
}

/// `K,T_K,speedup,efficiency_exact,efficiency_approx`; the last field is
/// empty when the approximation is undefined.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("K,T_K,speedup,efficiency_exact,efficiency_approx\n");
    for r in rows {
        let approx = r.efficiency_approx.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", r.k, r.time, r.speedup, r.efficiency_exact, approx);
    }
    s
}

/// Simulated speedup curve: `K,T_measured,speedup`.
pub fn curve_csv(points: &[MeasuredPoint]) -> String {
    let mut s = String::from("K,T_measured,speedup\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.k, p.t_measured, p.speedup);
    }
    s
}

/// Parses the output of [`sweep_csv`] back into `(K, speedup)` pairs.
pub fn parse_sweep_speedups(csv: &str) -> Result<Vec<(u64, f64)>, FormatError> {
    csv.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let mut f = l.split(',');
            let bad = || FormatError::Parse {
                line: i + 1,
                message: format!("malformed sweep row {l:?}"),
            };
            let k = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let a = f.nth(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            Ok((k, a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bsf_core::cost::sweep;
    use bsf_core::sim::simulate_iteration;
    use bsf_core::{BsfParams, ClusterConfig, ScheduleMode};
    use proptest::prelude::*;

    #[test]
    fn parses_blocks_and_comments() {
        let text = "# system\n2 2\n4 1\n2 5\n2 1\n9\n12\n";
        let sys = read_linear_system(text).unwrap();
        assert_eq!(sys.a.row(1), [2.0, 5.0]);
        assert_eq!(sys.b, [9.0, 12.0]);
        assert_eq!(sys.x0, [0.0, 0.0]);
        let row_b = read_linear_system("2 2 4 1 2 5\n1 2 9 12\n1 2 1 1").unwrap();
        assert_eq!(row_b.x0, [1.0, 1.0]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        match parse_dense("2 2\n1 2\n3 x\n") {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_dense("2 2\n1 2 3\n").is_err());
        assert!(parse_dense("2\n").is_err());
        assert!(read_linear_system("2 2 1 0 0 1\n").is_err());
        assert!(read_linear_system("2 2 1 0 0 1\n2 2 1 1 1 1\n").is_err());
        assert!(read_linear_system("2 3 1 0 0 0 1 0\n2 1 1 1\n").is_err());
    }

    #[test]
    fn csv_headers_and_rows() {
        let p = BsfParams::new(0.5, 1.0, 100.0, 4.0, 5.0);
        let csv = sweep_csv(&sweep(&p, 10, 10, 1).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("K,T_K,speedup,efficiency_exact,efficiency_approx"));
        assert!(lines.next().unwrap().starts_with("10,39,2.846153846153846"));
        assert_eq!(parse_sweep_speedups(&csv).unwrap()[0].0, 10);

        let idle = BsfParams { work: 0.0, ..p };
        assert!(sweep_csv(&sweep(&idle, 1, 1, 1).unwrap()).lines().nth(1).unwrap().ends_with(','));

        let tl = simulate_iteration(&ClusterConfig::uniform(&p, 2, ScheduleMode::PaperFaithful)).unwrap();
        let csv = timeline_csv(&tl);
        assert_eq!(csv.lines().next(), Some("timestamp,node,kind"));
        assert_eq!(csv.lines().nth(1), Some("0,master,send_start"));
        assert_eq!(csv.lines().count(), tl.events.len() + 1);
        let json = timeline_json(&tl).unwrap();
        let back: IterationTimeline = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tl);

        let t = IterationTiming {
            iteration: 1,
            send: 0.5,
            ..Default::default()
        };
        let csv = timing_csv(&[t]);
        assert_eq!(csv.lines().nth(1), Some("1,send,0.5"));
        assert_eq!(csv.lines().count(), 1 + Phase::ALL.len());
    }

    proptest! {
        #[test]
        fn dense_round_trip(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data = (0..rows * cols).map(|_| rng.gen_range(-1e6..1e6)).collect();
            let m = Matrix::new(rows, cols, data).unwrap();
            let back = parse_dense(&write_dense(&m)).unwrap();
            prop_assert_eq!(back, vec![m]);
        }
    }
}
