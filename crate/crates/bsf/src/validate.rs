// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Side-by-side comparison of model, simulator and real runs.

use bsf_core::cost::{predict_speedup, predict_tk, scalability_bound};
use bsf_core::sim::simulate_iteration;
use bsf_core::{BsfParams, BsfProgram, ClusterConfig, OptimalWorkers, ScheduleMode};
use serde::{Deserialize, Serialize};

use crate::calibrate::{calibrate, median, CalibrateError, CalibrationFlag, CommCostSpec};
use crate::runtime::{run_bsf, Execution, RunConfig, RunError};

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub ks: Vec<usize>,
    pub repetitions: usize,
    pub comm: CommCostSpec,
    pub mode: ScheduleMode,
    pub execution: Execution,
    /// Make real runs pay the modeled message costs.
    pub emulate_comm: bool,
    pub max_iterations: usize,
}

impl ValidateOptions {
    pub fn new(ks: Vec<usize>) -> Self {
        Self {
            ks,
            repetitions: crate::calibrate::DEFAULT_REPETITIONS,
            comm: CommCostSpec::default(),
            mode: ScheduleMode::PaperFaithful,
            execution: Execution::Threaded,
            emulate_comm: true,
            max_iterations: crate::runtime::DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub k: usize,
    /// Closed-form iteration time.
    pub t_predicted: f64,
    /// Simulated iteration time.
    pub t_simulated: f64,
    /// Median wall time of one iteration of the real run.
    pub t_measured: f64,
    pub speedup_predicted: f64,
    /// `None` when the run did no iterations.
    pub speedup_measured: Option<f64>,
    /// `|T_predicted − T_simulated| / T_simulated`.
    pub rel_err_simulated: f64,
    /// `|T_predicted − T_measured| / T_measured`.
    pub rel_err_measured: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub payload: String,
    pub mode: ScheduleMode,
    pub params: BsfParams,
    pub comm: CommCostSpec,
    pub repetitions: usize,
    pub calibration_flags: Vec<CalibrationFlag>,
    /// `None` when unbounded.
    pub k_star: Option<f64>,
    pub k_opt_predicted: OptimalWorkers,
    /// Worker count with the highest measured speedup among the rows.
    pub k_best_measured: usize,
    pub rows: Vec<ValidationRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError<E> {
    #[error("invalid validation settings: {0}")]
    Config(String),
    #[error(transparent)]
    Calibrate(CalibrateError<E>),
    #[error(transparent)]
    Run(RunError<E>),
    #[error(transparent)]
    Model(#[from] bsf_core::Error),
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        (value - reference).abs() / reference.abs()
    }
}

/// Calibrates `program`, then for each `K` predicts, simulates and runs it.
pub fn validate<P>(
    name: &str,
    program: &P,
    opts: &ValidateOptions,
) -> Result<ValidationReport, ValidateError<P::Error>>
where
    P: BsfProgram + Sync,
    P::State: Clone,
    P::Order: Send + Sync,
    P::Partial: Clone + Send,
    P::Error: Send,
{
    if opts.ks.is_empty() || opts.ks.contains(&0) {
        return Err(ValidateError::Config("worker list must be nonempty and positive".into()));
    }
    let cal = calibrate(program, opts.repetitions, opts.comm).map_err(ValidateError::Calibrate)?;
    let params = cal.params;
    let bound = scalability_bound(&params)?;

    let measure = |k: usize| -> Result<(f64, usize), ValidateError<P::Error>> {
        let mut cfg = RunConfig::new(k)
            .max_iterations(opts.max_iterations)
            .execution(opts.execution);
        if opts.emulate_comm {
            cfg = cfg.emulate_comm(opts.comm);
        }
        let mut samples = Vec::new();
        let mut iterations = 0;
        for _ in 0..opts.repetitions {
            let out = run_bsf(program, &cfg).map_err(ValidateError::Run)?;
            iterations = out.iterations;
            samples.extend(out.timings.iter().map(|t| t.total));
        }
        let t = if samples.is_empty() { 0.0 } else { median(&samples) };
        Ok((t, iterations))
    };

    let (t1_measured, t1_iterations) = measure(1)?;
    let mut rows = Vec::with_capacity(opts.ks.len());
    for &k in &opts.ks {
        let kf = k as f64;
        let t_predicted = predict_tk(&params, kf)?.total;
        let t_simulated = simulate_iteration(&ClusterConfig::uniform(&params, k, opts.mode))?.t_measured;
        let (t_measured, iterations) = if k == 1 {
            (t1_measured, t1_iterations)
        } else {
            measure(k)?
        };
        let speedup_predicted = predict_speedup(&params, kf).unwrap_or(1.0);
        let speedup_measured = (t_measured > 0.0).then(|| t1_measured / t_measured);
        rows.push(ValidationRow {
            k,
            t_predicted,
            t_simulated,
            t_measured,
            speedup_predicted,
            speedup_measured,
            rel_err_simulated: relative_error(t_predicted, t_simulated),
            rel_err_measured: relative_error(t_predicted, t_measured),
            iterations,
        });
    }
    let score = |r: &ValidationRow| r.speedup_measured.unwrap_or(f64::NEG_INFINITY);
    let k_best_measured = rows
        .iter()
        .fold(None::<&ValidationRow>, |best, r| match best {
            Some(b) if score(b) >= score(r) => Some(b),
            _ => Some(r),
        })
        .map_or(1, |r| r.k);

    Ok(ValidationReport {
        payload: name.to_string(),
        mode: opts.mode,
        params,
        comm: opts.comm,
        repetitions: opts.repetitions,
        calibration_flags: cal.flags,
        k_star: bound.k_star.is_finite().then_some(bound.k_star),
        k_opt_predicted: bound.k_opt,
        k_best_measured,
        rows,
    })
}
