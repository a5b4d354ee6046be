// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Measuring the cost parameters of a real payload.
//!
//! `t_w` and `t_p` are timed on the host: one worker step over the whole data
//! array, and one reduce of its result. In-process messages cost nothing
//! worth measuring, so `L`, `t_s` and `t_r` come from a configured affine
//! byte-cost model applied to the measured message sizes.

use std::time::Instant;

use bsf_core::{BsfParams, BsfProgram, WireSize};
use serde::{Deserialize, Serialize};

pub const DEFAULT_REPETITIONS: usize = 5;

/// Affine message cost: a message of `n` bytes takes `latency + per_byte·n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommCostSpec {
    pub latency: f64,
    pub per_byte: f64,
}

impl CommCostSpec {
    pub fn new(latency: f64, per_byte: f64) -> Self {
        Self { latency, per_byte }
    }

    /// Transfer time of `bytes`, latency excluded.
    pub fn transfer_time(&self, bytes: usize) -> f64 {
        self.per_byte * bytes as f64
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [("latency", self.latency), ("per_byte", self.per_byte)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} = {v} must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Raw per-repetition samples, in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub latency: Vec<f64>,
    pub send: Vec<f64>,
    pub work: Vec<f64>,
    pub receive: Vec<f64>,
    pub process: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CalibrationFlag {
    /// The median is too close to the clock resolution to be trusted. The
    /// value is kept, not zeroed.
    BelowClockResolution {
        parameter: String,
        median: f64,
        resolution: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Each field is the median of the matching sample list.
    pub params: BsfParams,
    pub repetitions: usize,
    pub samples: Samples,
    pub order_bytes: usize,
    pub result_bytes: usize,
    pub clock_resolution: f64,
    pub flags: Vec<CalibrationFlag>,
}

impl CalibrationResult {
    pub fn is_flagged(&self, parameter: &str) -> bool {
        self.flags.iter().any(|f| match f {
            CalibrationFlag::BelowClockResolution { parameter: p, .. } => p == parameter,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrateError<E> {
    #[error("invalid calibration settings: {0}")]
    Config(String),
    #[error("payload failed during calibration: {0}")]
    Payload(E),
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Smallest nonzero step observed between consecutive clock reads.
pub fn clock_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..200 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b.duration_since(a).as_secs_f64());
    }
    best
}

/// Medians smaller than this many clock ticks are flagged.
const RESOLUTION_MARGIN: f64 = 10.0;

/// Calibrates `program` with one worker over the full data array.
pub fn calibrate<P>(
    program: &P,
    repetitions: usize,
    comm: CommCostSpec,
) -> Result<CalibrationResult, CalibrateError<P::Error>>
where
    P: BsfProgram,
    P::State: Clone,
    P::Partial: Clone,
{
    if repetitions == 0 {
        return Err(CalibrateError::Config("repetitions must be at least 1".into()));
    }
    comm.validate().map_err(CalibrateError::Config)?;

    let state = program.init().map_err(CalibrateError::Payload)?;
    let order = program.make_order(&state);
    let all = 0..program.n_items();

    // warm-up, not recorded
    let mut partial = program
        .worker_step(&order, all.clone(), 0)
        .map_err(CalibrateError::Payload)?;

    let mut samples = Samples::default();
    for _ in 0..repetitions {
        let start = Instant::now();
        partial = program
            .worker_step(&order, all.clone(), 0)
            .map_err(CalibrateError::Payload)?;
        samples.work.push(start.elapsed().as_secs_f64());

        let partials = vec![partial.clone()];
        let input = state.clone();
        let start = Instant::now();
        let reduced = program.reduce(partials, input).map_err(CalibrateError::Payload)?;
        samples.process.push(start.elapsed().as_secs_f64());
        drop(reduced);
    }

    let order_bytes = order.wire_size();
    let result_bytes = partial.wire_size();
    samples.latency = vec![comm.latency; repetitions];
    samples.send = vec![comm.transfer_time(order_bytes); repetitions];
    samples.receive = vec![comm.transfer_time(result_bytes); repetitions];

    let params = BsfParams::new(
        median(&samples.latency),
        median(&samples.send),
        median(&samples.work),
        median(&samples.receive),
        median(&samples.process),
    );

    let resolution = clock_resolution();
    let flags = [("t_w", params.work), ("t_p", params.process)]
        .into_iter()
        .filter(|&(_, m)| m < RESOLUTION_MARGIN * resolution)
        .map(|(name, m)| CalibrationFlag::BelowClockResolution {
            parameter: name.to_string(),
            median: m,
            resolution,
        })
        .collect();

    Ok(CalibrationResult {
        params,
        repetitions,
        samples,
        order_bytes,
        result_bytes,
        clock_resolution: resolution,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn clock_resolution_is_positive_and_small() {
        let r = clock_resolution();
        assert!(r > 0.0 && r < 1e-3, "{r}");
    }

    #[test]
    fn affine_cost() {
        let c = CommCostSpec::new(1e-6, 2e-9);
        assert_eq!(c.transfer_time(0), 0.0);
        assert!((c.transfer_time(1000) - 2e-6).abs() < 1e-18);
        assert!(CommCostSpec::new(-1.0, 0.0).validate().is_err());
    }
}
