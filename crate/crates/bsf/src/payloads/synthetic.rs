// SPDX-License-Identifier: Apache-2.0 OR MIT

use std::ops::Range;
use std::time::{Duration, Instant};

use bsf_core::BsfProgram;

use super::PayloadError;

/// Length of the synthetic data array; divisible by every `K` up to 16.
pub const SYNTHETIC_ITEMS: usize = 720_720;

/// A payload with dialled-in costs: the full data array takes `compute` to
/// process, orders are `order_bytes` long and results total `result_bytes`.
/// Runs exactly `iterations` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticProgram {
    compute: Duration,
    order_bytes: usize,
    result_bytes: usize,
    iterations: usize,
}

impl SyntheticProgram {
    pub fn new(compute_ms: f64, order_bytes: usize, result_bytes: usize, iterations: usize) -> Result<Self, PayloadError> {
        if !(compute_ms.is_finite() && compute_ms >= 0.0) {
            return Err(PayloadError::InvalidArgument(format!(
                "compute_ms = {compute_ms} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            compute: Duration::from_secs_f64(compute_ms / 1000.0),
            order_bytes,
            result_bytes,
            iterations,
        })
    }

    pub fn compute(&self) -> Duration {
        self.compute
    }

    fn share(&self, total: f64, len: usize) -> f64 {
        total * len as f64 / SYNTHETIC_ITEMS as f64
    }
}

impl BsfProgram for SyntheticProgram {
    type State = usize;
    type Order = Vec<u8>;
    type Partial = Vec<u8>;
    type Output = usize;
    type Error = PayloadError;

    fn init(&self) -> Result<usize, PayloadError> {
        Ok(0)
    }

    fn n_items(&self) -> usize {
        SYNTHETIC_ITEMS
    }

    fn make_order(&self, state: &usize) -> Vec<u8> {
        vec![*state as u8; self.order_bytes]
    }

    fn worker_step(&self, _order: &Vec<u8>, slice: Range<usize>, _rank: usize) -> Result<Vec<u8>, PayloadError> {
        let len = slice.len();
        let target = Duration::from_secs_f64(self.share(self.compute.as_secs_f64(), len));
        let start = Instant::now();
        while start.elapsed() < target {
            std::hint::spin_loop();
        }
        Ok(vec![0; self.share(self.result_bytes as f64, len).round() as usize])
    }

    fn reduce(&self, _partials: Vec<Vec<u8>>, done: usize) -> Result<usize, PayloadError> {
        Ok(done + 1)
    }

    fn exit_condition(&self, done: &usize) -> bool {
        *done >= self.iterations
    }

    fn finalize(&self, done: usize) -> usize {
        done
    }
}
