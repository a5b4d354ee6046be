// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Closed-form cost model of one BSF iteration.
//!
//! With `c = 2L + t_s` and `m = t_r + t_p`, one iteration on `K` workers costs
//!
//! ```text
//! T(K) = (K²·c + K·m + t_w) / K
//! ```
//!
//! and the speedup `a(K) = T(1) / T(K)` peaks at `K* = sqrt(t_w / c)`, which
//! depends on neither `t_r` nor `t_p`. Everything is evaluated in these
//! polynomial forms, so the breakdown sum in [`CostBreakdown::component_sum`]
//! and the simulator's event arithmetic are genuinely independent routes to
//! the same number.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::BsfParams;

/// Per-phase decomposition of one iteration on `K` workers.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostBreakdown {
    /// `K·t_s`: master time spent emitting orders.
    pub send_total: f64,
    /// `t_w / K`: time each worker spends on its slice.
    pub compute: f64,
    /// `t_r`: master time spent reading results.
    pub receive_total: f64,
    /// `t_p`: master time spent evaluating results.
    pub evaluate: f64,
    /// `2·K·L`: one latency per order and one per result.
    pub latency_total: f64,
    /// Iteration time from the polynomial form.
    pub total: f64,
}

impl CostBreakdown {
    /// Sum of the five components, in schedule order.
    pub fn component_sum(&self) -> f64 {
        self.send_total + self.latency_total + self.compute + self.receive_total + self.evaluate
    }
}

/// Integer worker count at which the predicted speedup peaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OptimalWorkers {
    Finite(u64),
    /// Communication is free, so the speedup keeps growing with `K`.
    Unbounded,
}

impl OptimalWorkers {
    pub fn finite(self) -> Option<u64> {
        match self {
            OptimalWorkers::Finite(k) => Some(k),
            OptimalWorkers::Unbounded => None,
        }
    }
}

/// Location and height of the speedup peak.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalabilityReport {
    /// Real-valued maximiser `sqrt(t_w / (2L + t_s))`; `+inf` when `2L + t_s = 0`.
    pub k_star: f64,
    pub k_opt: OptimalWorkers,
    /// Peak speedup; for unbounded scalability, the supremum as `K -> inf`.
    pub a_max: f64,
    /// Efficiency at `k_opt`; `0` (the limit) for unbounded scalability.
    pub e_at_opt: f64,
}

/// One sampled point of a speedup curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub k: u64,
    pub time: f64,
    pub speedup: f64,
    pub efficiency_exact: f64,
    /// `None` when `t_w = 0`, where the approximation is undefined.
    pub efficiency_approx: Option<f64>,
}

fn check_workers(k: f64) -> Result<()> {
    if k.is_finite() && k >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidWorkers(k))
    }
}

/// `K²·c + K·m + t_w`, shared by the time, speedup and efficiency forms.
#[inline]
fn scaled_time(p: &BsfParams, k: f64) -> f64 {
    k * k * p.comm() + k * p.master() + p.work
}

/// `2L + t_s + t_r + t_p + t_w`.
#[inline]
fn single_worker_sum(p: &BsfParams) -> f64 {
    2.0 * p.latency + p.send + p.receive + p.process + p.work
}

/// Iteration time with one worker.
pub fn predict_t1(p: &BsfParams) -> Result<f64> {
    p.validate()?;
    Ok(2.0 * p.latency + p.send + p.work + p.process + p.receive)
}

/// Iteration time with `k` workers, broken down by phase.
pub fn predict_tk(p: &BsfParams, k: f64) -> Result<CostBreakdown> {
    p.validate()?;
    check_workers(k)?;
    Ok(CostBreakdown {
        send_total: k * p.send,
        compute: p.work / k,
        receive_total: p.receive,
        evaluate: p.process,
        latency_total: 2.0 * k * p.latency,
        total: scaled_time(p, k) / k,
    })
}

/// Speedup from two measured or predicted times.
pub fn speedup_from_times(t1: f64, tk: f64) -> Result<f64> {
    for (name, value) in [("T_1", t1), ("T_K", tk)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter { name, value });
        }
    }
    Ok(t1 / tk)
}

/// Predicted speedup `a(K)`.
pub fn predict_speedup(p: &BsfParams, k: f64) -> Result<f64> {
    p.validate()?;
    check_workers(k)?;
    let sum = single_worker_sum(p);
    if sum <= 0.0 {
        return Err(Error::Undefined("speedup undefined: single-worker time is zero"));
    }
    Ok(k * sum / scaled_time(p, k))
}

/// Derivative `da/dK` at real `k`.
pub fn speedup_derivative(p: &BsfParams, k: f64) -> Result<f64> {
    p.validate()?;
    check_workers(k)?;
    let denom = k * p.comm() + p.master() + p.work / k;
    if denom <= 0.0 {
        return Err(Error::Undefined("derivative undefined: iteration time is zero"));
    }
    Ok(single_worker_sum(p) * (p.work / (k * k) - p.comm()) / (denom * denom))
}

/// Upper scalability bound and the integer optimum around it.
pub fn scalability_bound(p: &BsfParams) -> Result<ScalabilityReport> {
    p.validate()?;
    if p.work == 0.0 {
        // speedup is nonincreasing in K
        return Ok(ScalabilityReport {
            k_star: 0.0,
            k_opt: OptimalWorkers::Finite(1),
            a_max: 1.0,
            e_at_opt: 1.0,
        });
    }
    let comm = p.comm();
    if comm == 0.0 {
        let master = p.master();
        let a_max = if master > 0.0 {
            single_worker_sum(p) / master
        } else {
            f64::INFINITY
        };
        return Ok(ScalabilityReport {
            k_star: f64::INFINITY,
            k_opt: OptimalWorkers::Unbounded,
            a_max,
            e_at_opt: 0.0,
        });
    }

    let k_star = libm::sqrt(p.work / comm);
    if k_star < 1.0 {
        return Ok(ScalabilityReport {
            k_star,
            k_opt: OptimalWorkers::Finite(1),
            a_max: 1.0,
            e_at_opt: 1.0,
        });
    }

    let lo = libm::floor(k_star).max(1.0);
    let hi = libm::ceil(k_star);
    let a_lo = predict_speedup(p, lo)?;
    let a_hi = predict_speedup(p, hi)?;
    // ties go to the smaller K
    let (k, a) = if a_hi > a_lo { (hi, a_hi) } else { (lo, a_lo) };
    Ok(ScalabilityReport {
        k_star,
        k_opt: OptimalWorkers::Finite(k as u64),
        a_max: a,
        e_at_opt: a / k,
    })
}

/// Parallel efficiency `a(K) / K`.
pub fn efficiency_exact(p: &BsfParams, k: f64) -> Result<f64> {
    Ok(predict_speedup(p, k)? / k)
}

/// Large-`K` efficiency approximation `1 / (1 + (K²·c + K·m) / t_w)`.
pub fn efficiency_approx(p: &BsfParams, k: f64) -> Result<f64> {
    p.validate()?;
    check_workers(k)?;
    if p.work == 0.0 {
        return Err(Error::Undefined("efficiency approximation undefined for t_w = 0"));
    }
    Ok(1.0 / (1.0 + (k * k * p.comm() + k * p.master()) / p.work))
}

/// Evaluates the model at `k_min, k_min + step, ..` up to `k_max`.
pub fn sweep(p: &BsfParams, k_min: u64, k_max: u64, step: u64) -> Result<Vec<SweepRow>> {
    if k_min < 1 || k_min > k_max || step < 1 {
        return Err(Error::EmptyRange {
            min: k_min,
            max: k_max,
            step,
        });
    }
    p.validate()?;
    let mut rows = Vec::with_capacity(((k_max - k_min) / step + 1) as usize);
    let mut k = k_min;
    loop {
        rows.push(sweep_row(p, k)?);
        match k.checked_add(step) {
            Some(next) if next <= k_max => k = next,
            _ => break,
        }
    }
    Ok(rows)
}

/// Evaluates the model at an explicit list of worker counts.
pub fn sweep_points(p: &BsfParams, ks: &[u64]) -> Result<Vec<SweepRow>> {
    p.validate()?;
    ks.iter().map(|&k| sweep_row(p, k)).collect()
}

fn sweep_row(p: &BsfParams, k: u64) -> Result<SweepRow> {
    let kf = k as f64;
    let speedup = predict_speedup(p, kf)?;
    Ok(SweepRow {
        k,
        time: predict_tk(p, kf)?.total,
        speedup,
        efficiency_exact: speedup / kf,
        efficiency_approx: if p.work > 0.0 {
            Some(efficiency_approx(p, kf)?)
        } else {
            None
        },
    })
}
