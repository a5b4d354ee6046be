// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Bulk Synchronous Farm toolkit.
//!
//! This crate runs BSF programs on in-process workers ([`runtime`]),
//! measures their cost parameters ([`calibrate`]), compares the closed-form
//! model, the simulator and real runs side by side ([`validate`]), and ships
//! reference payloads ([`payloads`]) plus the file formats and command-line
//! front end. The model and simulator themselves live in [`bsf_core`] and are
//! re-exported here.

pub mod calibrate;
pub mod cli;
pub mod formats;
pub mod payloads;
pub mod runtime;
pub mod validate;

pub use bsf_core::{cost, partition, sim};
pub use bsf_core::{
    BsfParams, BsfProgram, ClusterConfig, CostBreakdown, DataPartition, Event, EventKind,
    IterationTimeline, Node, OptimalWorkers, RunTrace, ScalabilityReport, ScheduleMode, SweepRow,
    WireSize,
};
