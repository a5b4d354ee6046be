// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Bulk Synchronous Farm (BSF) analysis core.
//!
//! A BSF-computer is one master node and `K` homogeneous worker nodes. Every
//! iteration the master broadcasts one order, the workers process their own
//! slice of the data, the results travel back to the master, and the master
//! evaluates them and checks the exit condition. This crate holds the pieces
//! that need nothing beyond `alloc`:
//!
//! * [`cost`]: closed-form iteration time, speedup, its derivative, the upper
//!   scalability bound and parallel efficiency.
//! * [`sim`]: a deterministic event-level simulator of one master and `K`
//!   workers, used as an independent check on the closed forms.
//! * [`partition`]: the block distribution of a data array over workers.
//! * [`program`]: the trait a user-supplied iterative payload implements.
//!
//! Times are plain `f64` values in an abstract unit (seconds by convention).
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cost;
mod error;
mod params;
pub mod partition;
pub mod program;
pub mod sim;

pub use cost::{CostBreakdown, OptimalWorkers, ScalabilityReport, SweepRow};
pub use error::{Error, Result};
pub use params::BsfParams;
pub use partition::{partition, DataPartition, Slice};
pub use program::{BsfProgram, WireSize};
pub use sim::{ClusterConfig, Event, EventKind, IterationTimeline, Node, RunTrace, ScheduleMode};
