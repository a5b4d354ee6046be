// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Deterministic discrete-event simulation of a BSF-computer.
//!
//! One master and `K` workers execute one iteration: orders go out, workers
//! compute, results come back, the master reads and evaluates them. Two
//! schedules are available:
//!
//! * [`ScheduleMode::PaperFaithful`] serializes the phases exactly as the
//!   closed-form model charges them. Each send blocks until its order is
//!   delivered, so distributing orders costs `K·(t_s + L)`; computing starts
//!   once the last order has arrived; results then cross the master's inbound
//!   link one after another (`K·L`), followed by one `t_r` block of receive
//!   work and `t_p` of evaluation.
//! * [`ScheduleMode::Pipelined`] lets sends overlap their latency, lets each
//!   worker start on its own order, and has the master read each result
//!   (`t_r / K` apiece) as soon as it arrives and the master is free.
//!
//! The global barrier costs nothing: it passes when the master has finished
//! reading all results.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::cost::speedup_from_times;
use crate::error::{Error, Result};
use crate::params::BsfParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScheduleMode {
    #[default]
    PaperFaithful,
    Pipelined,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::PaperFaithful => "paper_faithful",
            ScheduleMode::Pipelined => "pipelined",
        })
    }
}

impl core::str::FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_faithful" | "paper-faithful" | "faithful" => Ok(ScheduleMode::PaperFaithful),
            "pipelined" => Ok(ScheduleMode::Pipelined),
            _ => Err(Error::Undefined("unknown schedule mode")),
        }
    }
}

/// Compute time of each worker for one iteration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Compute {
    /// Every worker computes for the same time (normally `t_w / K`).
    Uniform(f64),
    /// One entry per worker, in rank order.
    PerWorker(Vec<f64>),
}

/// A virtual cluster of one master and `workers` workers.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterConfig {
    pub workers: usize,
    pub latency: f64,
    pub send: f64,
    pub compute: Compute,
    pub receive: f64,
    pub evaluate: f64,
    pub mode: ScheduleMode,
}

impl ClusterConfig {
    /// Splits `p.work` evenly over `workers`.
    pub fn uniform(p: &BsfParams, workers: usize, mode: ScheduleMode) -> Self {
        Self {
            workers,
            latency: p.latency,
            send: p.send,
            compute: Compute::Uniform(p.work / workers as f64),
            receive: p.receive,
            evaluate: p.process,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidWorkers(0.0));
        }
        let check = |name, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        check("L", self.latency)?;
        check("t_s", self.send)?;
        check("t_r", self.receive)?;
        check("t_p", self.evaluate)?;
        match &self.compute {
            Compute::Uniform(c) => check("compute", *c),
            Compute::PerWorker(list) => {
                if list.len() != self.workers {
                    return Err(Error::ComputeLength {
                        expected: self.workers,
                        found: list.len(),
                    });
                }
                list.iter().try_for_each(|&c| check("compute", c))
            }
        }
    }

    pub fn compute_time(&self, rank: usize) -> f64 {
        match &self.compute {
            Compute::Uniform(c) => *c,
            Compute::PerWorker(list) => list[rank],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Master,
    /// Zero-based worker rank.
    Worker(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Master => f.write_str("master"),
            Node::Worker(rank) => write!(f, "worker{rank}"),
        }
    }
}

impl core::str::FromStr for Node {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "master" {
            return Ok(Node::Master);
        }
        s.strip_prefix("worker")
            .and_then(|rank| rank.parse().ok())
            .map(Node::Worker)
            .ok_or(Error::Undefined("unknown node name"))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Node {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        struct NodeVisitor;
        impl serde::de::Visitor<'_> for NodeVisitor {
            type Value = Node;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"master\" or \"worker<rank>\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> core::result::Result<Node, E> {
                v.parse().map_err(|_| E::invalid_value(serde::de::Unexpected::Str(v), &self))
            }
        }
        deserializer.deserialize_str(NodeVisitor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EventKind {
    SendStart,
    SendEnd,
    OrderArrive,
    ComputeStart,
    ComputeEnd,
    ResultDepart,
    ResultArrive,
    ReceiveEnd,
    EvaluateStart,
    EvaluateEnd,
    BarrierPass,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::SendStart,
        EventKind::SendEnd,
        EventKind::OrderArrive,
        EventKind::ComputeStart,
        EventKind::ComputeEnd,
        EventKind::ResultDepart,
        EventKind::ResultArrive,
        EventKind::ReceiveEnd,
        EventKind::EvaluateStart,
        EventKind::EvaluateEnd,
        EventKind::BarrierPass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SendStart => "send_start",
            EventKind::SendEnd => "send_end",
            EventKind::OrderArrive => "order_arrive",
            EventKind::ComputeStart => "compute_start",
            EventKind::ComputeEnd => "compute_end",
            EventKind::ResultDepart => "result_depart",
            EventKind::ResultArrive => "result_arrive",
            EventKind::ReceiveEnd => "receive_end",
            EventKind::EvaluateStart => "evaluate_start",
            EventKind::EvaluateEnd => "evaluate_end",
            EventKind::BarrierPass => "barrier_pass",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(Error::Undefined("unknown event kind"))
    }
}

/// One logged event. Send events belong to the master and go out in rank
/// order; order, compute and result events carry the worker they concern.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub timestamp: f64,
    pub node: Node,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationTimeline {
    /// Sorted by timestamp; equal timestamps keep processing order.
    pub events: Vec<Event>,
    pub t_measured: f64,
}

impl IterationTimeline {
    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Timestamp of the first event matching `kind` and `node`.
    pub fn find(&self, kind: EventKind, node: Node) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind == kind && e.node == node)
            .map(|e| e.timestamp)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunTrace {
    pub iterations: Vec<IterationTimeline>,
    pub iteration_count: usize,
    /// Sum of per-iteration times. Initialization and finalization are free.
    pub total_time: f64,
}

/// One point of a simulated speedup curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasuredPoint {
    pub k: u64,
    pub t_measured: f64,
    pub speedup: f64,
}

#[derive(Clone, Copy, Debug)]
enum Action {
    SendStart(usize),
    SendEnd(usize),
    OrderArrive(usize),
    ComputeStart(usize),
    ComputeEnd(usize),
    ResultDepart(usize),
    ResultArrive(usize),
    ReadDone,
    ReceiveEnd,
    EvaluateEnd,
}

struct Pending {
    time: f64,
    seq: u64,
    action: Action,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Engine<'a> {
    cfg: &'a ClusterConfig,
    queue: BinaryHeap<Pending>,
    seq: u64,
    events: Vec<Event>,
    computed: usize,
    // pipelined master state
    sending: bool,
    reading: bool,
    inbox: VecDeque<usize>,
    read: usize,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ClusterConfig) -> Self {
        Self {
            cfg,
            queue: BinaryHeap::new(),
            seq: 0,
            events: Vec::with_capacity(8 * cfg.workers + 4),
            computed: 0,
            sending: true,
            reading: false,
            inbox: VecDeque::new(),
            read: 0,
        }
    }

    fn schedule(&mut self, time: f64, action: Action) {
        self.queue.push(Pending {
            time,
            seq: self.seq,
            action,
        });
        self.seq += 1;
    }

    fn log(&mut self, timestamp: f64, node: Node, kind: EventKind) {
        self.events.push(Event {
            timestamp,
            node,
            kind,
        });
    }

    fn run(mut self) -> IterationTimeline {
        self.schedule(0.0, Action::SendStart(0));
        let mut now = 0.0;
        while let Some(Pending { time, action, .. }) = self.queue.pop() {
            now = time;
            self.step(time, action);
        }
        IterationTimeline {
            events: self.events,
            t_measured: now,
        }
    }

    fn step(&mut self, t: f64, action: Action) {
        let cfg = self.cfg;
        let k = cfg.workers;
        let pipelined = cfg.mode == ScheduleMode::Pipelined;
        match action {
            Action::SendStart(i) => {
                self.log(t, Node::Master, EventKind::SendStart);
                self.schedule(t + cfg.send, Action::SendEnd(i));
            }
            Action::SendEnd(i) => {
                self.log(t, Node::Master, EventKind::SendEnd);
                self.schedule(t + cfg.latency, Action::OrderArrive(i));
                if pipelined {
                    if i + 1 < k {
                        self.schedule(t, Action::SendStart(i + 1));
                    } else {
                        self.sending = false;
                        self.try_read(t);
                    }
                }
            }
            Action::OrderArrive(i) => {
                self.log(t, Node::Worker(i), EventKind::OrderArrive);
                if pipelined {
                    self.schedule(t, Action::ComputeStart(i));
                } else if i + 1 < k {
                    self.schedule(t, Action::SendStart(i + 1));
                } else {
                    for rank in 0..k {
                        self.schedule(t, Action::ComputeStart(rank));
                    }
                }
            }
            Action::ComputeStart(i) => {
                self.log(t, Node::Worker(i), EventKind::ComputeStart);
                self.schedule(t + cfg.compute_time(i), Action::ComputeEnd(i));
            }
            Action::ComputeEnd(i) => {
                self.log(t, Node::Worker(i), EventKind::ComputeEnd);
                self.computed += 1;
                if pipelined {
                    self.schedule(t, Action::ResultDepart(i));
                } else if self.computed == k {
                    self.schedule(t, Action::ResultDepart(0));
                }
            }
            Action::ResultDepart(i) => {
                self.log(t, Node::Worker(i), EventKind::ResultDepart);
                self.schedule(t + cfg.latency, Action::ResultArrive(i));
            }
            Action::ResultArrive(i) => {
                self.log(t, Node::Worker(i), EventKind::ResultArrive);
                if pipelined {
                    self.inbox.push_back(i);
                    self.try_read(t);
                } else if i + 1 < k {
                    self.schedule(t, Action::ResultDepart(i + 1));
                } else {
                    self.schedule(t + cfg.receive, Action::ReceiveEnd);
                }
            }
            Action::ReadDone => {
                self.reading = false;
                self.read += 1;
                if self.read == k {
                    self.schedule(t, Action::ReceiveEnd);
                } else {
                    self.try_read(t);
                }
            }
            Action::ReceiveEnd => {
                self.log(t, Node::Master, EventKind::ReceiveEnd);
                self.log(t, Node::Master, EventKind::BarrierPass);
                self.log(t, Node::Master, EventKind::EvaluateStart);
                self.schedule(t + cfg.evaluate, Action::EvaluateEnd);
            }
            Action::EvaluateEnd => {
                self.log(t, Node::Master, EventKind::EvaluateEnd);
            }
        }
    }

    fn try_read(&mut self, t: f64) {
        if self.sending || self.reading {
            return;
        }
        if self.inbox.pop_front().is_some() {
            self.reading = true;
            let per_result = self.cfg.receive / self.cfg.workers as f64;
            self.schedule(t + per_result, Action::ReadDone);
        }
    }
}

/// Simulates one iteration.
pub fn simulate_iteration(cfg: &ClusterConfig) -> Result<IterationTimeline> {
    cfg.validate()?;
    Ok(Engine::new(cfg).run())
}

/// Simulates `iterations` identical iterations. Timestamps in each timeline
/// are relative to the start of that iteration.
pub fn simulate_run(cfg: &ClusterConfig, iterations: usize) -> Result<RunTrace> {
    if iterations == 0 {
        return Err(Error::NoIterations);
    }
    let timeline = simulate_iteration(cfg)?;
    let mut total_time = 0.0;
    for _ in 0..iterations {
        total_time += timeline.t_measured;
    }
    Ok(RunTrace {
        iterations: alloc::vec![timeline; iterations],
        iteration_count: iterations,
        total_time,
    })
}

/// Simulated speedup `T(1) / T(K)` for each `K` in `ks`, splitting `p.work`
/// evenly over the workers.
pub fn measured_speedup(p: &BsfParams, mode: ScheduleMode, ks: &[u64]) -> Result<Vec<MeasuredPoint>> {
    p.validate()?;
    if ks.is_empty() {
        return Err(Error::EmptyRange {
            min: 0,
            max: 0,
            step: 0,
        });
    }
    if let Some(&bad) = ks.iter().find(|&&k| k == 0) {
        return Err(Error::InvalidWorkers(bad as f64));
    }
    let t1 = simulate_iteration(&ClusterConfig::uniform(p, 1, mode))?.t_measured;
    ks.iter()
        .map(|&k| {
            let t = simulate_iteration(&ClusterConfig::uniform(p, k as usize, mode))?.t_measured;
            Ok(MeasuredPoint {
                k,
                t_measured: t,
                speedup: speedup_from_times(t1, t)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: BsfParams = BsfParams::new(0.5, 1.0, 100.0, 4.0, 5.0);

    #[test]
    fn faithful_matches_hand_values() {
        let one = simulate_iteration(&ClusterConfig::uniform(&WORKED, 1, ScheduleMode::PaperFaithful)).unwrap();
        assert_eq!(one.t_measured, 111.0);
        let ten = simulate_iteration(&ClusterConfig::uniform(&WORKED, 10, ScheduleMode::PaperFaithful)).unwrap();
        assert_eq!(ten.t_measured, 39.0);
    }

    #[test]
    fn faithful_schedule_shape() {
        let cfg = ClusterConfig::uniform(&WORKED, 3, ScheduleMode::PaperFaithful);
        let tl = simulate_iteration(&cfg).unwrap();
        // blocking sends: 3 × (1 + 0.5)
        assert_eq!(tl.find(EventKind::OrderArrive, Node::Worker(2)), Some(4.5));
        for rank in 0..3 {
            assert_eq!(tl.find(EventKind::ComputeStart, Node::Worker(rank)), Some(4.5));
            let depart = tl.find(EventKind::ResultDepart, Node::Worker(rank)).unwrap();
            assert!((depart - (4.5 + 100.0 / 3.0 + 0.5 * rank as f64)).abs() < 1e-12);
        }
        let last_arrive = tl.find(EventKind::ResultArrive, Node::Worker(2)).unwrap();
        assert_eq!(tl.find(EventKind::ReceiveEnd, Node::Master), Some(last_arrive + 4.0));
        assert_eq!(tl.find(EventKind::BarrierPass, Node::Master), Some(last_arrive + 4.0));
        assert_eq!(tl.events.last().unwrap().kind, EventKind::EvaluateEnd);
        assert_eq!(tl.events.len(), 2 * 3 + 5 * 3 + 4);
    }

    #[test]
    fn pipelined_single_worker_equals_faithful() {
        let a = simulate_iteration(&ClusterConfig::uniform(&WORKED, 1, ScheduleMode::PaperFaithful)).unwrap();
        let b = simulate_iteration(&ClusterConfig::uniform(&WORKED, 1, ScheduleMode::Pipelined)).unwrap();
        assert_eq!(a.t_measured, b.t_measured);
    }

    #[test]
    fn pipelined_overlaps() {
        let cfg = ClusterConfig::uniform(&WORKED, 10, ScheduleMode::Pipelined);
        let tl = simulate_iteration(&cfg).unwrap();
        // back-to-back sends, worker 0 starts at t_s + L
        assert_eq!(tl.find(EventKind::ComputeStart, Node::Worker(0)), Some(1.5));
        assert!(tl.t_measured < 39.0);
        // last order at 10·1 + 0.5, compute 10, return 0.5, last read 0.4, evaluate 5
        assert!((tl.t_measured - 26.4).abs() < 1e-12);
    }

    #[test]
    fn run_and_errors() {
        let cfg = ClusterConfig::uniform(&WORKED, 4, ScheduleMode::PaperFaithful);
        let single = simulate_iteration(&cfg).unwrap().t_measured;
        let run = simulate_run(&cfg, 1).unwrap();
        assert_eq!(run.total_time, single);
        let run = simulate_run(&cfg, 7).unwrap();
        assert_eq!(run.iteration_count, 7);
        assert!((run.total_time - 7.0 * single).abs() <= 1e-12 * run.total_time);
        assert_eq!(simulate_run(&cfg, 0), Err(Error::NoIterations));

        let mut bad = cfg.clone();
        bad.compute = Compute::PerWorker(alloc::vec![1.0, 2.0]);
        assert_eq!(
            simulate_iteration(&bad),
            Err(Error::ComputeLength {
                expected: 4,
                found: 2
            })
        );
        bad.workers = 0;
        assert!(simulate_iteration(&bad).is_err());
        let neg = ClusterConfig {
            latency: -1.0,
            ..cfg
        };
        assert!(simulate_iteration(&neg).is_err());
    }

    #[test]
    fn speedup_curve() {
        let pts = measured_speedup(&WORKED, ScheduleMode::PaperFaithful, &[1]).unwrap();
        assert_eq!(pts[0].speedup, 1.0);
        let pts = measured_speedup(&WORKED, ScheduleMode::PaperFaithful, &[10]).unwrap();
        assert!((pts[0].speedup - 1110.0 / 390.0).abs() < 1e-12);
        assert!(measured_speedup(&WORKED, ScheduleMode::PaperFaithful, &[]).is_err());
        assert!(measured_speedup(&WORKED, ScheduleMode::PaperFaithful, &[0, 2]).is_err());
    }

    #[test]
    fn names_parse_back() {
        for kind in EventKind::ALL {
            assert_eq!(kind.as_str().parse::<EventKind>().unwrap(), kind);
        }
        assert_eq!("worker12".parse::<Node>().unwrap(), Node::Worker(12));
        assert_eq!("master".parse::<Node>().unwrap(), Node::Master);
        assert!("workerx".parse::<Node>().is_err());
    }
}
