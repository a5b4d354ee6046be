// SPDX-License-Identifier: Apache-2.0 OR MIT

//! In-process BSF skeleton.
//!
//! The master thread owns the program state. Each iteration it builds one
//! order, hands a shared reference to every worker, waits for all `K`
//! partial results (the barrier), puts them in rank order and reduces them.
//! Workers either run on their own threads, talking to the master over
//! channels, or are emulated sequentially on the master thread.

use std::ops::Range;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bsf_core::partition::partition;
use bsf_core::{BsfProgram, WireSize};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibrate::CommCostSpec;

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// How worker steps are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// One thread per worker, fed through channels.
    #[default]
    Threaded,
    /// Worker steps run one after another on the master thread, in rank order.
    Sequential,
    /// Like `Sequential`, but ranks run in a seeded random order each
    /// iteration. Results must not depend on it.
    Shuffled(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub workers: usize,
    pub max_iterations: usize,
    pub execution: Execution,
    /// When set, the master busy-waits for the modeled message costs: one
    /// blocking `L + t_s` per order and `K·L + t_r` for the results.
    pub emulate_comm: Option<CommCostSpec>,
}

impl RunConfig {
    pub fn new(workers: usize) -> Self {
        Self {
            workers,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            execution: Execution::default(),
            emulate_comm: None,
        }
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn emulate_comm(mut self, comm: CommCostSpec) -> Self {
        self.emulate_comm = Some(comm);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The exit condition held.
    Converged,
    /// `max_iterations` ran out first.
    IterationLimit,
}

/// Phases of one instrumented iteration, as seen by the master.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Building the order and handing it to the workers.
    Send,
    /// Waiting for every worker's result.
    Compute,
    /// Arranging results in rank order.
    Gather,
    Reduce,
    ExitCheck,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Send,
        Phase::Compute,
        Phase::Gather,
        Phase::Reduce,
        Phase::ExitCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Send => "send",
            Phase::Compute => "compute",
            Phase::Gather => "gather",
            Phase::Reduce => "reduce",
            Phase::ExitCheck => "exit_check",
        }
    }
}

/// Wall-clock seconds spent in each phase of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTiming {
    /// 1-based.
    pub iteration: usize,
    pub send: f64,
    pub compute: f64,
    pub gather: f64,
    pub reduce: f64,
    pub exit_check: f64,
    /// Whole iteration, measured separately from the phases.
    pub total: f64,
}

impl IterationTiming {
    pub fn phase(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Send => self.send,
            Phase::Compute => self.compute,
            Phase::Gather => self.gather,
            Phase::Reduce => self.reduce,
            Phase::ExitCheck => self.exit_check,
        }
    }

    pub fn phase_sum(&self) -> f64 {
        Phase::ALL.iter().map(|&p| self.phase(p)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<O> {
    pub output: O,
    /// Number of times the iteration body ran.
    pub iterations: usize,
    pub termination: Termination,
    pub timings: Vec<IterationTiming>,
}

impl<O> RunOutcome<O> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError<E> {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("payload failed during initialization: {0}")]
    Init(E),
    #[error("payload failed in iteration {iteration}: {error}")]
    Payload { iteration: usize, error: E },
}

fn spin_for(seconds: f64) {
    if seconds <= 0.0 {
        return;
    }
    let target = Duration::from_secs_f64(seconds);
    let start = Instant::now();
    while start.elapsed() < target {
        std::hint::spin_loop();
    }
}

fn secs(from: Instant, to: Instant) -> f64 {
    to.duration_since(from).as_secs_f64()
}

/// Runs `program` on `cfg.workers` workers until its exit condition holds or
/// `cfg.max_iterations` iterations have run.
pub fn run_bsf<P>(program: &P, cfg: &RunConfig) -> Result<RunOutcome<P::Output>, RunError<P::Error>>
where
    P: BsfProgram + Sync,
    P::Order: Send + Sync,
    P::Partial: Send,
    P::Error: Send,
{
    if cfg.workers == 0 {
        return Err(RunError::Config("worker count must be at least 1".into()));
    }
    if cfg.max_iterations == 0 {
        return Err(RunError::Config("max_iterations must be at least 1".into()));
    }
    let slices: Vec<Range<usize>> = partition(program.n_items(), cfg.workers)
        .map_err(|e| RunError::Config(e.to_string()))?
        .slices
        .iter()
        .map(|s| s.range())
        .collect();

    match cfg.execution {
        Execution::Threaded => std::thread::scope(|scope| {
            let (result_tx, result_rx) = mpsc::channel();
            let mut order_txs = Vec::with_capacity(cfg.workers);
            for (rank, range) in slices.iter().cloned().enumerate() {
                let (order_tx, order_rx) = mpsc::channel::<Arc<P::Order>>();
                let result_tx = result_tx.clone();
                scope.spawn(move || {
                    for order in order_rx {
                        let partial = program.worker_step(&order, range.clone(), rank);
                        if result_tx.send((rank, partial)).is_err() {
                            break;
                        }
                    }
                });
                order_txs.push(order_tx);
            }
            drop(result_tx);
            let mut gather = |order: Arc<P::Order>| -> Gathered<P> {
                for tx in &order_txs {
                    // a worker only hangs up after the master does
                    let _ = tx.send(Arc::clone(&order));
                }
                (0..order_txs.len())
                    .map_while(|_| result_rx.recv().ok())
                    .collect()
            };
            master_loop(program, cfg, &mut gather)
        }),
        Execution::Sequential | Execution::Shuffled(_) => {
            let mut rng = match cfg.execution {
                Execution::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
                _ => None,
            };
            let mut ranks: Vec<usize> = (0..cfg.workers).collect();
            let mut gather = |order: Arc<P::Order>| {
                if let Some(rng) = rng.as_mut() {
                    ranks.shuffle(rng);
                }
                ranks
                    .iter()
                    .map(|&rank| (rank, program.worker_step(&order, slices[rank].clone(), rank)))
                    .collect()
            };
            master_loop(program, cfg, &mut gather)
        }
    }
}

type Gathered<P> = Vec<(
    usize,
    Result<<P as BsfProgram>::Partial, <P as BsfProgram>::Error>,
)>;

fn master_loop<P: BsfProgram>(
    program: &P,
    cfg: &RunConfig,
    broadcast_and_collect: &mut dyn FnMut(Arc<P::Order>) -> Gathered<P>,
) -> Result<RunOutcome<P::Output>, RunError<P::Error>> {
    let k = cfg.workers;
    let mut state = program.init().map_err(RunError::Init)?;
    let mut done = program.exit_condition(&state);
    let mut iterations = 0;
    let mut timings = Vec::new();

    while !done && iterations < cfg.max_iterations {
        iterations += 1;
        let fail = |error| RunError::Payload {
            iteration: iterations,
            error,
        };
        let start = Instant::now();
        let order = Arc::new(program.make_order(&state));
        if let Some(comm) = &cfg.emulate_comm {
            let per_order = comm.latency + comm.transfer_time(order.wire_size());
            for _ in 0..k {
                spin_for(per_order);
            }
        }
        let sent = Instant::now();

        let arrivals = broadcast_and_collect(order);
        let computed = Instant::now();

        let mut slots: Vec<Option<P::Partial>> = (0..k).map(|_| None).collect();
        for (rank, partial) in arrivals {
            slots[rank] = Some(partial.map_err(fail)?);
        }
        let partials: Vec<P::Partial> = slots
            .into_iter()
            .enumerate()
            .map(|(rank, slot)| {
                slot.ok_or_else(|| RunError::Config(format!("worker {rank} returned no result")))
            })
            .collect::<Result<_, _>>()?;
        if let Some(comm) = &cfg.emulate_comm {
            let bytes: usize = partials.iter().map(WireSize::wire_size).sum();
            spin_for(k as f64 * comm.latency + comm.transfer_time(bytes));
        }
        let gathered = Instant::now();

        state = program.reduce(partials, state).map_err(fail)?;
        let reduced = Instant::now();
        done = program.exit_condition(&state);
        let checked = Instant::now();

        timings.push(IterationTiming {
            iteration: iterations,
            send: secs(start, sent),
            compute: secs(sent, computed),
            gather: secs(computed, gathered),
            reduce: secs(gathered, reduced),
            exit_check: secs(reduced, checked),
            total: start.elapsed().as_secs_f64(),
        });
    }

    Ok(RunOutcome {
        output: program.finalize(state),
        iterations,
        termination: if done {
            Termination::Converged
        } else {
            Termination::IterationLimit
        },
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Sums `0..n` in slices; finishes once `limit` iterations have run.
    struct Counter {
        n: usize,
        limit: Option<usize>,
        fail_at: Option<usize>,
        steps: AtomicUsize,
    }

    impl Counter {
        fn new(n: usize, limit: Option<usize>) -> Self {
            Self {
                n,
                limit,
                fail_at: None,
                steps: AtomicUsize::new(0),
            }
        }
    }

    #[derive(Debug, PartialEq)]
    struct Boom(usize);

    impl std::fmt::Display for Boom {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            write!(f, "boom at {}", self.0)
        }
    }

    impl BsfProgram for Counter {
        type State = (usize, Vec<Vec<usize>>);
        type Order = usize;
        type Partial = Vec<usize>;
        type Output = (usize, Vec<Vec<usize>>);
        type Error = Boom;

        fn init(&self) -> Result<Self::State, Boom> {
            Ok((0, Vec::new()))
        }
        fn n_items(&self) -> usize {
            self.n
        }
        fn make_order(&self, state: &Self::State) -> usize {
            state.0
        }
        fn worker_step(&self, order: &usize, slice: Range<usize>, rank: usize) -> Result<Vec<usize>, Boom> {
            self.steps.fetch_add(1, Ordering::SeqCst);
            if self.fail_at == Some(*order + 1) && rank == 0 {
                return Err(Boom(*order + 1));
            }
            Ok(slice.collect())
        }
        fn reduce(&self, partials: Vec<Vec<usize>>, (i, mut seen): Self::State) -> Result<Self::State, Boom> {
            seen.push(partials.concat());
            Ok((i + 1, seen))
        }
        fn exit_condition(&self, state: &Self::State) -> bool {
            self.limit.is_some_and(|l| state.0 >= l)
        }
        fn finalize(&self, state: Self::State) -> Self::Output {
            state
        }
    }

    #[test]
    fn immediately_true_exit_runs_no_body() {
        let p = Counter::new(10, Some(0));
        let out = run_bsf(&p, &RunConfig::new(3)).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged());
        assert!(out.timings.is_empty());
        assert_eq!(p.steps.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn iteration_limit_is_not_an_error() {
        let p = Counter::new(10, None);
        let out = run_bsf(&p, &RunConfig::new(2).max_iterations(5)).unwrap();
        assert_eq!(out.iterations, 5);
        assert_eq!(out.termination, Termination::IterationLimit);
        assert_eq!(out.timings.len(), 5);
        assert_eq!(p.steps.load(Ordering::SeqCst), 10);
    }

    #[test]
    fn results_arrive_in_rank_order() {
        let expected: Vec<usize> = (0..37).collect();
        for execution in [Execution::Threaded, Execution::Sequential, Execution::Shuffled(9)] {
            let p = Counter::new(37, Some(4));
            let out = run_bsf(&p, &RunConfig::new(5).execution(execution)).unwrap();
            assert_eq!(out.iterations, 4);
            for seen in &out.output.1 {
                assert_eq!(seen, &expected, "{execution:?}");
            }
        }
    }

    #[test]
    fn payload_error_carries_iteration() {
        for execution in [Execution::Threaded, Execution::Sequential] {
            let mut p = Counter::new(8, Some(10));
            p.fail_at = Some(3);
            let err = run_bsf(&p, &RunConfig::new(2).execution(execution)).unwrap_err();
            match err {
                RunError::Payload { iteration, error } => {
                    assert_eq!(iteration, 3);
                    assert_eq!(error, Boom(3));
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = Counter::new(8, Some(1));
        assert!(matches!(run_bsf(&p, &RunConfig::new(0)), Err(RunError::Config(_))));
        assert!(matches!(
            run_bsf(&p, &RunConfig::new(1).max_iterations(0)),
            Err(RunError::Config(_))
        ));
    }

    #[test]
    fn phases_account_for_iteration_time() {
        let p = Counter::new(1000, Some(20));
        let out = run_bsf(&p, &RunConfig::new(4)).unwrap();
        for t in &out.timings {
            for phase in Phase::ALL {
                assert!(t.phase(phase) >= 0.0);
            }
            assert!((t.phase_sum() - t.total).abs() <= 0.05 * t.total);
        }
    }

    #[test]
    fn emulated_comm_costs_show_up() {
        let p = Counter::new(4, Some(2));
        let comm = CommCostSpec::new(1e-3, 0.0);
        let out = run_bsf(&p, &RunConfig::new(2).emulate_comm(comm)).unwrap();
        for t in &out.timings {
            // two blocking sends of 1ms each, then 2ms for the return path
            assert!(t.send >= 2e-3);
            assert!(t.gather >= 2e-3);
        }
    }
}
