// SPDX-License-Identifier: Apache-2.0 OR MIT

use bsf_core::cost::predict_tk;
use bsf_core::sim::{measured_speedup, simulate_iteration, Compute};
use bsf_core::{BsfParams, ClusterConfig, EventKind, IterationTimeline, Node, ScheduleMode};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = BsfParams> {
    (0.0f64..5.0, 0.0f64..5.0, 0.0f64..1e5, 0.0f64..100.0, 0.0f64..100.0)
        .prop_map(|(l, ts, tw, tr, tp)| BsfParams::new(l, ts, tw, tr, tp))
}

fn uneven_cluster() -> impl Strategy<Value = ClusterConfig> {
    (params(), prop::collection::vec(0.0f64..500.0, 1..40), any::<bool>()).prop_map(|(p, work, pipe)| {
        let mut cfg = ClusterConfig::uniform(&p, work.len(), mode(pipe));
        cfg.compute = Compute::PerWorker(work);
        cfg
    })
}

fn mode(pipelined: bool) -> ScheduleMode {
    if pipelined {
        ScheduleMode::Pipelined
    } else {
        ScheduleMode::PaperFaithful
    }
}

fn check_timeline(cfg: &ClusterConfig, tl: &IterationTimeline) -> Result<(), TestCaseError> {
    prop_assert!(tl.events.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));

    let send_ends: Vec<f64> = tl.of_kind(EventKind::SendEnd).map(|e| e.timestamp).collect();
    prop_assert_eq!(send_ends.len(), cfg.workers);
    for (rank, &send_end) in send_ends.iter().enumerate() {
        let w = Node::Worker(rank);
        let arrive = tl.find(EventKind::OrderArrive, w).unwrap();
        prop_assert_eq!(arrive, send_end + cfg.latency);

        let starts: Vec<f64> = tl
            .events
            .iter()
            .filter(|e| e.node == w && e.kind == EventKind::ComputeStart)
            .map(|e| e.timestamp)
            .collect();
        let ends: Vec<f64> = tl
            .events
            .iter()
            .filter(|e| e.node == w && e.kind == EventKind::ComputeEnd)
            .map(|e| e.timestamp)
            .collect();
        prop_assert_eq!(starts.len(), 1);
        prop_assert_eq!(ends.len(), 1);
        prop_assert_eq!(ends[0], starts[0] + cfg.compute_time(rank));

        let depart = tl.find(EventKind::ResultDepart, w).unwrap();
        prop_assert_eq!(tl.find(EventKind::ResultArrive, w).unwrap(), depart + cfg.latency);
    }

    let last_arrive = tl
        .of_kind(EventKind::ResultArrive)
        .map(|e| e.timestamp)
        .fold(f64::NEG_INFINITY, f64::max);
    let barrier = tl.find(EventKind::BarrierPass, Node::Master).unwrap();
    let eval = tl.find(EventKind::EvaluateStart, Node::Master).unwrap();
    prop_assert!(barrier >= last_arrive);
    prop_assert!(eval >= last_arrive);
    prop_assert_eq!(tl.t_measured, tl.events.last().unwrap().timestamp);
    Ok(())
}

proptest! {
    #[test]
    fn faithful_matches_closed_form(p in params(), k in 1usize..300) {
        let tl = simulate_iteration(&ClusterConfig::uniform(&p, k, ScheduleMode::PaperFaithful)).unwrap();
        let predicted = predict_tk(&p, k as f64).unwrap().total;
        prop_assert!((tl.t_measured - predicted).abs() <= 1e-9 * predicted.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn pipelined_never_slower(p in params(), k in 1usize..300) {
        let faithful = simulate_iteration(&ClusterConfig::uniform(&p, k, ScheduleMode::PaperFaithful)).unwrap();
        let piped = simulate_iteration(&ClusterConfig::uniform(&p, k, ScheduleMode::Pipelined)).unwrap();
        // equal up to rounding of differently ordered sums
        prop_assert!(piped.t_measured <= faithful.t_measured * (1.0 + 1e-12));
        if k == 1 {
            prop_assert!((piped.t_measured - faithful.t_measured).abs() <= 1e-12 * faithful.t_measured);
        }
    }

    #[test]
    fn uneven_pipelined_never_slower(cfg in uneven_cluster()) {
        let faithful = ClusterConfig { mode: ScheduleMode::PaperFaithful, ..cfg.clone() };
        let piped = ClusterConfig { mode: ScheduleMode::Pipelined, ..cfg };
        let a = simulate_iteration(&faithful).unwrap().t_measured;
        let b = simulate_iteration(&piped).unwrap().t_measured;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn event_sanity(cfg in uneven_cluster()) {
        let tl = simulate_iteration(&cfg).unwrap();
        check_timeline(&cfg, &tl)?;
    }

    #[test]
    fn uniform_event_sanity(p in params(), k in 1usize..64, pipe in any::<bool>()) {
        let cfg = ClusterConfig::uniform(&p, k, mode(pipe));
        let tl = simulate_iteration(&cfg).unwrap();
        check_timeline(&cfg, &tl)?;
    }

    #[test]
    fn deterministic(cfg in uneven_cluster()) {
        let a = simulate_iteration(&cfg).unwrap();
        let b = simulate_iteration(&cfg).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn simulated_curve_peaks_at_fifty() {
    let p = BsfParams::new(1.0, 2.0, 10_000.0, 0.0, 0.0);
    let ks: Vec<u64> = (1..=200).collect();
    let pts = measured_speedup(&p, ScheduleMode::PaperFaithful, &ks).unwrap();
    let best = pts
        .iter()
        .fold(pts[0], |best, pt| if pt.speedup > best.speedup { *pt } else { best });
    assert_eq!(best.k, 50);
}
