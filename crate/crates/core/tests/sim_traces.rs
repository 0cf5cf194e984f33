use std::collections::HashSet;
use std::path::PathBuf;

use ncsync::coding::{BlockStore, DEFAULT_PAYLOAD_LEN};
use ncsync::sim::{run, write_trace, LossModel, Outcome, Scheme, SimConfig, SlotEvent};
use ncsync::{rng, NodeId, Topology};
use rand::Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn store(n: usize, seed: u64) -> BlockStore {
    BlockStore::random(n, DEFAULT_PAYLOAD_LEN, &mut rng::stream(seed, &[0x5])).unwrap()
}

fn run_lossless(t: &Topology, scheme: Scheme) -> ncsync::SimResult {
    let n = t.node_count();
    run(t, SimConfig::new(scheme, n, 0.0, 1), &store(n, 1)).unwrap()
}

fn golden(name: &str) -> Vec<SlotEvent> {
    std::fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .map(|l| SlotEvent::from_json_line(l).unwrap())
        .collect()
}

#[test]
fn path3_matches_hand_traces() {
    let t = Topology::path(3).unwrap();
    for (scheme, slots) in [(Scheme::UDbs, 5), (Scheme::CDbs, 4), (Scheme::CDbsNs, 4)] {
        let r = run_lossless(&t, scheme);
        assert!(r.converged);
        assert_eq!(r.slots, slots, "{scheme}");
        assert_eq!(
            r.events,
            golden(&format!("path3_{}.jsonl", scheme.flag_name())),
            "{scheme}"
        );
    }
}

#[test]
fn k5_matches_hand_traces() {
    let t = Topology::complete(5).unwrap();
    for scheme in Scheme::ALL {
        let r = run_lossless(&t, scheme);
        assert_eq!(
            r.events,
            golden(&format!("k5_{}.jsonl", scheme.flag_name())),
            "{scheme}"
        );
    }
}

#[test]
fn trace_file_bytes_match_golden() {
    let t = Topology::path(3).unwrap();
    let r = run_lossless(&t, Scheme::CDbs);
    let mut buf = Vec::new();
    write_trace(&r.events, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        std::fs::read_to_string(fixture("path3_c-dbs.jsonl")).unwrap()
    );
}

/// Fewest slots any broadcast schedule needs, by breadth-first search over
/// knowledge states. A packet is any non-empty subset of the sender's
/// blocks; a receiver learns a block iff exactly one component is new to it.
fn optimal_slots(t: &Topology) -> usize {
    let n = t.node_count();
    let full = (1u64 << n) - 1;
    let start: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    let mut frontier = vec![start.clone()];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([start]);
    for depth in 0.. {
        if frontier.iter().any(|s| s.iter().all(|&h| h == full)) {
            return depth;
        }
        let mut next = Vec::new();
        for s in &frontier {
            for tx in 0..n {
                let own = s[tx];
                let mut sub = own;
                while sub != 0 {
                    let mut after = s.clone();
                    for rx in 0..n {
                        if rx != tx && t.has_edge(NodeId(tx), NodeId(rx)) {
                            let unknown = sub & !s[rx];
                            if unknown.count_ones() == 1 {
                                after[rx] |= unknown;
                            }
                        }
                    }
                    if after != *s && seen.insert(after.clone()) {
                        next.push(after);
                    }
                    sub = (sub - 1) & own;
                }
            }
        }
        frontier = next;
    }
    unreachable!()
}

#[test]
fn complete_graphs_hit_the_optimum_of_n_slots() {
    for n in 3..=5 {
        let t = Topology::complete(n).unwrap();
        assert_eq!(optimal_slots(&t), n);
        for scheme in Scheme::ALL {
            assert_eq!(
                run_lossless(&t, scheme).slots as usize,
                n,
                "{scheme} on K{n}"
            );
        }
    }
}

#[test]
fn coded_schemes_are_optimal_on_path3() {
    let t = Topology::path(3).unwrap();
    assert_eq!(optimal_slots(&t), 4);
}

#[test]
fn lossless_runs_respect_slot_bounds() {
    let mut r = rng::stream(31, &[]);
    for _ in 0..150 {
        let n = r.gen_range(2..=11);
        let t = Topology::sample_connected(n, r.gen_range(0.3..1.0), 100_000, &mut r).unwrap();
        for scheme in Scheme::ALL {
            let res = run_lossless(&t, scheme);
            assert!(res.converged);
            assert!(
                res.slots as usize >= n && res.slots as usize <= n * (n - 1),
                "{scheme}: {}",
                res.slots
            );
            assert_eq!(res.events.len(), res.slots as usize);
            if scheme == Scheme::UDbs {
                assert!(res.events.iter().all(|e| e.components.len() == 1));
            }
            if scheme == Scheme::CDbsNs {
                assert_eq!(res.skipped_turns, 0);
            }
            for e in &res.events {
                let rx: Vec<usize> = e.outcomes.iter().map(|(v, _)| v.0).collect();
                assert_eq!(rx, t.neighbors(e.tx).to_vec());
                assert!(e.beta >= 1);
            }
            assert!(res.final_knowledge.iter().all(|k| k.count() == n));
        }
    }
}

#[test]
fn lossy_runs_are_reproducible() {
    let t = Topology::path(3).unwrap();
    for loss in [LossModel::PerBroadcast, LossModel::PerReceiver] {
        let mut cfg = SimConfig::new(Scheme::CDbs, 3, 0.5, 42);
        cfg.loss = loss;
        let a = run(&t, cfg, &store(3, 0)).unwrap();
        let b = run(&t, cfg, &store(3, 0)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn lossy_path3_matches_recorded_trace() {
    let t = Topology::path(3).unwrap();
    let r = run(&t, SimConfig::new(Scheme::CDbs, 3, 0.5, 42), &store(3, 0)).unwrap();
    assert!(r.converged);
    assert_eq!(r.events, golden("path3_c-dbs_pe0.5_seed42.jsonl"));
}

#[test]
fn zero_loss_never_loses_and_full_loss_always_does() {
    let t = Topology::complete(4).unwrap();
    for loss in [LossModel::PerBroadcast, LossModel::PerReceiver] {
        let mut cfg = SimConfig::new(Scheme::CDbsNs, 4, 0.0, 9);
        cfg.loss = loss;
        let r = run(&t, cfg, &store(4, 2)).unwrap();
        assert!(r
            .events
            .iter()
            .flat_map(|e| &e.outcomes)
            .all(|(_, o)| *o != Outcome::Lost));
        cfg.pe = 1.0;
        cfg.max_slots = 30;
        let r = run(&t, cfg, &store(4, 2)).unwrap();
        assert!(!r.converged);
        assert_eq!(r.slots, 30);
    }
}

#[test]
fn per_broadcast_loss_hits_all_receivers_together() {
    let t = Topology::complete(6).unwrap();
    let r = run(&t, SimConfig::new(Scheme::UDbs, 6, 0.3, 3), &store(6, 3)).unwrap();
    for e in &r.events {
        let lost = e
            .outcomes
            .iter()
            .filter(|(_, o)| *o == Outcome::Lost)
            .count();
        assert!(lost == 0 || lost == e.outcomes.len());
    }
    assert!(r
        .events
        .iter()
        .any(|e| e.outcomes.iter().all(|(_, o)| *o == Outcome::Lost)));
}

#[test]
fn mean_slots_grow_with_error_rate() {
    let mut r = rng::stream(8, &[]);
    let t = Topology::sample_connected(8, 0.5, 100_000, &mut r).unwrap();
    let st = store(8, 8);
    for loss in [LossModel::PerBroadcast, LossModel::PerReceiver] {
        for scheme in Scheme::ALL {
            let means: Vec<f64> = [0.0, 0.1, 0.2]
                .iter()
                .map(|&pe| {
                    (0..1000u64)
                        .map(|seed| {
                            let mut cfg = SimConfig::new(scheme, 8, pe, seed);
                            cfg.loss = loss;
                            run(&t, cfg, &st).unwrap().slots as f64
                        })
                        .sum::<f64>()
                        / 1000.0
                })
                .collect();
            assert!(
                means[0] <= means[1] && means[1] <= means[2],
                "{scheme} {loss:?}: {means:?}"
            );
        }
    }
}

#[test]
fn every_decoded_block_is_new_and_recorded() {
    let mut r = rng::stream(19, &[]);
    for _ in 0..50 {
        let n = r.gen_range(3..=9);
        let t = Topology::sample_connected(n, 0.6, 100_000, &mut r).unwrap();
        for loss in [LossModel::PerBroadcast, LossModel::PerReceiver] {
            let mut cfg = SimConfig::new(Scheme::CDbsNs, n, 0.2, r.gen());
            cfg.loss = loss;
            let res = run(&t, cfg, &store(n, 4)).unwrap();
            let mut held: Vec<u64> = (0..n).map(|i| 1 << i).collect();
            for e in &res.events {
                for &(rx, o) in &e.outcomes {
                    if let Outcome::Decoded(b) = o {
                        assert_eq!(held[rx.0] & (1 << b.0), 0);
                        assert!(e.components.contains(b.0));
                        held[rx.0] |= 1 << b.0;
                    }
                }
            }
            let final_held: Vec<u64> = res
                .final_knowledge
                .iter()
                .map(|k| k.held().bits())
                .collect();
            assert_eq!(held, final_held);
        }
    }
}
