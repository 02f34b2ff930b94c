mod common;

use anypath_core::anypath::{
    anypath_distance, brute_force_anypath, evaluate_table_cost, hyperlink_delivery_ratio,
    relay_weights, shortest_anypath_first, single_path_distances,
};
use anypath_core::rng::seeded;
use anypath_core::{parse_topology, NodeId};
use proptest::prelude::*;

/// Relay weights by enumerating every joint reception outcome.
fn enumerated_weights(probs: &[f64]) -> Vec<f64> {
    let k = probs.len();
    let mut first = vec![0.0; k];
    for mask in 0u32..(1 << k) {
        let pr: f64 = (0..k)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    probs[i]
                } else {
                    1.0 - probs[i]
                }
            })
            .product();
        if mask != 0 {
            first[mask.trailing_zeros() as usize] += pr;
        }
    }
    let total: f64 = first.iter().sum();
    first.iter().map(|f| f / total).collect()
}

proptest! {
    #[test]
    fn relay_weights_sum_to_one(probs in prop::collection::vec(0.01f64..=1.0, 1..8)) {
        let w = relay_weights(&probs).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in w.iter().zip(enumerated_weights(&probs)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn delivery_ratio_grows_with_the_set(probs in prop::collection::vec(0.0f64..=1.0, 1..8), extra in 0.0f64..=1.0) {
        let base = hyperlink_delivery_ratio(&probs).unwrap();
        let mut more = probs.clone();
        more.push(extra);
        prop_assert!(hyperlink_delivery_ratio(&more).unwrap() >= base - 1e-15);
        for &p in &probs {
            prop_assert!(base >= p - 1e-15);
        }
    }

    #[test]
    fn closer_relay_never_hurts(
        relays in prop::collection::vec((0.05f64..=1.0, 0.0f64..20.0), 1..6),
        new_p in 0.05f64..=1.0,
        frac in 0.0f64..1.0,
    ) {
        let mut relays = relays;
        relays.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (p, d): (Vec<f64>, Vec<f64>) = relays.iter().copied().unzip();
        let before = anypath_distance(&p, &d).unwrap();
        let new_d = frac * before;
        let mut grown = relays.clone();
        grown.push((new_p, new_d));
        grown.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (p2, d2): (Vec<f64>, Vec<f64>) = grown.into_iter().unzip();
        prop_assert!(anypath_distance(&p2, &d2).unwrap() <= before + 1e-9);
    }

    #[test]
    fn saf_table_is_self_consistent(seed in any::<u64>(), n in 2u32..9) {
        let topo = common::random_topology(&mut seeded(seed), n, 0.5, 0.1);
        let probs = topo.true_probs();
        let table = shortest_anypath_first(&probs, &topo).unwrap();
        prop_assert!(table.consistency_residual(&probs, &topo).unwrap() < 1e-9);
        let evaluated = evaluate_table_cost(&table, &probs, &topo).unwrap();
        for (a, b) in evaluated.iter().zip(table.distances()) {
            prop_assert!(a == &b || (a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn saf_matches_brute_force_on_small_networks() {
    let mut rng = seeded(1);
    for _ in 0..20 {
        let n = 3 + (rand::Rng::random_range(&mut rng, 0..3u32));
        let topo = common::random_topology(&mut rng, n, 0.6, 0.1);
        let probs = topo.true_probs();
        let saf = shortest_anypath_first(&probs, &topo).unwrap();
        let oracle = brute_force_anypath(&probs, &topo).unwrap();
        for node in topo.nodes() {
            let (a, b) = (saf.distance(node), oracle.distance(node));
            assert!(
                a == b || (a - b).abs() < 1e-9,
                "{topo}node {node}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn anypath_never_worse_than_single_path() {
    let mut rng = seeded(2);
    for _ in 0..50 {
        let n = 2 + rand::Rng::random_range(&mut rng, 0..9u32);
        let topo = common::random_topology(&mut rng, n, 0.4, 0.1);
        let probs = topo.true_probs();
        let saf = shortest_anypath_first(&probs, &topo)
            .unwrap()
            .distance(topo.source());
        let single = single_path_distances(&probs, &topo).unwrap()[topo.source().index()];
        assert!(saf <= single + 1e-9, "{saf} > {single}");
    }
}

#[test]
fn worked_example_distances() {
    let topo = parse_topology(common::THREE_NODE).unwrap();
    let table = shortest_anypath_first(&topo.true_probs(), &topo).unwrap();
    assert!((table.distance(NodeId(1)) - 14.0 / 9.0).abs() < 1e-12);
    assert_eq!(table.forwarding_set(NodeId(1)), &[NodeId(3), NodeId(2)]);
    assert_eq!(table.distance(NodeId(2)), 1.0);
    let single = single_path_distances(&topo.true_probs(), &topo).unwrap();
    assert!((single[0] - 2.0).abs() < 1e-12);
}
