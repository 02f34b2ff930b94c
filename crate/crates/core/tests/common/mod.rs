#![allow(dead_code)]

use anypath_core::topology::Link;
use anypath_core::{NodeId, Topology};
use rand::Rng;

pub const THREE_NODE: &str = include_str!("../../../../topologies/three_node.topo");
pub const SEVEN_NODE: &str = include_str!("../../../../topologies/seven_node.topo");

/// Random connected topology: source 1, destination `n`, each ordered pair
/// linked with probability `density`, link probabilities in `[lo, 1]`.
/// Redraws until the destination is reachable.
pub fn random_topology<R: Rng>(rng: &mut R, n: u32, density: f64, lo: f64) -> Topology {
    loop {
        let mut links = Vec::new();
        for a in 1..=n {
            for b in 1..=n {
                if a != b && a != n && rng.random_bool(density) {
                    links.push(Link {
                        from: NodeId(a),
                        to: NodeId(b),
                        prob: rng.random_range(lo..=1.0),
                    });
                }
            }
        }
        if let Ok(t) = Topology::new(n, NodeId(1), NodeId(n), links) {
            return t;
        }
    }
}
