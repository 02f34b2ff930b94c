//! Slotted Bernoulli channel and opportunistic packet forwarding.
//!
//! Each link reception is an independent Bernoulli draw with the link's true
//! probability. A broadcast samples every targeted link once and counts as a
//! single transmission.

use alloc::vec::Vec;

use rand::Rng;

use crate::anypath::ForwardingTable;
use crate::topology::{LinkId, NodeId, Topology};

/// Per-hop re-broadcast limit used when none is configured.
pub const DEFAULT_RETRY_CAP: u32 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("no link {from} -> {to}")]
    MissingLink { from: NodeId, to: NodeId },
    #[error("broadcast from node {0} has no targets")]
    NoTargets(NodeId),
    #[error("node {0} has an empty forwarding set but is not the destination")]
    EmptyForwardingSet(NodeId),
    #[error("source node {0} has no finite route in the forwarding table")]
    SourceUnreachable(NodeId),
    #[error("packet revisited node {0}; forwarding table has a loop")]
    RoutingLoop(NodeId),
    #[error("retry cap must be positive")]
    ZeroRetryCap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptionOutcome {
    pub transmitter: NodeId,
    /// One entry per target, in target order.
    pub receivers: Vec<(NodeId, bool)>,
}

impl ReceptionOutcome {
    /// First target that received, in target (priority) order.
    pub fn first_receiver(&self) -> Option<NodeId> {
        self.receivers.iter().find(|(_, got)| *got).map(|(n, _)| *n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketTrace {
    /// `(transmitting node, broadcasts made there)` in path order.
    pub hops: Vec<(NodeId, u32)>,
    pub delivered: bool,
    pub total_transmissions: u64,
}

/// One Bernoulli draw. Consumes exactly one value from `rng`.
#[inline]
pub fn sample_link<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Broadcasts once from `transmitter` to every node in `targets`.
pub fn broadcast<R: Rng + ?Sized>(
    transmitter: NodeId,
    targets: &[NodeId],
    true_probs: &[f64],
    topo: &Topology,
    rng: &mut R,
) -> Result<ReceptionOutcome, ChannelError> {
    let links = resolve_links(transmitter, targets, topo)?;
    let receivers = targets
        .iter()
        .zip(&links)
        .map(|(&to, id)| (to, sample_link(true_probs[id.0], rng)))
        .collect();
    Ok(ReceptionOutcome {
        transmitter,
        receivers,
    })
}

fn resolve_links(
    from: NodeId,
    targets: &[NodeId],
    topo: &Topology,
) -> Result<Vec<LinkId>, ChannelError> {
    if targets.is_empty() {
        return Err(ChannelError::NoTargets(from));
    }
    targets
        .iter()
        .map(|&to| {
            topo.link_id(from, to)
                .ok_or(ChannelError::MissingLink { from, to })
        })
        .collect()
}

/// Routes one packet from the source along `table`. See
/// [`route_packet_observed`] for a variant that reports every link sample.
pub fn route_packet<R: Rng + ?Sized>(
    table: &ForwardingTable,
    true_probs: &[f64],
    topo: &Topology,
    rng: &mut R,
    retry_cap: u32,
) -> Result<PacketTrace, ChannelError> {
    route_packet_observed(table, true_probs, topo, rng, retry_cap, |_, _| {})
}

/// Routes one packet and calls `observe(link, received)` for every link
/// sampled along the way, including re-broadcasts.
///
/// At each node the packet is broadcast to the forwarding set; the
/// highest-priority receiver carries it on and the others drop it. If no
/// member receives, the node re-broadcasts. A hop that reaches `retry_cap`
/// broadcasts without a reception ends the packet undelivered.
pub fn route_packet_observed<R, F>(
    table: &ForwardingTable,
    true_probs: &[f64],
    topo: &Topology,
    rng: &mut R,
    retry_cap: u32,
    mut observe: F,
) -> Result<PacketTrace, ChannelError>
where
    R: Rng + ?Sized,
    F: FnMut(LinkId, bool),
{
    if retry_cap == 0 {
        return Err(ChannelError::ZeroRetryCap);
    }
    let source = topo.source();
    let dest = topo.destination();
    if !table.distance(source).is_finite() {
        return Err(ChannelError::SourceUnreachable(source));
    }

    let mut visited = alloc::vec![false; topo.node_count() as usize];
    let mut hops = Vec::new();
    let mut total = 0u64;
    let mut node = source;
    while node != dest {
        if core::mem::replace(&mut visited[node.index()], true) {
            return Err(ChannelError::RoutingLoop(node));
        }
        let set = table.forwarding_set(node);
        if set.is_empty() {
            return Err(ChannelError::EmptyForwardingSet(node));
        }
        let links = resolve_links(node, set, topo)?;
        let mut attempts = 0u32;
        let next = loop {
            attempts += 1;
            total += 1;
            let mut winner = None;
            for (&relay, &id) in set.iter().zip(&links) {
                let got = sample_link(true_probs[id.0], rng);
                observe(id, got);
                if got && winner.is_none() {
                    winner = Some(relay);
                }
            }
            if winner.is_some() || attempts >= retry_cap {
                break winner;
            }
        };
        hops.push((node, attempts));
        match next {
            Some(relay) => node = relay,
            None => {
                return Ok(PacketTrace {
                    hops,
                    delivered: false,
                    total_transmissions: total,
                })
            }
        }
    }
    Ok(PacketTrace {
        hops,
        delivered: true,
        total_transmissions: total,
    })
}

/// Result of one exploration round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRound {
    /// One sample per link, in [`LinkId`] order.
    pub samples: Vec<(LinkId, bool)>,
    /// One dummy broadcast per node with outgoing links.
    pub transmissions: u64,
}

/// Every node broadcasts one dummy packet; every directed link is sampled
/// exactly once.
pub fn probe_all_links<R: Rng + ?Sized>(
    topo: &Topology,
    true_probs: &[f64],
    rng: &mut R,
) -> ProbeRound {
    let samples = (0..topo.link_count())
        .map(|i| (LinkId(i), sample_link(true_probs[i], rng)))
        .collect();
    ProbeRound {
        samples,
        transmissions: topo.transmitting_node_count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anypath::shortest_anypath_first;
    use crate::rng::seeded;
    use crate::topology::parse_topology;

    const THREE: &str = "nodes 3\nsource 1\ndest 3\nlink 1 2 0.8\nlink 2 3 1.0\nlink 1 3 0.5";

    #[test]
    fn sample_link_extremes_and_frequency() {
        let mut rng = seeded(1);
        assert!((0..10_000).all(|_| !sample_link(0.0, &mut rng)));
        assert!((0..10_000).all(|_| sample_link(1.0, &mut rng)));
        let hits = (0..100_000).filter(|_| sample_link(0.7, &mut rng)).count();
        assert!((hits as f64 / 1e5 - 0.7).abs() < 0.01);
    }

    #[test]
    fn broadcast_outcomes() {
        let topo = parse_topology(
            "nodes 4\nsource 1\ndest 4\nlink 1 2 1\nlink 1 3 1\nlink 1 4 0\nlink 2 4 0.5\nlink 3 4 0.5\nlink 2 3 0",
        )
        .unwrap();
        let probs = topo.true_probs();
        let mut rng = seeded(2);
        let out = broadcast(NodeId(1), &[NodeId(2), NodeId(3)], &probs, &topo, &mut rng).unwrap();
        assert_eq!(out.receivers, [(NodeId(2), true), (NodeId(3), true)]);
        let out = broadcast(NodeId(1), &[NodeId(4)], &probs, &topo, &mut rng).unwrap();
        assert_eq!(out.first_receiver(), None);
        assert_eq!(
            broadcast(NodeId(4), &[NodeId(1)], &probs, &topo, &mut rng),
            Err(ChannelError::MissingLink {
                from: NodeId(4),
                to: NodeId(1)
            })
        );
        assert_eq!(
            broadcast(NodeId(1), &[], &probs, &topo, &mut rng),
            Err(ChannelError::NoTargets(NodeId(1)))
        );
    }

    #[test]
    fn broadcast_at_least_one_frequency() {
        let topo = parse_topology("nodes 3\nsource 1\ndest 3\nlink 1 2 0.5\nlink 1 3 0.5").unwrap();
        let probs = topo.true_probs();
        let mut rng = seeded(3);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                broadcast(NodeId(1), &[NodeId(2), NodeId(3)], &probs, &topo, &mut rng)
                    .unwrap()
                    .first_receiver()
                    .is_some()
            })
            .count();
        assert!((hits as f64 / trials as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn perfect_chain_route() {
        let topo = parse_topology("nodes 3\nsource 1\ndest 3\nlink 1 2 1\nlink 2 3 1").unwrap();
        let probs = topo.true_probs();
        let table = shortest_anypath_first(&probs, &topo).unwrap();
        let trace = route_packet(&table, &probs, &topo, &mut seeded(4), DEFAULT_RETRY_CAP).unwrap();
        assert!(trace.delivered);
        assert_eq!(trace.total_transmissions, 2);
        assert_eq!(trace.hops, [(NodeId(1), 1), (NodeId(2), 1)]);
    }

    #[test]
    fn retry_cap_ends_packet() {
        let topo = parse_topology(THREE).unwrap();
        let table = shortest_anypath_first(&topo.true_probs(), &topo).unwrap();
        let dead = [0.0, 0.0, 1.0];
        let trace = route_packet(&table, &dead, &topo, &mut seeded(5), 5).unwrap();
        assert!(!trace.delivered);
        assert_eq!(trace.hops, [(NodeId(1), 5)]);
        assert_eq!(trace.total_transmissions, 5);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let topo = parse_topology(THREE).unwrap();
        let probs = topo.true_probs();
        let mut table = shortest_anypath_first(&probs, &topo).unwrap();
        table.entries[0].forwarding_set = alloc::vec![NodeId(2)];
        table.entries[1].forwarding_set.clear();
        assert_eq!(
            route_packet(&table, &probs, &topo, &mut seeded(6), 10),
            Err(ChannelError::EmptyForwardingSet(NodeId(2)))
        );
        assert_eq!(
            route_packet(&table, &probs, &topo, &mut seeded(6), 0),
            Err(ChannelError::ZeroRetryCap)
        );
    }

    #[test]
    fn observer_sees_every_sample() {
        let topo = parse_topology(THREE).unwrap();
        let probs = topo.true_probs();
        let table = shortest_anypath_first(&probs, &topo).unwrap();
        let mut rng = seeded(7);
        for _ in 0..200 {
            let mut seen = 0u64;
            let trace =
                route_packet_observed(&table, &probs, &topo, &mut rng, 1000, |_, _| seen += 1)
                    .unwrap();
            // Node 1 samples two links per broadcast, node 2 samples one.
            let expected: u64 = trace
                .hops
                .iter()
                .map(|&(n, a)| u64::from(a) * table.forwarding_set(n).len() as u64)
                .sum();
            assert_eq!(seen, expected);
            assert_eq!(
                trace.total_transmissions,
                trace.hops.iter().map(|h| u64::from(h.1)).sum()
            );
        }
    }

    #[test]
    fn probe_samples_each_link_once() {
        let topo = parse_topology(
            "nodes 4\nsource 1\ndest 4\nlink 1 2 1\nlink 1 3 0.8\nlink 2 4 0.5\nlink 3 4 0.5\nlink 4 1 0.1",
        )
        .unwrap();
        let probs = topo.true_probs();
        let mut rng = seeded(8);
        let mut hits = 0;
        let rounds = 10_000;
        for _ in 0..rounds {
            let round = probe_all_links(&topo, &probs, &mut rng);
            assert_eq!(round.samples.len(), 5);
            assert_eq!(round.transmissions, 4);
            assert!(round.samples[0].1);
            hits += usize::from(round.samples[1].1);
        }
        assert!((hits as f64 / rounds as f64 - 0.8).abs() < 0.01);
    }
}
