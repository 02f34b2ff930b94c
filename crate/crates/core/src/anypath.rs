//! Anypath cost model and Shortest Anypath First.
//!
//! All formulas assume independent link receptions. For a node `n` with a
//! priority-ordered forwarding set `J = [j1, j2, ...]`:
//!
//! - delivery ratio `p_nJ = 1 - prod(1 - p_nj)`
//! - hyperlink cost `d_nJ = 1 / p_nJ`
//! - relay weight `w_nj = p_nj * prod_{k<j}(1 - p_nk) / p_nJ`
//! - remaining cost `D_J = sum(w_nj * D_j)`
//! - anypath distance `D_n = d_nJ + D_J`
//!
//! Unreachable nodes carry [`UNREACHABLE`] as their distance.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::topology::{NodeId, Topology};

/// Distance sentinel for nodes with no positive-probability route.
pub const UNREACHABLE: f64 = f64::INFINITY;

/// Minimum improvement for SAF to keep a relay in a forwarding set.
pub const INCLUSION_EPS: f64 = 1e-12;

/// Largest node count accepted by [`brute_force_anypath`].
pub const BRUTE_FORCE_MAX_NODES: u32 = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnypathError {
    #[error("forwarding set is empty")]
    EmptySet,
    #[error("probability {0} outside [0, 1]")]
    ProbOutOfRange(f64),
    #[error("hyperlink delivery ratio is zero; cost is infinite")]
    ZeroDeliveryRatio,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("probability vector has {got} entries, topology has {expected} links")]
    ProbCount { expected: usize, got: usize },
    #[error("brute force limited to {max} nodes, topology has {got}")]
    TooLarge { max: u32, got: u32 },
    #[error("forwarding table entry for node {node} references non-neighbour {relay}")]
    NotANeighbor { node: NodeId, relay: NodeId },
    #[error("forwarding table has a cyclic dependency through node {0}")]
    Cyclic(NodeId),
    #[error("forwarding table covers {got} nodes, topology has {expected}")]
    TableSize { expected: usize, got: usize },
}

fn check_probs(probs: &[f64]) -> Result<(), AnypathError> {
    if probs.is_empty() {
        return Err(AnypathError::EmptySet);
    }
    match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(AnypathError::ProbOutOfRange(p)),
        None => Ok(()),
    }
}

/// Probability that at least one member of the set receives a broadcast.
pub fn hyperlink_delivery_ratio(probs: &[f64]) -> Result<f64, AnypathError> {
    check_probs(probs)?;
    let miss: f64 = probs.iter().map(|p| 1.0 - p).product();
    Ok(1.0 - miss)
}

/// Expected broadcasts until some member receives.
pub fn hyperlink_cost(ratio: f64) -> Result<f64, AnypathError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(AnypathError::ProbOutOfRange(ratio));
    }
    if ratio == 0.0 {
        return Err(AnypathError::ZeroDeliveryRatio);
    }
    Ok(1.0 / ratio)
}

/// Probability that each relay is the highest-priority receiver, given that
/// at least one member received.
pub fn relay_weights(ordered_probs: &[f64]) -> Result<Vec<f64>, AnypathError> {
    let ratio = hyperlink_delivery_ratio(ordered_probs)?;
    if ratio == 0.0 {
        return Err(AnypathError::ZeroDeliveryRatio);
    }
    let mut all_missed = 1.0;
    let weights = ordered_probs
        .iter()
        .map(|&p| {
            let w = p * all_missed / ratio;
            all_missed *= 1.0 - p;
            w
        })
        .collect();
    Ok(weights)
}

pub fn remaining_cost(weights: &[f64], relay_distances: &[f64]) -> Result<f64, AnypathError> {
    if weights.len() != relay_distances.len() {
        return Err(AnypathError::LengthMismatch {
            left: weights.len(),
            right: relay_distances.len(),
        });
    }
    Ok(weights
        .iter()
        .zip(relay_distances)
        // A zero weight never selects the relay, whatever its distance.
        .map(|(&w, &d)| if w == 0.0 { 0.0 } else { w * d })
        .sum())
}

/// `d_nJ + D_J` for a priority-ordered set.
pub fn anypath_distance(
    ordered_probs: &[f64],
    relay_distances: &[f64],
) -> Result<f64, AnypathError> {
    if ordered_probs.len() != relay_distances.len() {
        return Err(AnypathError::LengthMismatch {
            left: ordered_probs.len(),
            right: relay_distances.len(),
        });
    }
    let cost = hyperlink_cost(hyperlink_delivery_ratio(ordered_probs)?)?;
    let weights = relay_weights(ordered_probs)?;
    Ok(cost + remaining_cost(&weights, relay_distances)?)
}

/// Single-pass form of [`anypath_distance`] over `(prob, distance)` pairs,
/// used on hot paths. Returns [`UNREACHABLE`] when the set cannot deliver.
fn anypath_distance_fast(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut all_missed = 1.0;
    let mut weighted = 0.0;
    for (p, d) in pairs {
        let w = p * all_missed;
        if w > 0.0 {
            weighted += w * d;
        }
        all_missed *= 1.0 - p;
    }
    let ratio = 1.0 - all_missed;
    if ratio <= 0.0 {
        UNREACHABLE
    } else {
        (1.0 + weighted) / ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingEntry {
    pub node: NodeId,
    /// Expected transmissions to the destination.
    pub distance: f64,
    /// Relays, highest priority first.
    pub forwarding_set: Vec<NodeId>,
}

/// Per-node distances and forwarding sets, indexed by node.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingTable {
    pub destination: NodeId,
    pub entries: Vec<ForwardingEntry>,
}

impl ForwardingTable {
    pub fn entry(&self, node: NodeId) -> &ForwardingEntry {
        &self.entries[node.index()]
    }

    pub fn distance(&self, node: NodeId) -> f64 {
        self.entries[node.index()].distance
    }

    pub fn forwarding_set(&self, node: NodeId) -> &[NodeId] {
        &self.entries[node.index()].forwarding_set
    }

    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    /// Checks the structural invariants against the probabilities the table
    /// was computed from. Returns the largest self-consistency residual.
    pub fn consistency_residual(
        &self,
        probs: &[f64],
        topo: &Topology,
    ) -> Result<f64, AnypathError> {
        let mut worst: f64 = 0.0;
        for entry in &self.entries {
            if entry.node == self.destination {
                if entry.distance != 0.0 || !entry.forwarding_set.is_empty() {
                    worst = f64::INFINITY;
                }
                continue;
            }
            if entry.forwarding_set.is_empty() {
                if entry.distance != UNREACHABLE {
                    worst = f64::INFINITY;
                }
                continue;
            }
            let mut pairs = Vec::with_capacity(entry.forwarding_set.len());
            let mut prev: Option<(f64, NodeId)> = None;
            for &relay in &entry.forwarding_set {
                let link = topo
                    .link_id(entry.node, relay)
                    .ok_or(AnypathError::NotANeighbor {
                        node: entry.node,
                        relay,
                    })?;
                let d = self.distance(relay);
                let p = probs[link.0];
                if p <= 0.0 || d >= entry.distance {
                    worst = f64::INFINITY;
                }
                if let Some(prev) = prev {
                    if (d, relay) <= prev {
                        worst = f64::INFINITY;
                    }
                }
                prev = Some((d, relay));
                pairs.push((p, d));
            }
            let recomputed = anypath_distance_fast(pairs);
            worst = worst.max((recomputed - entry.distance).abs());
        }
        Ok(worst)
    }
}

fn check_prob_vector(probs: &[f64], topo: &Topology) -> Result<(), AnypathError> {
    if probs.len() != topo.link_count() {
        return Err(AnypathError::ProbCount {
            expected: topo.link_count(),
            got: probs.len(),
        });
    }
    match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(AnypathError::ProbOutOfRange(p)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    distance: f64,
    node: NodeId,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (distance, node id).
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest Anypath First over the given per-link probabilities.
///
/// Nodes are settled in ascending distance, ties by node id. When a node
/// settles, each unsettled in-neighbour tries appending it to its candidate
/// forwarding set and keeps it only if its distance drops by more than
/// [`INCLUSION_EPS`]. Because nodes settle in ascending distance, candidate
/// sets stay sorted by priority.
pub fn shortest_anypath_first(
    probs: &[f64],
    topo: &Topology,
) -> Result<ForwardingTable, AnypathError> {
    check_prob_vector(probs, topo)?;
    let n = topo.node_count() as usize;
    let dest = topo.destination();
    let mut distance = vec![UNREACHABLE; n];
    // Per node: (relay, prob, relay distance) in priority order.
    let mut sets: Vec<Vec<(NodeId, f64, f64)>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    distance[dest.index()] = 0.0;
    heap.push(Pending {
        distance: 0.0,
        node: dest,
    });

    while let Some(Pending { distance: d, node }) = heap.pop() {
        if settled[node.index()] || d > distance[node.index()] {
            continue;
        }
        settled[node.index()] = true;
        for &id in topo.in_links(node) {
            let link = topo.link(id);
            let pred = link.from;
            if settled[pred.index()] || probs[id.0] <= 0.0 {
                continue;
            }
            let set = &mut sets[pred.index()];
            set.push((node, probs[id.0], d));
            let candidate = anypath_distance_fast(set.iter().map(|&(_, p, dj)| (p, dj)));
            let current = distance[pred.index()];
            if candidate < current - INCLUSION_EPS
                || (current == UNREACHABLE && candidate < UNREACHABLE)
            {
                distance[pred.index()] = candidate;
                heap.push(Pending {
                    distance: candidate,
                    node: pred,
                });
            } else {
                set.pop();
            }
        }
    }

    let entries = topo
        .nodes()
        .map(|node| {
            let i = node.index();
            if !settled[i] {
                ForwardingEntry {
                    node,
                    distance: UNREACHABLE,
                    forwarding_set: Vec::new(),
                }
            } else {
                ForwardingEntry {
                    node,
                    distance: distance[i],
                    forwarding_set: sets[i].iter().map(|&(r, _, _)| r).collect(),
                }
            }
        })
        .collect();
    Ok(ForwardingTable {
        destination: dest,
        entries,
    })
}

/// Exhaustive oracle: value iteration where every node minimises over all
/// nonempty subsets of its positive-probability neighbours. Subsets of up to
/// five relays are also tried in every priority order; larger subsets use
/// ascending current distance.
pub fn brute_force_anypath(
    probs: &[f64],
    topo: &Topology,
) -> Result<ForwardingTable, AnypathError> {
    check_prob_vector(probs, topo)?;
    if topo.node_count() > BRUTE_FORCE_MAX_NODES {
        return Err(AnypathError::TooLarge {
            max: BRUTE_FORCE_MAX_NODES,
            got: topo.node_count(),
        });
    }
    let n = topo.node_count() as usize;
    let dest = topo.destination();
    let mut distance = vec![UNREACHABLE; n];
    let mut choice: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    distance[dest.index()] = 0.0;

    // Bounded: each sweep either lowers some distance or terminates, and the
    // optimum is reached after at most n sweeps; the margin covers rounding.
    for _ in 0..(4 * n + 8) {
        let mut changed = false;
        for node in topo.nodes() {
            if node == dest {
                continue;
            }
            let candidates: Vec<(NodeId, f64)> = topo
                .out_links(node)
                .iter()
                .filter(|id| probs[id.0] > 0.0)
                .map(|id| (topo.link(*id).to, probs[id.0]))
                .filter(|(to, _)| distance[to.index()] < UNREACHABLE)
                .collect();
            let mut best = (UNREACHABLE, Vec::new());
            for mask in 1u32..(1 << candidates.len()) {
                let mut subset: Vec<(NodeId, f64)> = candidates
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, c)| *c)
                    .collect();
                let eval = |order: &[(NodeId, f64)]| {
                    anypath_distance_fast(order.iter().map(|(r, p)| (*p, distance[r.index()])))
                };
                if subset.len() <= 5 {
                    for_each_permutation(&mut subset, &mut |order| {
                        let d = eval(order);
                        if d < best.0 {
                            best = (d, order.iter().map(|(r, _)| *r).collect());
                        }
                    });
                } else {
                    subset.sort_by(|a, b| {
                        distance[a.0.index()]
                            .total_cmp(&distance[b.0.index()])
                            .then(a.0.cmp(&b.0))
                    });
                    let d = eval(&subset);
                    if d < best.0 {
                        best = (d, subset.iter().map(|(r, _)| *r).collect());
                    }
                }
            }
            if best.0 < distance[node.index()] {
                distance[node.index()] = best.0;
                choice[node.index()] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let entries = topo
        .nodes()
        .map(|node| ForwardingEntry {
            node,
            distance: distance[node.index()],
            forwarding_set: core::mem::take(&mut choice[node.index()]),
        })
        .collect();
    Ok(ForwardingTable {
        destination: dest,
        entries,
    })
}

/// Heap's algorithm.
fn for_each_permutation<T, F: FnMut(&[T])>(items: &mut [T], f: &mut F) {
    fn recurse<T, F: FnMut(&[T])>(k: usize, items: &mut [T], f: &mut F) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            recurse(k - 1, items, f);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        recurse(k - 1, items, f);
    }
    let k = items.len();
    recurse(k, items, f);
}

/// Cost of following `table` when the links actually behave per `true_probs`.
///
/// Forwarding sets and their priority order are taken from the table as-is.
pub fn evaluate_table_cost(
    table: &ForwardingTable,
    true_probs: &[f64],
    topo: &Topology,
) -> Result<Vec<f64>, AnypathError> {
    check_prob_vector(true_probs, topo)?;
    let n = topo.node_count() as usize;
    if table.entries.len() != n {
        return Err(AnypathError::TableSize {
            expected: n,
            got: table.entries.len(),
        });
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        InProgress,
        Done,
    }
    let mut mark = vec![Mark::Unvisited; n];
    let mut cost = vec![UNREACHABLE; n];
    let dest = table.destination;

    for start in topo.nodes() {
        if mark[start.index()] == Mark::Done {
            continue;
        }
        // Iterative post-order DFS over forwarding-set edges.
        let mut stack: Vec<(NodeId, usize)> = vec![(start, 0)];
        mark[start.index()] = Mark::InProgress;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let set = table.forwarding_set(node);
            if node != dest && *next < set.len() {
                let relay = set[*next];
                *next += 1;
                if topo.link_id(node, relay).is_none() {
                    return Err(AnypathError::NotANeighbor { node, relay });
                }
                match mark[relay.index()] {
                    Mark::Done => {}
                    Mark::InProgress => return Err(AnypathError::Cyclic(relay)),
                    Mark::Unvisited => {
                        mark[relay.index()] = Mark::InProgress;
                        stack.push((relay, 0));
                    }
                }
                continue;
            }
            stack.pop();
            cost[node.index()] = if node == dest {
                0.0
            } else if set.is_empty() {
                UNREACHABLE
            } else {
                let pairs = set.iter().map(|&r| {
                    // Link existence was checked when the relay was pushed.
                    let id = topo.link_id(node, r).map_or(usize::MAX, |l| l.0);
                    (true_probs[id], cost[r.index()])
                });
                anypath_distance_fast(pairs)
            };
            mark[node.index()] = Mark::Done;
        }
    }
    Ok(cost)
}

/// Classic single-path distances with per-link weight `1/p` (ETX), by
/// Dijkstra towards the destination. Links with `p = 0` are ignored.
pub fn single_path_distances(probs: &[f64], topo: &Topology) -> Result<Vec<f64>, AnypathError> {
    check_prob_vector(probs, topo)?;
    let n = topo.node_count() as usize;
    let mut distance = vec![UNREACHABLE; n];
    let mut heap = BinaryHeap::new();
    let dest = topo.destination();
    distance[dest.index()] = 0.0;
    heap.push(Pending {
        distance: 0.0,
        node: dest,
    });
    while let Some(Pending { distance: d, node }) = heap.pop() {
        if d > distance[node.index()] {
            continue;
        }
        for &id in topo.in_links(node) {
            let p = probs[id.0];
            if p <= 0.0 {
                continue;
            }
            let pred = topo.link(id).from;
            let candidate = d + 1.0 / p;
            if candidate < distance[pred.index()] {
                distance[pred.index()] = candidate;
                heap.push(Pending {
                    distance: candidate,
                    node: pred,
                });
            }
        }
    }
    Ok(distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::parse_topology;

    const THREE: &str = "nodes 3\nsource 1\ndest 3\nlink 1 2 0.8\nlink 2 3 1.0\nlink 1 3 0.5";

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// Enumerates all 2^k joint reception outcomes.
    fn enumerate_outcomes(probs: &[f64], mut visit: impl FnMut(&[bool], f64)) {
        let k = probs.len();
        let mut received = vec![false; k];
        for mask in 0u32..(1 << k) {
            let mut weight = 1.0;
            for (i, &p) in probs.iter().enumerate() {
                received[i] = mask & (1 << i) != 0;
                weight *= if received[i] { p } else { 1.0 - p };
            }
            visit(&received, weight);
        }
    }

    fn enumerated_ratio(probs: &[f64]) -> f64 {
        let mut total = 0.0;
        enumerate_outcomes(probs, |r, w| {
            if r.iter().any(|&x| x) {
                total += w;
            }
        });
        total
    }

    fn enumerated_weights(probs: &[f64]) -> Vec<f64> {
        let mut first = vec![0.0; probs.len()];
        let mut any = 0.0;
        enumerate_outcomes(probs, |r, w| {
            if let Some(i) = r.iter().position(|&x| x) {
                first[i] += w;
                any += w;
            }
        });
        first.iter().map(|f| f / any).collect()
    }

    #[test]
    fn delivery_ratio_examples() {
        assert_eq!(hyperlink_delivery_ratio(&[1.0]).unwrap(), 1.0);
        assert!(close(enumerated_ratio(&[0.5, 0.5]), 0.75));
        assert!(close(hyperlink_delivery_ratio(&[0.5, 0.5]).unwrap(), 0.75));
        assert!(close(enumerated_ratio(&[0.8, 0.5]), 0.9));
        assert!(close(hyperlink_delivery_ratio(&[0.8, 0.5]).unwrap(), 0.9));
        assert_eq!(hyperlink_delivery_ratio(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(hyperlink_delivery_ratio(&[0.3, 1.0]).unwrap(), 1.0);
        assert_eq!(hyperlink_delivery_ratio(&[]), Err(AnypathError::EmptySet));
        assert_eq!(
            hyperlink_delivery_ratio(&[0.5, 1.2]),
            Err(AnypathError::ProbOutOfRange(1.2))
        );
    }

    #[test]
    fn hyperlink_cost_examples() {
        assert_eq!(hyperlink_cost(1.0).unwrap(), 1.0);
        assert_eq!(hyperlink_cost(0.5).unwrap(), 2.0);
        assert_eq!(hyperlink_cost(0.0), Err(AnypathError::ZeroDeliveryRatio));
    }

    #[test]
    fn relay_weight_examples() {
        assert_eq!(relay_weights(&[1.0, 0.3]).unwrap(), vec![1.0, 0.0]);
        for probs in [[0.5, 0.5], [0.5, 0.8]] {
            let got = relay_weights(&probs).unwrap();
            let want = enumerated_weights(&probs);
            for (g, w) in got.iter().zip(&want) {
                assert!(close(*g, *w), "{got:?} vs {want:?}");
            }
        }
        let w = relay_weights(&[0.5, 0.5]).unwrap();
        assert!(close(w[0], 2.0 / 3.0) && close(w[1], 1.0 / 3.0));
        let w = relay_weights(&[0.5, 0.8]).unwrap();
        assert!(close(w[0], 5.0 / 9.0) && close(w[1], 4.0 / 9.0));
        assert_eq!(
            relay_weights(&[0.0, 0.0]),
            Err(AnypathError::ZeroDeliveryRatio)
        );
    }

    #[test]
    fn literal_product_form_does_not_normalise() {
        // Numerator p_nj * prod_{k<j} p_nk does not sum to one; the
        // (1 - p_nk) form used here does.
        let probs = [0.6, 0.8];
        let ratio = hyperlink_delivery_ratio(&probs).unwrap();
        let literal: f64 = 0.6 / ratio + 0.8 * 0.6 / ratio;
        assert!((literal - 1.0).abs() > 0.1);
        let sum: f64 = relay_weights(&probs).unwrap().iter().sum();
        assert!(close(sum, 1.0));
    }

    #[test]
    fn remaining_cost_examples() {
        assert_eq!(remaining_cost(&[1.0], &[0.0]).unwrap(), 0.0);
        assert!(close(
            remaining_cost(&[2.0 / 3.0, 1.0 / 3.0], &[0.0, 3.0]).unwrap(),
            1.0
        ));
        assert!(close(
            remaining_cost(&[5.0 / 9.0, 4.0 / 9.0], &[0.0, 1.0]).unwrap(),
            4.0 / 9.0
        ));
        assert_eq!(
            remaining_cost(&[1.0], &[0.0, 1.0]),
            Err(AnypathError::LengthMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn anypath_distance_examples() {
        assert_eq!(anypath_distance(&[1.0], &[0.0]).unwrap(), 1.0);
        assert_eq!(anypath_distance(&[0.5], &[0.0]).unwrap(), 2.0);
        assert!(close(
            anypath_distance(&[0.5, 0.8], &[0.0, 1.0]).unwrap(),
            14.0 / 9.0
        ));
        assert!(close(
            anypath_distance_fast([(0.5, 0.0), (0.8, 1.0)]),
            14.0 / 9.0
        ));
    }

    #[test]
    fn saf_chain() {
        let topo = parse_topology("nodes 3\nsource 1\ndest 3\nlink 1 2 1\nlink 2 3 1").unwrap();
        let table = shortest_anypath_first(&topo.true_probs(), &topo).unwrap();
        assert_eq!(table.distances(), vec![2.0, 1.0, 0.0]);
        assert_eq!(table.forwarding_set(NodeId(1)), &[NodeId(2)]);
        assert_eq!(table.forwarding_set(NodeId(2)), &[NodeId(3)]);
        assert!(table.forwarding_set(NodeId(3)).is_empty());
    }

    #[test]
    fn saf_three_node_example() {
        let topo = parse_topology(THREE).unwrap();
        let probs = topo.true_probs();
        let table = shortest_anypath_first(&probs, &topo).unwrap();
        assert_eq!(table.distance(NodeId(3)), 0.0);
        assert_eq!(table.distance(NodeId(2)), 1.0);
        assert!(close(table.distance(NodeId(1)), 14.0 / 9.0));
        assert_eq!(table.forwarding_set(NodeId(1)), &[NodeId(3), NodeId(2)]);
        assert!(table.consistency_residual(&probs, &topo).unwrap() < 1e-9);

        // Every forwarding-set choice for node 1, by hand.
        assert!(close(anypath_distance(&[0.5], &[0.0]).unwrap(), 2.0));
        assert!(close(anypath_distance(&[0.8], &[1.0]).unwrap(), 2.25));
        let brute = brute_force_anypath(&probs, &topo).unwrap();
        assert!(close(brute.distance(NodeId(1)), 14.0 / 9.0));
    }

    #[test]
    fn brute_force_edge_cases() {
        let topo = parse_topology("nodes 2\nsource 1\ndest 2\nlink 1 2 0.4").unwrap();
        let table = brute_force_anypath(&topo.true_probs(), &topo).unwrap();
        assert!(close(table.distance(NodeId(1)), 2.5));

        // Disconnected once link 2->3 is zeroed in the probability vector.
        let topo = parse_topology(THREE).unwrap();
        let probs = [0.8, 0.0, 0.0];
        assert_eq!(
            brute_force_anypath(&probs, &topo)
                .unwrap()
                .distance(NodeId(1)),
            UNREACHABLE
        );
        assert_eq!(
            shortest_anypath_first(&probs, &topo)
                .unwrap()
                .distance(NodeId(1)),
            UNREACHABLE
        );

        let mut text = alloc::string::String::from("nodes 13\nsource 1\ndest 13\n");
        for i in 1..13 {
            text.push_str(&alloc::format!("link {} {} 1\n", i, i + 1));
        }
        let big = parse_topology(&text).unwrap();
        assert_eq!(
            brute_force_anypath(&big.true_probs(), &big),
            Err(AnypathError::TooLarge { max: 12, got: 13 })
        );
    }

    #[test]
    fn evaluate_examples() {
        let topo = parse_topology(THREE).unwrap();
        let probs = topo.true_probs();
        let genie = shortest_anypath_first(&probs, &topo).unwrap();
        assert_eq!(
            evaluate_table_cost(&genie, &probs, &topo).unwrap(),
            genie.distances()
        );

        let mut forced = genie.clone();
        forced.entries[0].forwarding_set = vec![NodeId(2)];
        let cost = evaluate_table_cost(&forced, &probs, &topo).unwrap();
        assert!(close(cost[0], 1.0 / 0.8 + 1.0));

        let dead = [0.0, 0.0, 1.0];
        let cost = evaluate_table_cost(&forced, &dead, &topo).unwrap();
        assert_eq!(cost[0], UNREACHABLE);
        assert_eq!(cost[1], 1.0);
    }

    #[test]
    fn evaluate_keeps_policy_priority_order() {
        let topo = parse_topology(THREE).unwrap();
        let probs = topo.true_probs();
        let mut table = shortest_anypath_first(&probs, &topo).unwrap();
        table.entries[0].forwarding_set = vec![NodeId(2), NodeId(3)];
        let cost = evaluate_table_cost(&table, &probs, &topo).unwrap();
        // 1/0.9 + (0.8/0.9)*1 + (0.2*0.5/0.9)*0
        assert!(close(cost[0], 1.0 / 0.9 + 0.8 / 0.9));
        assert!(cost[0] > 14.0 / 9.0);
    }

    #[test]
    fn evaluate_rejects_cycles_and_non_neighbours() {
        let topo = parse_topology(
            "nodes 3\nsource 1\ndest 3\nlink 1 2 0.5\nlink 2 1 0.5\nlink 2 3 0.5\nlink 1 3 0.5",
        )
        .unwrap();
        let probs = topo.true_probs();
        let mut table = shortest_anypath_first(&probs, &topo).unwrap();
        table.entries[0].forwarding_set = vec![NodeId(2)];
        table.entries[1].forwarding_set = vec![NodeId(1)];
        assert!(matches!(
            evaluate_table_cost(&table, &probs, &topo),
            Err(AnypathError::Cyclic(_))
        ));

        let topo = parse_topology(THREE).unwrap();
        let mut table = shortest_anypath_first(&topo.true_probs(), &topo).unwrap();
        table.entries[1].forwarding_set = vec![NodeId(1)];
        assert_eq!(
            evaluate_table_cost(&table, &topo.true_probs(), &topo),
            Err(AnypathError::NotANeighbor {
                node: NodeId(2),
                relay: NodeId(1)
            })
        );
    }

    #[test]
    fn zero_prob_links_never_enter_sets() {
        let topo =
            parse_topology("nodes 3\nsource 1\ndest 3\nlink 1 3 0.5\nlink 1 2 0\nlink 2 3 1")
                .unwrap();
        let table = shortest_anypath_first(&topo.true_probs(), &topo).unwrap();
        assert_eq!(table.forwarding_set(NodeId(1)), &[NodeId(3)]);
        assert_eq!(table.distance(NodeId(1)), 2.0);
    }

    #[test]
    fn single_path_on_three_node_example() {
        let topo = parse_topology(THREE).unwrap();
        let d = single_path_distances(&topo.true_probs(), &topo).unwrap();
        assert_eq!(d, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn permutations_cover_all_orders() {
        let mut items = [1, 2, 3, 4];
        let mut seen = Vec::new();
        for_each_permutation(&mut items, &mut |p: &[i32]| seen.push(p.to_vec()));
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
    }
}
