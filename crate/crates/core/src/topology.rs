//! Directed mesh topology with per-link delivery probabilities.
//!
//! Topologies are read from a small line-based text format:
//!
//! ```text
//! # comment
//! nodes 3
//! source 1
//! dest 3
//! link 1 2 0.8
//! link 2 3 1.0
//! link 1 3 0.5
//! ```
//!
//! Links are directed. Node ids are 1-based. After parsing, links are kept
//! sorted by `(from, to)` and addressed by [`LinkId`], which is also the index
//! used by every per-link probability vector in this crate.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// 1-based node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    /// Zero-based index into per-node arrays.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a directed link in [`Topology::links`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    /// True delivery probability.
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: &'static str },
    #[error("line {line}: node id {id} out of range 1..={node_count}")]
    NodeOutOfRange {
        line: usize,
        id: i64,
        node_count: u32,
    },
    #[error("line {line}: duplicate link {from} -> {to}")]
    DuplicateLink {
        line: usize,
        from: NodeId,
        to: NodeId,
    },
    #[error("line {line}: self-link on node {node}")]
    SelfLink { line: usize, node: NodeId },
    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbOutOfRange { line: usize, value: f64 },
    #[error("line {line}: duplicate `{directive}` directive")]
    DuplicateDirective {
        line: usize,
        directive: &'static str,
    },
    #[error("missing `{0}` directive")]
    MissingDirective(&'static str),
    #[error("source and destination are the same node ({0})")]
    SourceIsDestination(NodeId),
    #[error("destination {to} unreachable from source {from} over positive-probability links")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("no link {from} -> {to}")]
    UnknownLink { from: NodeId, to: NodeId },
}

/// Out-neighbours of one node, ascending by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeNeighborhood {
    pub node: NodeId,
    pub out_neighbors: Vec<(NodeId, f64)>,
}

/// Immutable, validated mesh model.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    node_count: u32,
    source: NodeId,
    destination: NodeId,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
}

impl Topology {
    /// Builds and validates a topology from raw parts. Links may be given in
    /// any order; they are sorted by `(from, to)`.
    pub fn new(
        node_count: u32,
        source: NodeId,
        destination: NodeId,
        links: Vec<Link>,
    ) -> Result<Self, TopologyError> {
        // Line 0 marks errors that do not come from a file.
        let entries = links.into_iter().map(|l| (0, l)).collect();
        Self::build(node_count, source, destination, entries)
    }

    fn build(
        node_count: u32,
        source: NodeId,
        destination: NodeId,
        mut entries: Vec<(usize, Link)>,
    ) -> Result<Self, TopologyError> {
        let check = |line: usize, id: NodeId| {
            if id.0 == 0 || id.0 > node_count {
                Err(TopologyError::NodeOutOfRange {
                    line,
                    id: i64::from(id.0),
                    node_count,
                })
            } else {
                Ok(())
            }
        };
        check(0, source)?;
        check(0, destination)?;
        if source == destination {
            return Err(TopologyError::SourceIsDestination(source));
        }
        for &(line, link) in &entries {
            check(line, link.from)?;
            check(line, link.to)?;
            if link.from == link.to {
                return Err(TopologyError::SelfLink {
                    line,
                    node: link.from,
                });
            }
            if !(0.0..=1.0).contains(&link.prob) {
                return Err(TopologyError::ProbOutOfRange {
                    line,
                    value: link.prob,
                });
            }
        }
        // Stable sort keeps file order among duplicates, so the reported line
        // is the second occurrence.
        entries.sort_by_key(|(_, l)| (l.from, l.to));
        for pair in entries.windows(2) {
            let (a, b) = (&pair[0].1, &pair[1].1);
            if a.from == b.from && a.to == b.to {
                return Err(TopologyError::DuplicateLink {
                    line: pair[1].0,
                    from: b.from,
                    to: b.to,
                });
            }
        }

        let links: Vec<Link> = entries.into_iter().map(|(_, l)| l).collect();
        let n = node_count as usize;
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (i, link) in links.iter().enumerate() {
            out_links[link.from.index()].push(LinkId(i));
            in_links[link.to.index()].push(LinkId(i));
        }
        let topo = Topology {
            node_count,
            source,
            destination,
            links,
            out_links,
            in_links,
        };
        if !topo.reachable() {
            return Err(TopologyError::Unreachable {
                from: source,
                to: destination,
            });
        }
        Ok(topo)
    }

    fn reachable(&self) -> bool {
        let mut seen = vec![false; self.node_count as usize];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source.index()] = true;
        while let Some(node) = queue.pop_front() {
            if node == self.destination {
                return true;
            }
            for &id in &self.out_links[node.index()] {
                let link = self.links[id.0];
                if link.prob > 0.0 && !seen[link.to.index()] {
                    seen[link.to.index()] = true;
                    queue.push_back(link.to);
                }
            }
        }
        false
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Iterator over all node ids, ascending.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..=self.node_count).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 >= 1 && node.0 <= self.node_count
    }

    /// Outgoing link ids of `node`, ascending by target id.
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node.index()]
    }

    /// Incoming link ids of `node`, ascending by source id.
    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.in_links[node.index()]
    }

    pub fn link_id(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        if !self.contains(from) {
            return None;
        }
        let out = &self.out_links[from.index()];
        out.binary_search_by_key(&to, |id| self.links[id.0].to)
            .ok()
            .map(|i| out[i])
    }

    /// True probabilities indexed by [`LinkId`].
    pub fn true_probs(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.prob).collect()
    }

    pub fn neighbors(&self, node: NodeId) -> Result<NodeNeighborhood, TopologyError> {
        if !self.contains(node) {
            return Err(TopologyError::UnknownNode(node));
        }
        let out_neighbors = self.out_links[node.index()]
            .iter()
            .map(|id| {
                let link = self.links[id.0];
                (link.to, link.prob)
            })
            .collect();
        Ok(NodeNeighborhood {
            node,
            out_neighbors,
        })
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out_links[node.index()].len()
    }

    /// Largest out-degree over all nodes. Returns at least 1 for any valid
    /// topology, since the source must have an outgoing link.
    pub fn max_out_degree(&self) -> usize {
        self.out_links.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Nodes with at least one outgoing link.
    pub fn transmitting_node_count(&self) -> usize {
        self.out_links.iter().filter(|l| !l.is_empty()).count()
    }
}

/// Canonical text form; parsing it yields an identical topology.
impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.node_count)?;
        writeln!(f, "source {}", self.source)?;
        writeln!(f, "dest {}", self.destination)?;
        for link in &self.links {
            writeln!(f, "link {} {} {:?}", link.from, link.to, link.prob)?;
        }
        Ok(())
    }
}

impl core::str::FromStr for Topology {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_topology(s)
    }
}

pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut node_count: Option<u32> = None;
    let mut source: Option<(usize, i64)> = None;
    let mut dest: Option<(usize, i64)> = None;
    let mut links: Vec<(usize, i64, i64, f64)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_ascii_whitespace();
        let directive = fields.next().unwrap_or_default();
        let args: Vec<&str> = fields.collect();
        let syntax = |message| TopologyError::Syntax { line, message };

        if node_count.is_none() && directive != "nodes" {
            return Err(syntax("`nodes` must be the first directive"));
        }
        match directive {
            "nodes" => {
                if node_count.is_some() {
                    return Err(TopologyError::DuplicateDirective {
                        line,
                        directive: "nodes",
                    });
                }
                let [n] = args[..] else {
                    return Err(syntax("expected `nodes <N>`"));
                };
                let n: u32 = n
                    .parse()
                    .map_err(|_| syntax("node count is not an integer"))?;
                if n == 0 {
                    return Err(syntax("node count must be positive"));
                }
                node_count = Some(n);
            }
            "source" | "dest" => {
                let slot = if directive == "source" {
                    &mut source
                } else {
                    &mut dest
                };
                if slot.is_some() {
                    let directive = if directive == "source" {
                        "source"
                    } else {
                        "dest"
                    };
                    return Err(TopologyError::DuplicateDirective { line, directive });
                }
                let [id] = args[..] else {
                    return Err(syntax("expected a single node id"));
                };
                let id: i64 = id
                    .parse()
                    .map_err(|_| syntax("node id is not an integer"))?;
                *slot = Some((line, id));
            }
            "link" => {
                let [from, to, prob] = args[..] else {
                    return Err(syntax("expected `link <from> <to> <prob>`"));
                };
                let from: i64 = from
                    .parse()
                    .map_err(|_| syntax("node id is not an integer"))?;
                let to: i64 = to
                    .parse()
                    .map_err(|_| syntax("node id is not an integer"))?;
                let prob: f64 = prob
                    .parse()
                    .map_err(|_| syntax("probability is not a decimal number"))?;
                if !prob.is_finite() {
                    return Err(syntax("probability is not a decimal number"));
                }
                links.push((line, from, to, prob));
            }
            _ => return Err(syntax("unknown directive")),
        }
    }

    let node_count = node_count.ok_or(TopologyError::MissingDirective("nodes"))?;
    let node = |line: usize, id: i64| {
        if id < 1 || id > i64::from(node_count) {
            Err(TopologyError::NodeOutOfRange {
                line,
                id,
                node_count,
            })
        } else {
            Ok(NodeId(id as u32))
        }
    };
    let (sline, sid) = source.ok_or(TopologyError::MissingDirective("source"))?;
    let (dline, did) = dest.ok_or(TopologyError::MissingDirective("dest"))?;
    let source = node(sline, sid)?;
    let dest = node(dline, did)?;

    let mut entries = Vec::with_capacity(links.len());
    for (line, from, to, prob) in links {
        let link = Link {
            from: node(line, from)?,
            to: node(line, to)?,
            prob,
        };
        entries.push((line, link));
    }
    Topology::build(node_count, source, dest, entries)
}

/// Free-function form of [`Topology::max_out_degree`].
pub fn max_out_degree(topo: &Topology) -> usize {
    topo.max_out_degree()
}

/// Free-function form of [`Topology::neighbors`].
pub fn neighbors(topo: &Topology, node: NodeId) -> Result<NodeNeighborhood, TopologyError> {
    topo.neighbors(node)
}
