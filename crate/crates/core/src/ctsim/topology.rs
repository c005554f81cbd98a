use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use crate::node::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyError {
    NoNodes,
    SelfLoop(NodeId),
    UnknownNode(NodeId),
    DuplicateEdge(NodeId, NodeId),
    /// Link success probabilities must lie in (0, 1].
    InvalidProbability(f64),
    Disconnected {
        unreachable: NodeId,
    },
    UnknownPreset,
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::NoNodes => f.write_str("topology has no nodes"),
            TopologyError::SelfLoop(n) => write!(f, "self-loop on node {n}"),
            TopologyError::UnknownNode(n) => write!(f, "node {n} is not part of the topology"),
            TopologyError::DuplicateEdge(a, b) => write!(f, "edge {a}-{b} listed twice"),
            TopologyError::InvalidProbability(p) => {
                write!(f, "link success probability {p} outside (0, 1]")
            }
            TopologyError::Disconnected { unreachable } => {
                write!(
                    f,
                    "graph is disconnected: node {unreachable} unreachable from node 1"
                )
            }
            TopologyError::UnknownPreset => f.write_str("unknown topology preset"),
        }
    }
}

impl core::error::Error for TopologyError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    /// Overrides the topology-wide success probability when set.
    pub success: Option<f64>,
}

/// Connected undirected graph over nodes `1..=n` with per-link delivery
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n: usize,
    edges: Vec<Edge>,
    default_success: f64,
    initiator: NodeId,
    adjacency: Vec<Vec<(usize, f64)>>,
}

fn check_probability(p: f64) -> Result<f64, TopologyError> {
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(TopologyError::InvalidProbability(p))
    }
}

impl Topology {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = Edge>,
        default_success: f64,
        initiator: NodeId,
    ) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::NoNodes);
        }
        check_probability(default_success)?;
        let known = |id: NodeId| {
            if id.0 >= 1 && id.index() < n {
                Ok(id)
            } else {
                Err(TopologyError::UnknownNode(id))
            }
        };
        known(initiator)?;

        let mut seen = BTreeMap::new();
        let mut list = Vec::new();
        for edge in edges {
            known(edge.a)?;
            known(edge.b)?;
            if edge.a == edge.b {
                return Err(TopologyError::SelfLoop(edge.a));
            }
            if let Some(p) = edge.success {
                check_probability(p)?;
            }
            let key = (edge.a.min(edge.b), edge.a.max(edge.b));
            if seen.insert(key, ()).is_some() {
                return Err(TopologyError::DuplicateEdge(key.0, key.1));
            }
            list.push(Edge {
                a: key.0,
                b: key.1,
                success: edge.success,
            });
        }
        list.sort_by_key(|e| (e.a, e.b));

        let mut topology = Topology {
            n,
            edges: list,
            default_success,
            initiator,
            adjacency: Vec::new(),
        };
        topology.rebuild_adjacency();
        if let Some(unreachable) = topology
            .hop_distances(NodeId(1))
            .iter()
            .position(Option::is_none)
        {
            return Err(TopologyError::Disconnected {
                unreachable: NodeId::from_index(unreachable),
            });
        }
        Ok(topology)
    }

    fn rebuild_adjacency(&mut self) {
        let mut adjacency = vec![Vec::new(); self.n];
        for e in &self.edges {
            let p = e.success.unwrap_or(self.default_success);
            adjacency[e.a.index()].push((e.b.index(), p));
            adjacency[e.b.index()].push((e.a.index(), p));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        self.adjacency = adjacency;
    }

    /// Every node adjacent to every other.
    pub fn complete(n: usize) -> Self {
        let edges = (1..=n as u32).flat_map(|a| {
            (a + 1..=n as u32).map(move |b| Edge {
                a: NodeId(a),
                b: NodeId(b),
                success: None,
            })
        });
        Topology::new(n, edges, 1.0, NodeId(1)).expect("complete graphs are connected")
    }

    /// Path `1 - 2 - ... - n`.
    pub fn line(n: usize) -> Self {
        let edges = (1..n as u32).map(|a| Edge {
            a: NodeId(a),
            b: NodeId(a + 1),
            success: None,
        });
        Topology::new(n, edges, 1.0, NodeId(1)).expect("paths are connected")
    }

    /// Node 1 at the centre.
    pub fn star(n: usize) -> Self {
        let edges = (2..=n as u32).map(|b| Edge {
            a: NodeId(1),
            b: NodeId(b),
            success: None,
        });
        Topology::new(n, edges, 1.0, NodeId(1)).expect("stars are connected")
    }

    /// Nodes dropped uniformly in the unit square, linked when within
    /// `radius` of each other.
    pub fn random_geometric<R: RngCore + ?Sized>(
        n: usize,
        radius: f64,
        rng: &mut R,
    ) -> Result<Self, TopologyError> {
        let unit = |rng: &mut R| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let positions: Vec<(f64, f64)> = (0..n).map(|_| (unit(rng), unit(rng))).collect();
        let r2 = radius * radius;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (
                    positions[i].0 - positions[j].0,
                    positions[i].1 - positions[j].1,
                );
                if dx * dx + dy * dy <= r2 {
                    edges.push(Edge {
                        a: NodeId::from_index(i),
                        b: NodeId::from_index(j),
                        success: None,
                    });
                }
            }
        }
        Topology::new(n, edges, 1.0, NodeId(1))
    }

    /// Built-in testbed stand-ins: `flocklab26` and `dcube45`.
    pub fn preset(name: &str) -> Result<Self, TopologyError> {
        let &(_, n, radius, seed) = PRESETS
            .iter()
            .find(|(p, ..)| *p == name)
            .ok_or(TopologyError::UnknownPreset)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Topology::random_geometric(n, radius, &mut rng)
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(name, ..)| *name)
    }

    /// Same graph with every link lacking its own probability set to
    /// deliver with `1 - loss`.
    pub fn with_loss(&self, loss: f64) -> Result<Self, TopologyError> {
        let mut t = self.clone();
        t.default_success = check_probability(1.0 - loss)?;
        t.rebuild_adjacency();
        Ok(t)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId::from_index)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn default_success(&self) -> f64 {
        self.default_success
    }

    pub fn initiator(&self) -> NodeId {
        self.initiator
    }

    pub fn set_initiator(&mut self, initiator: NodeId) -> Result<(), TopologyError> {
        if initiator.0 == 0 || initiator.index() >= self.n {
            return Err(TopologyError::UnknownNode(initiator));
        }
        self.initiator = initiator;
        Ok(())
    }

    /// Neighbour indices with their delivery probability, ascending.
    pub(crate) fn adjacency(&self, index: usize) -> &[(usize, f64)] {
        &self.adjacency[index]
    }

    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node.index()]
            .iter()
            .map(|&(v, _)| NodeId::from_index(v))
    }

    pub fn is_lossless(&self) -> bool {
        self.adjacency.iter().flatten().all(|&(_, p)| p >= 1.0)
    }

    /// BFS hop counts from `source`, indexed by node index.
    pub fn hop_distances(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source.index());
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &(u, _) in &self.adjacency[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn eccentricity(&self, node: NodeId) -> u32 {
        self.hop_distances(node)
            .into_iter()
            .map(|d| d.unwrap_or(u32::MAX))
            .max()
            .unwrap_or(0)
    }

    pub fn diameter(&self) -> u32 {
        self.nodes()
            .map(|v| self.eccentricity(v))
            .max()
            .unwrap_or(0)
    }
}

// (name, nodes, radius, seed)
const PRESETS: &[(&str, usize, f64, u64)] =
    &[("flocklab26", 26, 0.3, 29), ("dcube45", 45, 0.28, 27)];
