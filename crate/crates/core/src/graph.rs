//! Simple undirected graphs over dense integer node ids, unit-weight
//! shortest-path distances, and closed-walk validation.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = usize;

/// Immutable simple undirected graph.
///
/// No self-loops, no duplicate edges, adjacency kept symmetric. Node ids are
/// dense; an optional name table maps every id to a text label for I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    adjacency: Vec<BTreeSet<NodeId>>,
    names: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list, rejecting self-loops,
    /// duplicates, and out-of-range endpoints.
    pub fn from_edges(n: usize, edge_list: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut edges = BTreeSet::new();
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(u, v) in edge_list {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !edges.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        Ok(Graph {
            n,
            edges,
            adjacency,
            names: None,
        })
    }

    /// Attaches a full name table (one label per node).
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::Format(format!(
                "name table has {} entries for {} nodes",
                names.len(),
                self.n
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical sorted order, each as `(min, max)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[u].iter().copied()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn name_of(&self, u: NodeId) -> Option<&str> {
        self.names.as_ref().map(|names| names[u].as_str())
    }

    pub fn id_by_name(&self, name: &str) -> Option<NodeId> {
        self.names
            .as_ref()
            .and_then(|names| names.iter().position(|candidate| candidate == name))
    }

    /// Printable label: the node's name when the graph is named, else the id.
    pub fn label_of(&self, u: NodeId) -> String {
        self.name_of(u)
            .map(str::to_owned)
            .unwrap_or_else(|| u.to_string())
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }
}

/// Closed walk: node sequence whose first element is repeated as the last.
/// The walk length counts edge steps, i.e. `nodes.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<NodeId>,
}

impl Walk {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        Walk { nodes }
    }

    pub fn length(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Rotates a closed walk so that it starts (and ends) at position `at`.
    /// Length and step multiset are preserved.
    pub fn rotate_to(&self, at: usize) -> Walk {
        debug_assert!(self.nodes.first() == self.nodes.last());
        let steps = &self.nodes[..self.nodes.len() - 1];
        let mut nodes: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        nodes.extend_from_slice(&steps[at..]);
        nodes.extend_from_slice(&steps[..at]);
        nodes.push(steps[at]);
        Walk { nodes }
    }
}

/// Outcome of checking a walk against its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkReport {
    pub is_closed: bool,
    pub all_steps_are_edges: bool,
    pub covers_all_nodes: bool,
    pub length: usize,
    /// Conjunction of the three flags above.
    pub is_hamiltonian_walk_candidate: bool,
}

/// Checks closure, step validity, and node coverage of a walk.
pub fn validate_closed_walk(g: &Graph, w: &Walk) -> Result<WalkReport> {
    if w.nodes.is_empty() {
        return Err(Error::EmptyWalk);
    }
    for &node in &w.nodes {
        if node >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                node,
                n: g.node_count(),
            });
        }
    }
    let is_closed = w.nodes.first() == w.nodes.last();
    let all_steps_are_edges = w.nodes.windows(2).all(|pair| g.has_edge(pair[0], pair[1]));
    let visited: BTreeSet<NodeId> = w.nodes.iter().copied().collect();
    let covers_all_nodes = visited.len() == g.node_count();
    let length = w.length();
    Ok(WalkReport {
        is_closed,
        all_steps_are_edges,
        covers_all_nodes,
        length,
        is_hamiltonian_walk_candidate: is_closed && all_steps_are_edges && covers_all_nodes,
    })
}

/// All-pairs shortest-path edge counts. `INFINITY` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<u32>,
}

impl DistanceMatrix {
    pub const INFINITY: u32 = u32::MAX;

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> u32 {
        self.entries[u * self.n + v]
    }

    pub fn is_finite(&self, u: NodeId, v: NodeId) -> bool {
        self.dist(u, v) != Self::INFINITY
    }
}

/// Computes the matrix of shortest paths by one breadth-first traversal per
/// node (unit edge weights).
pub fn metric_closure(g: &Graph) -> DistanceMatrix {
    let n = g.node_count();
    let mut entries = vec![DistanceMatrix::INFINITY; n * n];
    let mut queue = VecDeque::new();
    for source in 0..n {
        let row = &mut entries[source * n..(source + 1) * n];
        row[source] = 0;
        queue.clear();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = row[u] + 1;
            for v in g.neighbors(u) {
                if row[v] == DistanceMatrix::INFINITY {
                    row[v] = next;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix { n, entries }
}
