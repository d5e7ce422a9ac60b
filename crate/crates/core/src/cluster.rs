//! Detection and validation of near-clique clusters: node subsets with at
//! most `delta` external links and at most `mu` missing internal links.

use std::collections::BTreeSet;

use crate::coarsen::shell_nodes;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Exact detection enumerates subsets by bitmask; refuse anything wider.
pub const EXACT_DETECTION_LIMIT: usize = 32;

/// Cluster acceptance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterParams {
    /// Maximum number of edges leaving the cluster.
    pub delta: usize,
    /// Maximum number of absent internal node pairs.
    pub mu: usize,
}

impl ClusterParams {
    pub fn new(delta: usize, mu: usize) -> Self {
        ClusterParams { delta, mu }
    }
}

/// A node subset together with its cached link statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub members: BTreeSet<NodeId>,
    pub external_degree: usize,
    pub missing_links: usize,
}

impl Cluster {
    pub fn new(g: &Graph, members: BTreeSet<NodeId>) -> Result<Self> {
        let (external_degree, missing_links) = cluster_stats(g, &members)?;
        Ok(Cluster {
            members,
            external_degree,
            missing_links,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Pairwise-disjoint clusters plus the nodes left out of every cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub free_nodes: BTreeSet<NodeId>,
}

impl ClusterSet {
    pub fn empty(g: &Graph) -> Self {
        ClusterSet {
            clusters: Vec::new(),
            free_nodes: (0..g.node_count()).collect(),
        }
    }

    /// Assembles a set from member lists, checking disjointness and deriving
    /// the free nodes as the complement.
    pub fn from_members(g: &Graph, member_sets: Vec<BTreeSet<NodeId>>) -> Result<Self> {
        let mut covered: BTreeSet<NodeId> = BTreeSet::new();
        let mut clusters = Vec::with_capacity(member_sets.len());
        for members in member_sets {
            for &u in &members {
                if !covered.insert(u) {
                    return Err(Error::Format(format!("node {u} appears in two clusters")));
                }
            }
            clusters.push(Cluster::new(g, members)?);
        }
        let free_nodes = (0..g.node_count()).filter(|u| !covered.contains(u)).collect();
        Ok(ClusterSet {
            clusters,
            free_nodes,
        })
    }

    pub fn member_sets(&self) -> Vec<BTreeSet<NodeId>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }
}

/// Counts edges with exactly one endpoint in `members` and member pairs with
/// no edge between them.
pub fn cluster_stats(g: &Graph, members: &BTreeSet<NodeId>) -> Result<(usize, usize)> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    for &u in members {
        if u >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                node: u,
                n: g.node_count(),
            });
        }
    }
    let mut external_degree = 0;
    let mut internal_links = 0;
    for &u in members {
        for v in g.neighbors(u) {
            if members.contains(&v) {
                internal_links += 1;
            } else {
                external_degree += 1;
            }
        }
    }
    internal_links /= 2;
    let k = members.len();
    let missing_links = k * (k - 1) / 2 - internal_links;
    Ok((external_degree, missing_links))
}

/// True iff the subset meets both thresholds of `p`.
pub fn is_valid_cluster(g: &Graph, members: &BTreeSet<NodeId>, p: ClusterParams) -> Result<bool> {
    let (external_degree, missing_links) = cluster_stats(g, members)?;
    Ok(external_degree <= p.delta && missing_links <= p.mu)
}

fn subset_connected(adjacency_masks: &[u64], mask: u64) -> bool {
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u64;
        let mut bits = frontier;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            next |= adjacency_masks[u] & mask & !seen;
        }
        seen |= next;
        frontier = next;
    }
    seen == mask
}

fn adjacency_masks(g: &Graph) -> Vec<u64> {
    (0..g.node_count())
        .map(|u| g.neighbors(u).fold(0u64, |acc, v| acc | (1u64 << v)))
        .collect()
}

fn stats_from_masks(g: &Graph, adjacency: &[u64], mask: u64) -> (usize, usize) {
    let k = mask.count_ones() as usize;
    let mut internal = 0usize;
    let mut external = 0usize;
    let mut bits = mask;
    while bits != 0 {
        let u = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let inside = (adjacency[u] & mask).count_ones() as usize;
        internal += inside;
        external += g.degree(u) - inside;
    }
    (external, k * (k - 1) / 2 - internal / 2)
}

fn members_of_mask(mask: u64) -> BTreeSet<NodeId> {
    let mut members = BTreeSet::new();
    let mut bits = mask;
    while bits != 0 {
        let u = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        members.insert(u);
    }
    members
}

/// Enumerates every valid cluster whose size lies in `[min_size, max_size]`
/// and whose members induce a connected subgraph, in canonical order.
///
/// Exhaustive over subsets, so only small graphs are accepted.
pub fn enumerate_valid_clusters(
    g: &Graph,
    p: ClusterParams,
    min_size: usize,
    max_size: usize,
) -> Result<Vec<BTreeSet<NodeId>>> {
    let n = g.node_count();
    if n > EXACT_DETECTION_LIMIT {
        return Err(Error::InstanceTooLarge {
            n,
            limit: EXACT_DETECTION_LIMIT,
        });
    }
    let adjacency = adjacency_masks(g);
    let mut found = Vec::new();
    if n == 0 || min_size > max_size {
        return Ok(found);
    }
    let top: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for mask in 1..=top {
        let k = mask.count_ones() as usize;
        if k < min_size || k > max_size {
            continue;
        }
        if !subset_connected(&adjacency, mask) {
            continue;
        }
        let (external, missing) = stats_from_masks(g, &adjacency, mask);
        if external <= p.delta && missing <= p.mu {
            found.push(members_of_mask(mask));
        }
    }
    found.sort();
    Ok(found)
}

/// Cluster detection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Enumerate all candidates and pack them optimally. Small graphs only.
    Exact,
    /// Deterministic greedy growth from high-degree seeds. Any size.
    Greedy,
}

/// Size of the coarsenable interior: `|C| - 2|S|` when positive.
fn good_bulk_size(g: &Graph, members: &BTreeSet<NodeId>) -> Option<usize> {
    let shell = shell_nodes(g, members);
    if members.len() > 2 * shell.len() {
        Some(members.len() - 2 * shell.len())
    } else {
        None
    }
}

/// Finds a disjoint set of valid, coarsenable clusters.
///
/// Exact mode maximizes the total good-bulk size over all disjoint packings
/// of enumerated candidates, which minimizes the coarsened node count.
/// Greedy mode grows one cluster at a time and keeps the best valid
/// coarsenable prefix of each growth sequence. Both are deterministic; the
/// seed is accepted for interface stability but the current strategies take
/// no random decisions.
pub fn detect_clusters(
    g: &Graph,
    p: ClusterParams,
    mode: DetectionMode,
    _seed: u64,
) -> Result<ClusterSet> {
    match mode {
        DetectionMode::Exact => detect_exact(g, p),
        DetectionMode::Greedy => Ok(detect_greedy(g, p)),
    }
}

fn detect_exact(g: &Graph, p: ClusterParams) -> Result<ClusterSet> {
    let n = g.node_count();
    let candidates = enumerate_valid_clusters(g, p, 1, n)?;
    let mut scored: Vec<(u64, usize, BTreeSet<NodeId>)> = Vec::new();
    for members in candidates {
        if let Some(gb) = good_bulk_size(g, &members) {
            let mask = members.iter().fold(0u64, |acc, &u| acc | (1u64 << u));
            scored.push((mask, gb, members));
        }
    }
    // Largest interiors first so the branch-and-bound prunes early.
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.2.cmp(&b.2)));

    let mut suffix_bound = vec![0usize; scored.len() + 1];
    for i in (0..scored.len()).rev() {
        suffix_bound[i] = suffix_bound[i + 1] + scored[i].1;
    }

    struct Search<'a> {
        scored: &'a [(u64, usize, BTreeSet<NodeId>)],
        suffix_bound: &'a [usize],
        best_value: usize,
        best_pick: Vec<usize>,
        pick: Vec<usize>,
    }

    impl Search<'_> {
        fn run(&mut self, index: usize, used: u64, value: usize) {
            if index == self.scored.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best_pick = self.pick.clone();
                }
                return;
            }
            if value + self.suffix_bound[index] <= self.best_value {
                return;
            }
            let (mask, gb, _) = &self.scored[index];
            if mask & used == 0 {
                self.pick.push(index);
                self.run(index + 1, used | mask, value + gb);
                self.pick.pop();
            }
            self.run(index + 1, used, value);
        }
    }

    let mut search = Search {
        scored: &scored,
        suffix_bound: &suffix_bound,
        best_value: 0,
        best_pick: Vec::new(),
        pick: vec![],
    };
    search.run(0, 0, 0);

    let mut chosen: Vec<BTreeSet<NodeId>> = search
        .best_pick
        .iter()
        .map(|&i| scored[i].2.clone())
        .collect();
    chosen.sort();
    ClusterSet::from_members(g, chosen)
}

fn detect_greedy(g: &Graph, p: ClusterParams) -> ClusterSet {
    let n = g.node_count();
    let mut seeds: Vec<NodeId> = (0..n).collect();
    seeds.sort_by_key(|&u| (std::cmp::Reverse(g.degree(u)), u));

    let mut used = vec![false; n];
    let mut emitted: Vec<BTreeSet<NodeId>> = Vec::new();

    for &seed in &seeds {
        if used[seed] {
            continue;
        }
        if let Some(members) = grow_cluster(g, p, seed, &used) {
            for &u in &members {
                used[u] = true;
            }
            emitted.push(members);
        }
    }
    emitted.sort();
    ClusterSet::from_members(g, emitted).expect("greedy clusters are disjoint by construction")
}

/// Grows a cluster from `seed` over unused nodes, always adding the frontier
/// node that keeps (missing links, external degree) lexicographically
/// smallest, and returns the prefix with the largest good bulk, if any
/// prefix is a valid coarsenable cluster.
fn grow_cluster(
    g: &Graph,
    p: ClusterParams,
    seed: NodeId,
    used: &[bool],
) -> Option<BTreeSet<NodeId>> {
    let n = g.node_count();
    let mut links_inside = vec![0usize; n];
    let mut in_cluster = vec![false; n];
    let mut order: Vec<NodeId> = Vec::new();
    let mut missing = 0usize;
    let mut external = g.degree(seed);

    let mut push = |u: NodeId,
                    order: &mut Vec<NodeId>,
                    in_cluster: &mut Vec<bool>,
                    links_inside: &mut Vec<usize>| {
        order.push(u);
        in_cluster[u] = true;
        for v in g.neighbors(u) {
            links_inside[v] += 1;
        }
    };
    push(seed, &mut order, &mut in_cluster, &mut links_inside);

    let mut best: Option<(usize, BTreeSet<NodeId>)> = None;
    let mut consider = |order: &[NodeId], links_inside: &[usize], external: usize| {
        // Missing links are bounded by construction; only external degree and
        // coarsenability still need checking.
        if external > p.delta {
            return;
        }
        let k = order.len();
        let shell = order
            .iter()
            .filter(|&&u| g.degree(u) > links_inside[u] || links_inside[u] < k - 1)
            .count();
        if k > 2 * shell {
            let gb = k - 2 * shell;
            if best.as_ref().map_or(true, |(b, _)| gb > *b) {
                best = Some((gb, order.iter().copied().collect()));
            }
        }
    };
    if missing <= p.mu {
        consider(&order, &links_inside, external);
    }

    loop {
        let k = order.len();
        let mut candidate: Option<(usize, usize, NodeId)> = None;
        for u in &order {
            for v in g.neighbors(*u) {
                if in_cluster[v] || used[v] {
                    continue;
                }
                let missing_after = missing + (k - links_inside[v]);
                if missing_after > p.mu {
                    continue;
                }
                let external_after = external + g.degree(v) - 2 * links_inside[v];
                let key = (missing_after, external_after, v);
                if candidate.map_or(true, |best_key| key < best_key) {
                    candidate = Some(key);
                }
            }
        }
        let Some((missing_after, external_after, v)) = candidate else {
            break;
        };
        missing = missing_after;
        external = external_after;
        push(v, &mut order, &mut in_cluster, &mut links_inside);
        consider(&order, &links_inside, external);
    }

    best.map(|(_, members)| members)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn k(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn stats_on_path_pair() {
        let g = path3();
        let members: BTreeSet<_> = [0, 2].into_iter().collect();
        assert_eq!(cluster_stats(&g, &members).unwrap(), (2, 1));
    }

    #[test]
    fn stats_on_whole_triangle() {
        let g = k(3);
        let members: BTreeSet<_> = [0, 1, 2].into_iter().collect();
        assert_eq!(cluster_stats(&g, &members).unwrap(), (0, 0));
    }

    #[test]
    fn empty_cluster_rejected() {
        let g = k(3);
        assert_eq!(
            cluster_stats(&g, &BTreeSet::new()).unwrap_err(),
            Error::EmptyCluster
        );
    }

    #[test]
    fn singleton_validity_in_triangle() {
        let g = k(3);
        let members: BTreeSet<_> = [1].into_iter().collect();
        assert!(is_valid_cluster(&g, &members, ClusterParams::new(2, 0)).unwrap());
        assert!(!is_valid_cluster(&g, &members, ClusterParams::new(1, 0)).unwrap());
    }

    #[test]
    fn enumerate_triangle_whole_graph() {
        let g = k(3);
        let found = enumerate_valid_clusters(&g, ClusterParams::new(0, 0), 3, 3).unwrap();
        assert_eq!(found, vec![[0, 1, 2].into_iter().collect::<BTreeSet<_>>()]);
    }

    #[test]
    fn enumerate_path_needs_mu() {
        let g = path3();
        let none = enumerate_valid_clusters(&g, ClusterParams::new(1, 0), 3, 3).unwrap();
        assert!(none.is_empty());
        let with_mu = enumerate_valid_clusters(&g, ClusterParams::new(1, 1), 3, 3).unwrap();
        assert_eq!(with_mu.len(), 1);
    }

    #[test]
    fn enumerate_guard() {
        let g = Graph::from_edges(40, &[(0, 1)]).unwrap();
        assert!(matches!(
            enumerate_valid_clusters(&g, ClusterParams::new(1, 0), 1, 2),
            Err(Error::InstanceTooLarge { n: 40, limit: 32 })
        ));
    }

    #[test]
    fn detect_whole_clique() {
        let g = k(3);
        let cs = detect_clusters(&g, ClusterParams::new(0, 0), DetectionMode::Exact, 0).unwrap();
        assert_eq!(cs.clusters.len(), 1);
        assert_eq!(cs.clusters[0].members.len(), 3);
        assert!(cs.free_nodes.is_empty());

        let greedy =
            detect_clusters(&g, ClusterParams::new(0, 0), DetectionMode::Greedy, 0).unwrap();
        assert_eq!(greedy, cs);
    }

    #[test]
    fn detection_is_deterministic() {
        let g = k(6);
        let a = detect_clusters(&g, ClusterParams::new(2, 1), DetectionMode::Greedy, 7).unwrap();
        let b = detect_clusters(&g, ClusterParams::new(2, 1), DetectionMode::Greedy, 7).unwrap();
        assert_eq!(a, b);
    }
}
