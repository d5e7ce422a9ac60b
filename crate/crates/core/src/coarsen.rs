//! Cluster interiors are contracted to single bulk nodes: each cluster is
//! split into shell, second shell, and good bulk, and the good bulk is
//! replaced by one node attached to exactly the two shells.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cluster::ClusterSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Shell of a cluster: members with an edge leaving the cluster or a missing
/// link to another member.
pub fn shell_nodes(g: &Graph, members: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    let k = members.len();
    members
        .iter()
        .copied()
        .filter(|&u| {
            let inside = g.neighbors(u).filter(|v| members.contains(v)).count();
            let outside = g.degree(u) - inside;
            outside > 0 || inside < k - 1
        })
        .collect()
}

/// How the second shell is drawn from the non-shell remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondShellRule {
    /// Lowest node ids, the reproducible default.
    LowestIds,
    /// Seeded random draw; any choice of `|S|` non-shell nodes is sound.
    Seeded(u64),
}

impl Default for SecondShellRule {
    fn default() -> Self {
        SecondShellRule::LowestIds
    }
}

/// Partition of one cluster into shell `S`, second shell `T`, and good bulk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShellDecomposition {
    pub shell: BTreeSet<NodeId>,
    pub second_shell: BTreeSet<NodeId>,
    pub good_bulk: BTreeSet<NodeId>,
}

/// Splits a cluster into `S`, `T`, `GB`. Requires `|C| > 2|S|` so that a
/// second shell of size `|S|` and a nonempty bulk both exist.
pub fn decompose_cluster(
    g: &Graph,
    members: &BTreeSet<NodeId>,
    rule: SecondShellRule,
) -> Result<ShellDecomposition> {
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
    let shell = shell_nodes(g, members);
    if members.len() <= 2 * shell.len() {
        return Err(Error::NotCoarsenable {
            cluster_size: members.len(),
            shell_size: shell.len(),
        });
    }
    let remainder: Vec<NodeId> = members.difference(&shell).copied().collect();
    let second_shell: BTreeSet<NodeId> = match rule {
        SecondShellRule::LowestIds => remainder.iter().take(shell.len()).copied().collect(),
        SecondShellRule::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            remainder
                .choose_multiple(&mut rng, shell.len())
                .copied()
                .collect()
        }
    };
    let good_bulk = remainder
        .into_iter()
        .filter(|u| !second_shell.contains(u))
        .collect();
    Ok(ShellDecomposition {
        shell,
        second_shell,
        good_bulk,
    })
}

/// Provenance of a node in the coarse graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseNode {
    /// Kept as-is; payload is the original node id.
    Survivor(NodeId),
    /// Replaces the good bulk of the cluster record at this index.
    Bulk(usize),
}

/// One coarsened cluster with its decomposition and its bulk node id in the
/// coarse graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterRecord {
    pub members: BTreeSet<NodeId>,
    pub shell: BTreeSet<NodeId>,
    pub second_shell: BTreeSet<NodeId>,
    pub good_bulk: BTreeSet<NodeId>,
    pub bulk_node: NodeId,
}

/// Result of contracting every cluster interior, with both node maps.
#[derive(Debug, Clone)]
pub struct CoarsePlan {
    pub records: Vec<ClusterRecord>,
    node_map: Vec<Option<NodeId>>,
    coarse_nodes: Vec<CoarseNode>,
    pub coarse_graph: Graph,
}

impl CoarsePlan {
    /// Coarse id of a surviving original node.
    pub fn to_coarse(&self, original: NodeId) -> Option<NodeId> {
        self.node_map[original]
    }

    pub fn provenance(&self, coarse: NodeId) -> CoarseNode {
        self.coarse_nodes[coarse]
    }

    /// Record index of a bulk node in the coarse graph, if it is one.
    pub fn bulk_index(&self, coarse: NodeId) -> Option<usize> {
        match self.coarse_nodes[coarse] {
            CoarseNode::Bulk(index) => Some(index),
            CoarseNode::Survivor(_) => None,
        }
    }

    pub fn bulk_record(&self, coarse: NodeId) -> Option<&ClusterRecord> {
        self.bulk_index(coarse).map(|index| &self.records[index])
    }

    pub fn is_bulk(&self, coarse: NodeId) -> bool {
        matches!(self.coarse_nodes[coarse], CoarseNode::Bulk(_))
    }

    /// Total walk growth incurred by re-expanding every bulk node.
    pub fn bulk_extra(&self) -> usize {
        self.records.iter().map(|r| r.good_bulk.len() - 1).sum()
    }

    pub fn survivor_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.node_map
            .iter()
            .enumerate()
            .filter_map(|(orig, coarse)| coarse.map(|c| (orig, c)))
            .collect()
    }
}

/// Contracts the good bulk of every cluster in `cs` to one node per cluster.
/// Survivor ids are compacted to a dense range; bulk nodes come after them in
/// ascending min-member order of their clusters.
pub fn coarsen(g: &Graph, cs: &ClusterSet) -> Result<CoarsePlan> {
    coarsen_with(g, cs, SecondShellRule::LowestIds)
}

pub fn coarsen_with(g: &Graph, cs: &ClusterSet, rule: SecondShellRule) -> Result<CoarsePlan> {
    let n = g.node_count();
    let mut member_sets = cs.member_sets();
    member_sets.sort_by_key(|members| members.iter().next().copied());

    let mut decompositions = Vec::with_capacity(member_sets.len());
    let mut in_bulk = vec![false; n];
    for members in &member_sets {
        let d = decompose_cluster(g, members, rule)?;
        for &u in &d.good_bulk {
            in_bulk[u] = true;
        }
        decompositions.push(d);
    }

    let mut node_map: Vec<Option<NodeId>> = vec![None; n];
    let mut coarse_nodes: Vec<CoarseNode> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for u in 0..n {
        if !in_bulk[u] {
            node_map[u] = Some(coarse_nodes.len());
            coarse_nodes.push(CoarseNode::Survivor(u));
            if let Some(name) = g.name_of(u) {
                names.push(name.to_owned());
            }
        }
    }
    let survivor_count = coarse_nodes.len();

    let mut records = Vec::with_capacity(member_sets.len());
    for (index, (members, d)) in member_sets.into_iter().zip(decompositions).enumerate() {
        let bulk_node = survivor_count + index;
        coarse_nodes.push(CoarseNode::Bulk(index));
        if g.names().is_some() {
            names.push(format!("b{index}"));
        }
        records.push(ClusterRecord {
            members,
            shell: d.shell,
            second_shell: d.second_shell,
            good_bulk: d.good_bulk,
            bulk_node,
        });
    }

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for (u, v) in g.edges() {
        if let (Some(cu), Some(cv)) = (node_map[u], node_map[v]) {
            edges.push((cu, cv));
        }
    }
    for record in &records {
        for &u in record.shell.iter().chain(record.second_shell.iter()) {
            let cu = node_map[u].expect("shell nodes survive coarsening");
            edges.push((cu, record.bulk_node));
        }
    }

    let mut coarse_graph = Graph::from_edges(coarse_nodes.len(), &edges)?;
    if g.names().is_some() {
        coarse_graph = coarse_graph.with_names(names)?;
    }

    Ok(CoarsePlan {
        records,
        node_map,
        coarse_nodes,
        coarse_graph,
    })
}

/// Contraction of one whole cluster to a single node, attached to the union
/// of the cluster's external neighbors.
#[derive(Debug, Clone)]
pub struct NaiveCoarsening {
    pub members: BTreeSet<NodeId>,
    pub graph: Graph,
    pub cluster_node: NodeId,
    node_map: Vec<Option<NodeId>>,
    survivors: Vec<NodeId>,
}

impl NaiveCoarsening {
    pub fn to_coarse(&self, original: NodeId) -> Option<NodeId> {
        self.node_map[original]
    }

    /// Original id of a surviving coarse node; `None` for the cluster node.
    pub fn to_original(&self, coarse: NodeId) -> Option<NodeId> {
        self.survivors.get(coarse).copied()
    }
}

/// Replaces an entire cluster by a single cluster-node. Used by the
/// small-parameter fast path and for reproducing textbook counterexamples.
pub fn naive_coarsen(g: &Graph, members: &BTreeSet<NodeId>) -> Result<NaiveCoarsening> {
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
    if members.len() == g.node_count() {
        return Err(Error::ClusterIsWholeGraph);
    }

    let n = g.node_count();
    let mut node_map: Vec<Option<NodeId>> = vec![None; n];
    let mut survivors: Vec<NodeId> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for u in 0..n {
        if !members.contains(&u) {
            node_map[u] = Some(survivors.len());
            survivors.push(u);
            if let Some(name) = g.name_of(u) {
                names.push(name.to_owned());
            }
        }
    }
    let cluster_node = survivors.len();
    if g.names().is_some() {
        names.push("x".to_owned());
    }

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut attached: BTreeSet<NodeId> = BTreeSet::new();
    for (u, v) in g.edges() {
        match (node_map[u], node_map[v]) {
            (Some(cu), Some(cv)) => edges.push((cu, cv)),
            (Some(cu), None) => {
                attached.insert(cu);
            }
            (None, Some(cv)) => {
                attached.insert(cv);
            }
            (None, None) => {}
        }
    }
    edges.extend(attached.into_iter().map(|cu| (cu, cluster_node)));

    let mut graph = Graph::from_edges(cluster_node + 1, &edges)?;
    if g.names().is_some() {
        graph = graph.with_names(names)?;
    }

    Ok(NaiveCoarsening {
        members: members.clone(),
        graph,
        cluster_node,
        node_map,
        survivors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterParams;

    fn clique_edges(nodes: &[NodeId]) -> Vec<(NodeId, NodeId)> {
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                edges.push((u, v));
            }
        }
        edges
    }

    fn set(ids: &[NodeId]) -> BTreeSet<NodeId> {
        ids.iter().copied().collect()
    }

    /// K6 on {0..5} with pendants 6 and 7 hanging off 0 and 1, plus edge 6-7.
    fn toy8() -> Graph {
        let mut edges = clique_edges(&[0, 1, 2, 3, 4, 5]);
        edges.extend([(0, 6), (1, 7), (6, 7)]);
        Graph::from_edges(8, &edges).unwrap()
    }

    #[test]
    fn decompose_pendant_clique() {
        let mut edges = clique_edges(&[0, 1, 2, 3, 4, 5, 6]);
        edges.push((0, 7));
        let g = Graph::from_edges(8, &edges).unwrap();
        let d = decompose_cluster(&g, &set(&[0, 1, 2, 3, 4, 5, 6]), SecondShellRule::LowestIds)
            .unwrap();
        assert_eq!(d.shell, set(&[0]));
        assert_eq!(d.second_shell, set(&[1]));
        assert_eq!(d.good_bulk, set(&[2, 3, 4, 5, 6]));
    }

    #[test]
    fn decompose_with_missing_link() {
        // K9 on {0..8} minus the internal edge (0,1), with externals (2,9), (3,10).
        let mut edges: Vec<(NodeId, NodeId)> = clique_edges(&[0, 1, 2, 3, 4, 5, 6, 7, 8])
            .into_iter()
            .filter(|&e| e != (0, 1))
            .collect();
        edges.extend([(2, 9), (3, 10)]);
        let g = Graph::from_edges(11, &edges).unwrap();
        let members = set(&[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        let (external, missing) = crate::cluster::cluster_stats(&g, &members).unwrap();
        assert_eq!((external, missing), (2, 1));
        let d = decompose_cluster(&g, &members, SecondShellRule::LowestIds).unwrap();
        assert_eq!(d.shell, set(&[0, 1, 2, 3]));
        assert_eq!(d.second_shell, set(&[4, 5, 6, 7]));
        assert_eq!(d.good_bulk, set(&[8]));
    }

    #[test]
    fn decompose_toy8_cluster() {
        let g = toy8();
        let d = decompose_cluster(&g, &set(&[0, 1, 2, 3, 4, 5]), SecondShellRule::LowestIds)
            .unwrap();
        assert_eq!(d.shell, set(&[0, 1]));
        assert_eq!(d.second_shell, set(&[2, 3]));
        assert_eq!(d.good_bulk, set(&[4, 5]));
    }

    #[test]
    fn not_coarsenable_when_shell_dominates() {
        // A 3-clique with externals off two members: |C| = 3, |S| = 2.
        let mut edges = clique_edges(&[0, 1, 2]);
        edges.extend([(0, 3), (1, 4)]);
        let g = Graph::from_edges(5, &edges).unwrap();
        let err =
            decompose_cluster(&g, &set(&[0, 1, 2]), SecondShellRule::LowestIds).unwrap_err();
        assert_eq!(
            err,
            Error::NotCoarsenable {
                cluster_size: 3,
                shell_size: 2
            }
        );
    }

    #[test]
    fn seeded_second_shell_is_still_valid() {
        let g = toy8();
        let members = set(&[0, 1, 2, 3, 4, 5]);
        let d = decompose_cluster(&g, &members, SecondShellRule::Seeded(11)).unwrap();
        assert_eq!(d.shell, set(&[0, 1]));
        assert_eq!(d.second_shell.len(), 2);
        assert!(d.second_shell.is_subset(&set(&[2, 3, 4, 5])));
        assert_eq!(
            d.second_shell.union(&d.good_bulk).count() + d.shell.len(),
            members.len()
        );
    }

    #[test]
    fn coarsen_toy8() {
        let g = toy8();
        let cs = ClusterSet::from_members(&g, vec![set(&[0, 1, 2, 3, 4, 5])]).unwrap();
        let plan = coarsen(&g, &cs).unwrap();
        // Survivors 0,1,2,3,6,7 compact to 0..=5; the bulk node is 6.
        assert_eq!(plan.coarse_graph.node_count(), 7);
        let bulk = plan.records[0].bulk_node;
        assert_eq!(bulk, 6);
        let bulk_neighbors: BTreeSet<NodeId> = plan.coarse_graph.neighbors(bulk).collect();
        let expected: BTreeSet<NodeId> = [0, 1, 2, 3]
            .into_iter()
            .map(|u| plan.to_coarse(u).unwrap())
            .collect();
        assert_eq!(bulk_neighbors, expected);
        // Bound with delta=2, mu=0, one cluster, two free nodes.
        assert!(plan.coarse_graph.node_count() <= (2 * 2 + 1) * 1 + 2);
        assert_eq!(plan.bulk_extra(), 1);
    }

    #[test]
    fn coarsen_without_clusters_is_identity() {
        let g = toy8();
        let plan = coarsen(&g, &ClusterSet::empty(&g)).unwrap();
        assert_eq!(plan.coarse_graph, g);
        for u in 0..g.node_count() {
            assert_eq!(plan.to_coarse(u), Some(u));
        }
    }

    #[test]
    fn good_bulk_is_fully_attached() {
        let g = toy8();
        let members = set(&[0, 1, 2, 3, 4, 5]);
        let d = decompose_cluster(&g, &members, SecondShellRule::LowestIds).unwrap();
        for &u in &d.good_bulk {
            for &v in &members {
                if u != v {
                    assert!(g.has_edge(u, v), "bulk node {u} misses edge to {v}");
                }
            }
        }
        for &t in &d.second_shell {
            for &v in &members {
                if t != v {
                    assert!(g.has_edge(t, v), "second-shell node {t} misses edge to {v}");
                }
            }
        }
    }

    #[test]
    fn naive_coarsen_triangle_single_node() {
        let g = Graph::from_edges(3, &clique_edges(&[0, 1, 2])).unwrap();
        let nc = naive_coarsen(&g, &set(&[0])).unwrap();
        assert_eq!(nc.graph.node_count(), 3);
        assert_eq!(nc.cluster_node, 2);
        let neighbors: BTreeSet<NodeId> = nc.graph.neighbors(nc.cluster_node).collect();
        assert_eq!(neighbors, set(&[0, 1]));
    }

    #[test]
    fn naive_coarsen_rejects_whole_graph() {
        let g = Graph::from_edges(3, &clique_edges(&[0, 1, 2])).unwrap();
        let err = naive_coarsen(&g, &set(&[0, 1, 2])).unwrap_err();
        assert_eq!(err, Error::ClusterIsWholeGraph);
    }
}
