//! Construction and evaluation of k-expressions: build scripts over labeled
//! graphs using seed / union / join / relabel, witnessing bounded
//! clique-width for clustered graphs without missing links.

use std::collections::{BTreeMap, BTreeSet};

use crate::cluster::ClusterSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub type Label = u32;

/// Operation tree whose evaluation rebuilds a labeled graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KExpression {
    /// One fresh node carrying the label.
    Seed(Label),
    /// Disjoint union of two subexpressions.
    Union(Box<KExpression>, Box<KExpression>),
    /// All edges between the two label classes of the subexpression.
    Join(Box<KExpression>, Label, Label),
    /// Every node labeled `from` becomes labeled `to`.
    Relabel(Box<KExpression>, Label, Label),
}

impl KExpression {
    /// Number of distinct labels appearing anywhere in the tree.
    pub fn width(&self) -> usize {
        let mut labels = BTreeSet::new();
        self.collect_labels(&mut labels);
        labels.len()
    }

    fn collect_labels(&self, labels: &mut BTreeSet<Label>) {
        match self {
            KExpression::Seed(label) => {
                labels.insert(*label);
            }
            KExpression::Union(left, right) => {
                left.collect_labels(labels);
                right.collect_labels(labels);
            }
            KExpression::Join(child, i, j) => {
                labels.insert(*i);
                labels.insert(*j);
                child.collect_labels(labels);
            }
            KExpression::Relabel(child, from, to) => {
                labels.insert(*from);
                labels.insert(*to);
                child.collect_labels(labels);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            KExpression::Seed(_) => 1,
            KExpression::Union(left, right) => left.node_count() + right.node_count(),
            KExpression::Join(child, _, _) | KExpression::Relabel(child, _, _) => {
                child.node_count()
            }
        }
    }
}

/// Graph produced by evaluating a k-expression, with the final labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<Label>,
}

/// Evaluates the expression bottom-up. Node ids are assigned in leaf order
/// (left to right). Join never duplicates edges and rejects equal labels.
pub fn eval_k_expression(expression: &KExpression) -> Result<LabeledGraph> {
    fn eval(
        expression: &KExpression,
        next_id: &mut usize,
        labels: &mut Vec<Label>,
        edges: &mut BTreeSet<(NodeId, NodeId)>,
    ) -> Result<Vec<NodeId>> {
        match expression {
            KExpression::Seed(label) => {
                let id = *next_id;
                *next_id += 1;
                labels.push(*label);
                Ok(vec![id])
            }
            KExpression::Union(left, right) => {
                let mut nodes = eval(left, next_id, labels, edges)?;
                nodes.extend(eval(right, next_id, labels, edges)?);
                Ok(nodes)
            }
            KExpression::Join(child, i, j) => {
                if i == j {
                    return Err(Error::JoinSameLabel(*i));
                }
                let nodes = eval(child, next_id, labels, edges)?;
                let class_i: Vec<NodeId> =
                    nodes.iter().copied().filter(|&u| labels[u] == *i).collect();
                let class_j: Vec<NodeId> =
                    nodes.iter().copied().filter(|&u| labels[u] == *j).collect();
                for &u in &class_i {
                    for &v in &class_j {
                        edges.insert((u.min(v), u.max(v)));
                    }
                }
                Ok(nodes)
            }
            KExpression::Relabel(child, from, to) => {
                let nodes = eval(child, next_id, labels, edges)?;
                for &u in &nodes {
                    if labels[u] == *from {
                        labels[u] = *to;
                    }
                }
                Ok(nodes)
            }
        }
    }

    let mut next_id = 0;
    let mut labels = Vec::new();
    let mut edges = BTreeSet::new();
    eval(expression, &mut next_id, &mut labels, &mut edges)?;
    let edge_list: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
    let graph = Graph::from_edges(next_id, &edge_list)?;
    Ok(LabeledGraph { graph, labels })
}

/// A built expression plus the correspondence from leaf order to the node
/// ids of the source graph.
#[derive(Debug, Clone)]
pub struct KExpressionBuild {
    pub expression: KExpression,
    pub node_order: Vec<NodeId>,
}

impl KExpressionBuild {
    pub fn width(&self) -> usize {
        self.expression.width()
    }
}

/// True iff evaluating the expression reproduces `g` exactly under the
/// recorded node correspondence.
pub fn verify_round_trip(g: &Graph, build: &KExpressionBuild) -> Result<bool> {
    let evaluated = eval_k_expression(&build.expression)?;
    if evaluated.graph.node_count() != g.node_count()
        || build.node_order.len() != g.node_count()
        || evaluated.graph.edge_count() != g.edge_count()
    {
        return Ok(false);
    }
    for (u, v) in evaluated.graph.edges() {
        if !g.has_edge(build.node_order[u], build.node_order[v]) {
            return Ok(false);
        }
    }
    Ok(true)
}

const WORKING: Label = 1;
const DEAD: Label = 2;
const FIRST_POOL: Label = 3;

/// Incremental expression assembly for one connected component.
struct ComponentBuilder {
    expression: Option<KExpression>,
    node_order: Vec<NodeId>,
    /// External partners still owed an edge, per node.
    pending: BTreeMap<NodeId, BTreeSet<NodeId>>,
    present: BTreeSet<NodeId>,
    /// Private label currently owned by each pending node.
    label_of: BTreeMap<NodeId, Label>,
    free_pool: BTreeSet<Label>,
    next_pool: Label,
    working_class: Vec<NodeId>,
    dead_nonempty: bool,
}

impl ComponentBuilder {
    fn new(pending: BTreeMap<NodeId, BTreeSet<NodeId>>) -> Self {
        ComponentBuilder {
            expression: None,
            node_order: Vec::new(),
            pending,
            present: BTreeSet::new(),
            label_of: BTreeMap::new(),
            free_pool: BTreeSet::new(),
            next_pool: FIRST_POOL,
            working_class: Vec::new(),
            dead_nonempty: false,
        }
    }

    fn seed(&mut self, node: NodeId, label: Label) {
        let seed = KExpression::Seed(label);
        self.expression = Some(match self.expression.take() {
            None => seed,
            Some(existing) => KExpression::Union(Box::new(existing), Box::new(seed)),
        });
        self.node_order.push(node);
    }

    fn join(&mut self, i: Label, j: Label) {
        debug_assert_ne!(i, j);
        let child = self.expression.take().expect("join needs nodes");
        self.expression = Some(KExpression::Join(Box::new(child), i, j));
    }

    fn relabel(&mut self, from: Label, to: Label) {
        if from == to {
            return;
        }
        let child = self.expression.take().expect("relabel needs nodes");
        self.expression = Some(KExpression::Relabel(Box::new(child), from, to));
    }

    fn take_pool_label(&mut self) -> Label {
        if let Some(&label) = self.free_pool.iter().next() {
            self.free_pool.remove(&label);
            label
        } else {
            let label = self.next_pool;
            self.next_pool += 1;
            label
        }
    }

    fn entry_label(&mut self) -> Label {
        if !self.dead_nonempty {
            DEAD
        } else if let Some(&label) = self.free_pool.iter().next() {
            self.free_pool.remove(&label);
            label
        } else if self.working_class.is_empty() {
            WORKING
        } else {
            let label = self.next_pool;
            self.next_pool += 1;
            label
        }
    }

    /// Introduces one node: seed it, attach it to already-present cluster
    /// mates, flush every external edge whose partner is present, then park
    /// it on the working class, a private label, or the dead class.
    fn add_node(&mut self, node: NodeId, cluster: Option<&BTreeSet<NodeId>>) {
        let entry = self.entry_label();
        self.seed(node, entry);

        if let Some(members) = cluster {
            if !self.working_class.is_empty() {
                self.join(entry, WORKING);
            }
            let mates: Vec<Label> = members
                .iter()
                .filter(|&&m| m != node && self.present.contains(&m))
                .filter_map(|m| self.label_of.get(m).copied())
                .collect();
            for label in mates {
                self.join(entry, label);
            }
        }

        let partners: Vec<NodeId> = self
            .pending
            .get(&node)
            .map(|set| set.iter().copied().filter(|p| self.present.contains(p)).collect())
            .unwrap_or_default();
        let mut to_retire: Vec<NodeId> = Vec::new();
        for partner in partners {
            let partner_label = self.label_of[&partner];
            self.join(entry, partner_label);
            self.pending.get_mut(&node).unwrap().remove(&partner);
            let remaining = self.pending.get_mut(&partner).unwrap();
            remaining.remove(&node);
            if remaining.is_empty() {
                to_retire.push(partner);
            }
        }

        self.present.insert(node);
        let still_pending = self.pending.get(&node).map_or(false, |set| !set.is_empty());
        if still_pending {
            if entry == WORKING || entry == DEAD {
                let private = self.take_pool_label();
                self.relabel(entry, private);
                self.label_of.insert(node, private);
            } else {
                self.label_of.insert(node, entry);
            }
        } else if cluster.is_some() {
            if entry != WORKING {
                self.relabel(entry, WORKING);
                if entry >= FIRST_POOL {
                    self.free_pool.insert(entry);
                }
            }
            self.working_class.push(node);
        } else {
            // Free node with nothing left to connect: straight to the dead class.
            self.relabel(entry, DEAD);
            if entry >= FIRST_POOL {
                self.free_pool.insert(entry);
            }
            self.dead_nonempty = true;
        }

        for partner in to_retire {
            let label = self.label_of.remove(&partner).expect("pending nodes hold labels");
            self.relabel(label, DEAD);
            self.free_pool.insert(label);
            self.dead_nonempty = true;
        }
    }

    fn finish_cluster(&mut self) {
        if !self.working_class.is_empty() {
            self.relabel(WORKING, DEAD);
            self.dead_nonempty = true;
            self.working_class.clear();
        }
    }
}

/// Builds a k-expression reproducing `g` from a covering cluster set with no
/// missing internal links.
///
/// Free nodes and shell nodes carry private labels only while they still owe
/// external edges; cluster interiors are built on one shared working label
/// and retired onto one shared dead label. The resulting width is at most
/// `delta * n_c + n' + 2`.
pub fn build_k_expression(g: &Graph, cs: &ClusterSet) -> Result<KExpressionBuild> {
    if g.node_count() == 0 {
        return Err(Error::Format("cannot build an expression for an empty graph".into()));
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.node_count()];
    for (index, cluster) in cs.clusters.iter().enumerate() {
        if cluster.missing_links > 0 {
            return Err(Error::MuNonZero {
                cluster_index: index,
                missing: cluster.missing_links,
            });
        }
        for &u in &cluster.members {
            if u >= g.node_count() || owner[u].is_some() {
                return Err(Error::CoverageGap);
            }
            owner[u] = Some(index);
        }
    }
    for &u in &cs.free_nodes {
        if u >= g.node_count() || owner[u].is_some() {
            return Err(Error::CoverageGap);
        }
    }
    if cs.clusters.iter().map(|c| c.members.len()).sum::<usize>() + cs.free_nodes.len()
        != g.node_count()
    {
        return Err(Error::CoverageGap);
    }

    // Pending external edges: every edge not inside a single cluster.
    let mut pending: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for (u, v) in g.edges() {
        let internal = matches!((owner[u], owner[v]), (Some(a), Some(b)) if a == b);
        if !internal {
            pending.entry(u).or_default().insert(v);
            pending.entry(v).or_default().insert(u);
        }
    }

    // One independent expression per connected component; labels are reused
    // across components, so the width is the maximum, not the sum.
    let component_of = components(g);
    let component_count = component_of.iter().copied().max().map_or(0, |c| c + 1);
    let mut parts: Vec<KExpression> = Vec::new();
    let mut node_order: Vec<NodeId> = Vec::new();

    for component in 0..component_count {
        let mut builder = ComponentBuilder::new(pending.clone());
        let mut cluster_ids: Vec<usize> = (0..cs.clusters.len())
            .filter(|&i| {
                let first = *cs.clusters[i].members.iter().next().expect("nonempty cluster");
                component_of[first] == component
            })
            .collect();
        cluster_ids.sort_by_key(|&i| cs.clusters[i].members.iter().next().copied());

        for index in cluster_ids {
            let members = &cs.clusters[index].members;
            // Shell first: externals flush early and release labels sooner.
            let (shell, bulk): (Vec<NodeId>, Vec<NodeId>) = members
                .iter()
                .copied()
                .partition(|u| pending.contains_key(u));
            for u in shell.into_iter().chain(bulk) {
                builder.add_node(u, Some(members));
            }
            builder.finish_cluster();
        }
        for &u in &cs.free_nodes {
            if component_of[u] == component {
                builder.add_node(u, None);
            }
        }

        if let Some(expression) = builder.expression {
            parts.push(expression);
            node_order.extend(builder.node_order);
        }
    }

    let expression = parts
        .into_iter()
        .reduce(|acc, part| KExpression::Union(Box::new(acc), Box::new(part)))
        .expect("nonempty graph yields at least one component");
    Ok(KExpressionBuild {
        expression,
        node_order,
    })
}

fn components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = next;
        while let Some(u) = stack.pop() {
            for v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    component
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn clique_edges(nodes: &[NodeId]) -> Vec<(NodeId, NodeId)> {
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                edges.push((u, v));
            }
        }
        edges
    }

    #[test]
    fn eval_single_seed() {
        let result = eval_k_expression(&KExpression::Seed(1)).unwrap();
        assert_eq!(result.graph.node_count(), 1);
        assert_eq!(result.graph.edge_count(), 0);
        assert_eq!(result.labels, vec![1]);
    }

    #[test]
    fn eval_join_makes_an_edge() {
        let e = KExpression::Join(
            Box::new(KExpression::Union(
                Box::new(KExpression::Seed(1)),
                Box::new(KExpression::Seed(2)),
            )),
            1,
            2,
        );
        let result = eval_k_expression(&e).unwrap();
        assert_eq!(result.graph.node_count(), 2);
        assert!(result.graph.has_edge(0, 1));
    }

    #[test]
    fn eval_rejects_self_join() {
        let e = KExpression::Join(Box::new(KExpression::Seed(1)), 1, 1);
        assert_eq!(eval_k_expression(&e).unwrap_err(), Error::JoinSameLabel(1));
    }

    #[test]
    fn clique_builds_with_two_labels() {
        let g = Graph::from_edges(4, &clique_edges(&[0, 1, 2, 3])).unwrap();
        let members: BTreeSet<NodeId> = (0..4).collect();
        let cs = ClusterSet::from_members(&g, vec![members]).unwrap();
        let build = build_k_expression(&g, &cs).unwrap();
        assert!(verify_round_trip(&g, &build).unwrap());
        assert_eq!(build.width(), 2);
    }

    #[test]
    fn two_triangles_with_bridge_need_three_labels() {
        let mut edges = clique_edges(&[0, 1, 2]);
        edges.extend(clique_edges(&[3, 4, 5]));
        edges.push((2, 3));
        let g = Graph::from_edges(6, &edges).unwrap();
        let cs = ClusterSet::from_members(
            &g,
            vec![(0..3).collect::<BTreeSet<_>>(), (3..6).collect()],
        )
        .unwrap();
        let build = build_k_expression(&g, &cs).unwrap();
        assert!(verify_round_trip(&g, &build).unwrap());
        assert_eq!(build.width(), 3);
        // delta=1 per cluster, n'=0: within the construction bound of 4.
        assert!(build.width() <= 1 * 2 + 0 + 2);
    }

    #[test]
    fn missing_links_are_rejected() {
        let edges: Vec<(NodeId, NodeId)> = clique_edges(&[0, 1, 2, 3])
            .into_iter()
            .filter(|&e| e != (0, 1))
            .collect();
        let g = Graph::from_edges(4, &edges).unwrap();
        let members: BTreeSet<NodeId> = (0..4).collect();
        let cs = ClusterSet::from_members(&g, vec![members]).unwrap();
        assert!(matches!(
            build_k_expression(&g, &cs).unwrap_err(),
            Error::MuNonZero {
                cluster_index: 0,
                missing: 1
            }
        ));
    }

    #[test]
    fn free_only_path_round_trips() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let cs = ClusterSet::from_members(&g, vec![]).unwrap();
        let build = build_k_expression(&g, &cs).unwrap();
        assert!(verify_round_trip(&g, &build).unwrap());
        assert!(build.width() <= 4 + 2);
        // An induced 4-path is never a cograph, so 3 labels are necessary.
        assert_eq!(build.width(), 3);
    }

    #[test]
    fn disjoint_cliques_reuse_labels_across_components() {
        let mut edges = clique_edges(&[0, 1, 2, 3]);
        edges.extend(clique_edges(&[4, 5, 6, 7]));
        let g = Graph::from_edges(8, &edges).unwrap();
        let cs = ClusterSet::from_members(
            &g,
            vec![(0..4).collect::<BTreeSet<_>>(), (4..8).collect()],
        )
        .unwrap();
        let build = build_k_expression(&g, &cs).unwrap();
        assert!(verify_round_trip(&g, &build).unwrap());
        assert_eq!(build.width(), 2);
    }
}
