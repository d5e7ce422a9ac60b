//! Hand-pinned fixture graphs with their reference walks, used by tests and
//! the command-line tool. The two lettered fixtures carry name tables so the
//! reference walks can be written in node names; `x` names the cluster node
//! of their naively coarsened variants.

use std::collections::BTreeSet;

use crate::coarsen::naive_coarsen;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Walk};

/// A reference walk spelled in node names.
#[derive(Debug, Clone)]
pub struct NamedWalk {
    pub name: &'static str,
    pub nodes: Vec<&'static str>,
}

/// A fixture graph plus its distinguished near-clique cluster and any
/// reference walks, on the graph itself and on its naive coarsening.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub graph: Graph,
    pub cluster: BTreeSet<NodeId>,
    pub walks: Vec<NamedWalk>,
    pub coarse_walks: Vec<NamedWalk>,
}

impl Fixture {
    /// Resolves one of the fixture's reference walks against a graph by node
    /// names (the fixture graph or its naive coarsening).
    pub fn resolve(&self, g: &Graph, walk: &NamedWalk) -> Result<Walk> {
        resolve_walk(g, &walk.nodes)
    }

    pub fn walk_named(&self, name: &str) -> Option<&NamedWalk> {
        self.walks
            .iter()
            .chain(self.coarse_walks.iter())
            .find(|w| w.name == name)
    }

    /// Naive coarsening of the fixture's cluster.
    pub fn naive(&self) -> Result<crate::coarsen::NaiveCoarsening> {
        naive_coarsen(&self.graph, &self.cluster)
    }
}

/// Turns a sequence of node names into a walk on a named graph.
pub fn resolve_walk(g: &Graph, names: &[&str]) -> Result<Walk> {
    let nodes = names
        .iter()
        .map(|name| {
            g.id_by_name(name)
                .ok_or_else(|| Error::Format(format!("unknown node name `{name}`")))
        })
        .collect::<Result<Vec<NodeId>>>()?;
    Ok(Walk::new(nodes))
}

fn named(names: &str) -> Vec<String> {
    names.split(',').map(str::to_owned).collect()
}

fn ids(g: &Graph, names: &[&str]) -> BTreeSet<NodeId> {
    names
        .iter()
        .map(|name| g.id_by_name(name).expect("fixture names are total"))
        .collect()
}

/// Fixture lookup by name: `fig2ab`, `fig2cd`, or `toy8`.
pub fn fixture_graph(name: &str) -> Result<Fixture> {
    match name {
        "fig2ab" => Ok(fig2ab()),
        "fig2cd" => Ok(fig2cd()),
        "toy8" => Ok(toy8()),
        other => Err(Error::UnknownFixture(other.to_owned())),
    }
}

pub const FIXTURE_NAMES: [&str; 3] = ["fig2ab", "fig2cd", "toy8"];

/// Ten nodes `a..j`; `{b,c,d,e}` is a clique hung into an outer ring.
fn fig2ab() -> Fixture {
    let names = named("a,b,c,d,e,f,g,h,i,j");
    let edge_names: [(&str, &str); 16] = [
        ("b", "c"),
        ("b", "d"),
        ("b", "e"),
        ("c", "d"),
        ("c", "e"),
        ("d", "e"),
        ("a", "b"),
        ("b", "f"),
        ("f", "g"),
        ("g", "h"),
        ("h", "c"),
        ("e", "i"),
        ("i", "j"),
        ("j", "a"),
        ("j", "f"),
        ("j", "h"),
    ];
    let graph = graph_from_names(names, &edge_names);
    let cluster = ids(&graph, &["b", "c", "d", "e"]);
    Fixture {
        name: "fig2ab",
        graph,
        cluster,
        walks: vec![NamedWalk {
            name: "W1",
            nodes: vec!["a", "b", "f", "g", "h", "c", "d", "e", "i", "j", "a"],
        }],
        coarse_walks: vec![
            NamedWalk {
                name: "W'1",
                nodes: vec!["a", "x", "f", "g", "h", "x", "i", "j", "a"],
            },
            NamedWalk {
                name: "W'2",
                nodes: vec!["a", "j", "f", "g", "h", "j", "i", "x", "a"],
            },
        ],
    }
}

/// Fifteen nodes `a..n,p`; `{e,f,g,h}` is a clique joining three arms.
fn fig2cd() -> Fixture {
    let names = named("a,b,c,d,e,f,g,h,i,j,k,l,m,n,p");
    let edge_names: [(&str, &str); 21] = [
        ("e", "f"),
        ("e", "g"),
        ("e", "h"),
        ("f", "g"),
        ("f", "h"),
        ("g", "h"),
        ("a", "b"),
        ("b", "c"),
        ("c", "d"),
        ("d", "e"),
        ("h", "i"),
        ("i", "j"),
        ("j", "k"),
        ("k", "l"),
        ("l", "a"),
        ("a", "m"),
        ("m", "n"),
        ("n", "p"),
        ("p", "f"),
        ("g", "a"),
        ("l", "i"),
    ];
    let graph = graph_from_names(names, &edge_names);
    let cluster = ids(&graph, &["e", "f", "g", "h"]);
    Fixture {
        name: "fig2cd",
        graph,
        cluster,
        walks: vec![NamedWalk {
            name: "W1",
            nodes: vec![
                "a", "b", "c", "d", "e", "h", "i", "j", "k", "l", "a", "m", "n", "p", "f", "g",
                "a",
            ],
        }],
        coarse_walks: vec![
            NamedWalk {
                name: "W'1",
                nodes: vec![
                    "a", "b", "c", "d", "x", "i", "j", "k", "l", "a", "m", "n", "p", "x", "a",
                ],
            },
            NamedWalk {
                name: "W'2",
                nodes: vec![
                    "a", "b", "c", "d", "x", "i", "j", "k", "l", "i", "x", "p", "n", "m", "a",
                ],
            },
        ],
    }
}

/// K6 on `{0..5}` with a two-node handle: edges (0,6), (1,7), (6,7).
fn toy8() -> Fixture {
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for u in 0..6 {
        for v in (u + 1)..6 {
            edges.push((u, v));
        }
    }
    edges.extend([(0, 6), (1, 7), (6, 7)]);
    let graph = Graph::from_edges(8, &edges).expect("toy8 edge list is valid");
    Fixture {
        name: "toy8",
        graph,
        cluster: (0..6).collect(),
        walks: vec![],
        coarse_walks: vec![],
    }
}

fn graph_from_names(names: Vec<String>, edge_names: &[(&str, &str)]) -> Graph {
    let index = |name: &str| {
        names
            .iter()
            .position(|candidate| candidate == name)
            .expect("fixture edge endpoints are named")
    };
    let edges: Vec<(NodeId, NodeId)> = edge_names
        .iter()
        .map(|&(u, v)| (index(u), index(v)))
        .collect();
    Graph::from_edges(names.len(), &edges)
        .expect("fixture edge list is valid")
        .with_names(names)
        .expect("fixture names are total")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_closed_walk;

    #[test]
    fn fig2ab_metrics() {
        let fixture = fixture_graph("fig2ab").unwrap();
        assert_eq!(fixture.graph.node_count(), 10);
        assert_eq!(fixture.graph.edge_count(), 16);
        let (external, missing) =
            crate::cluster::cluster_stats(&fixture.graph, &fixture.cluster).unwrap();
        assert_eq!((external, missing), (4, 0));
    }

    #[test]
    fn fig2ab_reference_walk_is_valid() {
        let fixture = fixture_graph("fig2ab").unwrap();
        let walk = fixture
            .resolve(&fixture.graph, fixture.walk_named("W1").unwrap())
            .unwrap();
        let report = validate_closed_walk(&fixture.graph, &walk).unwrap();
        assert!(report.is_hamiltonian_walk_candidate);
        assert_eq!(report.length, 10);
    }

    #[test]
    fn fig2ab_coarse_walks_are_valid() {
        let fixture = fixture_graph("fig2ab").unwrap();
        let nc = fixture.naive().unwrap();
        assert_eq!(nc.graph.node_count(), 7);
        let x = nc.cluster_node;
        let x_neighbors: BTreeSet<NodeId> = nc.graph.neighbors(x).collect();
        let expected: BTreeSet<NodeId> = ["a", "f", "h", "i"]
            .iter()
            .map(|name| nc.graph.id_by_name(name).unwrap())
            .collect();
        assert_eq!(x_neighbors, expected);
        for coarse_walk in &fixture.coarse_walks {
            let walk = fixture.resolve(&nc.graph, coarse_walk).unwrap();
            let report = validate_closed_walk(&nc.graph, &walk).unwrap();
            assert!(report.is_hamiltonian_walk_candidate, "{}", coarse_walk.name);
            assert_eq!(report.length, 8);
        }
    }

    #[test]
    fn fig2cd_metrics_and_walks() {
        let fixture = fixture_graph("fig2cd").unwrap();
        assert_eq!(fixture.graph.node_count(), 15);
        assert_eq!(fixture.graph.edge_count(), 21);
        let walk = fixture
            .resolve(&fixture.graph, fixture.walk_named("W1").unwrap())
            .unwrap();
        let report = validate_closed_walk(&fixture.graph, &walk).unwrap();
        assert!(report.is_hamiltonian_walk_candidate);
        assert_eq!(report.length, 16);

        let nc = fixture.naive().unwrap();
        assert_eq!(nc.graph.node_count(), 12);
        let x_neighbors: BTreeSet<NodeId> = nc.graph.neighbors(nc.cluster_node).collect();
        let expected: BTreeSet<NodeId> = ["a", "d", "i", "p"]
            .iter()
            .map(|name| nc.graph.id_by_name(name).unwrap())
            .collect();
        assert_eq!(x_neighbors, expected);
        for coarse_walk in &fixture.coarse_walks {
            let walk = fixture.resolve(&nc.graph, coarse_walk).unwrap();
            let report = validate_closed_walk(&nc.graph, &walk).unwrap();
            assert!(report.is_hamiltonian_walk_candidate, "{}", coarse_walk.name);
        }
    }

    #[test]
    fn unknown_fixture_errors() {
        assert!(matches!(
            fixture_graph("fig9"),
            Err(Error::UnknownFixture(_))
        ));
    }
}
