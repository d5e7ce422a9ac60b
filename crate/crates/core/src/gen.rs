//! Seeded graph-family generators that retain the planted ground truth.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::ClusterSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// How planted clusters are wired together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// One bridge between consecutive clusters around a cycle; two clusters
    /// degenerate to a single bridge, one cluster to none.
    Ring,
    /// Random tree over clusters, respecting each cluster's external budget.
    RandomTree,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Ring => "ring",
            Topology::RandomTree => "tree",
        }
    }
}

/// Parameters a planted instance was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedParams {
    pub n_c: usize,
    pub m: usize,
    pub delta: usize,
    pub mu: usize,
    pub seed: u64,
    pub topology: Topology,
}

/// A generated graph together with the planted clustering.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub truth: ClusterSet,
    pub params: PlantedParams,
}

impl PlantedInstance {
    pub fn n(&self) -> usize {
        self.graph.node_count()
    }
}

/// Generates `n_c` cliques of size `m`, removes `mu` internal edges per
/// cluster, and wires clusters with at most `delta` external edges each.
///
/// Cluster `i` occupies ids `[i*m, (i+1)*m)`. Bridge endpoints are drawn
/// without replacement inside each cluster, so every bridge touches a
/// distinct member and the shell size equals the number of incident bridges
/// plus the endpoints of removed edges.
pub fn gen_planted(
    n_c: usize,
    m: usize,
    delta: usize,
    mu: usize,
    seed: u64,
    topology: Topology,
) -> Result<PlantedInstance> {
    if n_c < 1 {
        return Err(Error::ParamsInfeasible("need at least one cluster".into()));
    }
    if m <= 2 * (delta + 2 * mu) {
        return Err(Error::ParamsInfeasible(format!(
            "cluster size {m} must exceed 2*(delta + 2*mu) = {}",
            2 * (delta + 2 * mu)
        )));
    }
    match topology {
        Topology::Ring if delta < 2 => {
            return Err(Error::ParamsInfeasible(
                "ring topology requires delta >= 2".into(),
            ));
        }
        Topology::RandomTree if n_c >= 2 && delta == 0 => {
            return Err(Error::ParamsInfeasible(
                "connecting clusters requires delta >= 1".into(),
            ));
        }
        Topology::RandomTree if n_c >= 3 && delta == 1 => {
            return Err(Error::ParamsInfeasible(
                "a tree over 3+ clusters requires delta >= 2".into(),
            ));
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_c * m;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

    let mut removed: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for cluster in 0..n_c {
        let base = cluster * m;
        if mu > 0 {
            let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(m * (m - 1) / 2);
            for a in 0..m {
                for b in (a + 1)..m {
                    pairs.push((base + a, base + b));
                }
            }
            removed.extend(pairs.choose_multiple(&mut rng, mu).copied());
        }
        for a in 0..m {
            for b in (a + 1)..m {
                let edge = (base + a, base + b);
                if !removed.contains(&edge) {
                    edges.push(edge);
                }
            }
        }
    }

    let bridges: Vec<(usize, usize)> = match topology {
        Topology::Ring => match n_c {
            1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n_c).map(|i| (i, (i + 1) % n_c)).collect(),
        },
        Topology::RandomTree => {
            let mut cluster_degree = vec![0usize; n_c];
            let mut bridges = Vec::with_capacity(n_c.saturating_sub(1));
            for child in 1..n_c {
                let eligible: Vec<usize> = (0..child)
                    .filter(|&candidate| cluster_degree[candidate] < delta)
                    .collect();
                let parent = *eligible
                    .as_slice()
                    .choose(&mut rng)
                    .ok_or_else(|| Error::ParamsInfeasible("cluster degree budget exhausted".into()))?;
                cluster_degree[parent] += 1;
                cluster_degree[child] += 1;
                bridges.push((parent.min(child), parent.max(child)));
            }
            bridges
        }
    };

    // One endpoint deck per cluster, drawn without replacement.
    let mut decks: Vec<Vec<NodeId>> = (0..n_c)
        .map(|cluster| {
            let mut members: Vec<NodeId> = (cluster * m..(cluster + 1) * m).collect();
            members.shuffle(&mut rng);
            members
        })
        .collect();
    let mut sorted_bridges = bridges;
    sorted_bridges.sort();
    for (a, b) in sorted_bridges {
        let u = decks[a].pop().expect("cluster larger than its bridge count");
        let v = decks[b].pop().expect("cluster larger than its bridge count");
        edges.push((u.min(v), u.max(v)));
    }

    let graph = Graph::from_edges(n, &edges)?;
    let member_sets: Vec<BTreeSet<NodeId>> = (0..n_c)
        .map(|cluster| (cluster * m..(cluster + 1) * m).collect())
        .collect();
    let truth = ClusterSet::from_members(&graph, member_sets)?;

    Ok(PlantedInstance {
        graph,
        truth,
        params: PlantedParams {
            n_c,
            m,
            delta,
            mu,
            seed,
            topology,
        },
    })
}

/// Family whose cluster count grows with the logarithm of the target size:
/// `n_c = max(1, round(c * log2 n))`, `m = round(n / n_c)`.
pub fn gen_log_family(
    n_target: usize,
    c: f64,
    delta: usize,
    mu: usize,
    seed: u64,
) -> Result<PlantedInstance> {
    if n_target < 2 {
        return Err(Error::ParamsInfeasible("target size must be at least 2".into()));
    }
    let n_c = ((c * (n_target as f64).log2()).round() as usize).max(1);
    let m = ((n_target as f64) / (n_c as f64)).round() as usize;
    gen_planted(n_c, m, delta, mu, seed, Topology::Ring)
}

/// Seeded random connected graph: a random attachment tree plus each extra
/// pair independently with probability `extra_edge_prob`.
pub fn gen_random_connected(n: usize, extra_edge_prob: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::ParamsInfeasible("need at least one node".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        edges.insert((parent, v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !edges.contains(&(u, v)) && rng.gen_bool(extra_edge_prob) {
                edges.insert((u, v));
            }
        }
    }
    let edge_list: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
    Graph::from_edges(n, &edge_list)
}
