//! Exact shortest-covering-walk solvers: subset dynamic programming over the
//! metric closure, an independent search-based oracle, and the
//! detect-coarsen-solve-expand pipeline.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::cluster::{detect_clusters, ClusterParams, DetectionMode};
use crate::coarsen::{coarsen_with, naive_coarsen, CoarsePlan, NaiveCoarsening, SecondShellRule};
use crate::error::{Error, Result};
use crate::graph::{metric_closure, validate_closed_walk, Graph, NodeId, Walk};

/// Default cap for the subset DP; ~n*2^n u16 states.
pub const DEFAULT_NODE_LIMIT: usize = 22;
/// Default cap for the search oracle; ~n*2^n u32 states.
pub const DEFAULT_ORACLE_LIMIT: usize = 16;

/// Wall-clock durations of the pipeline stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub detect: Duration,
    pub coarsen: Duration,
    pub solve: Duration,
    pub normalize: Duration,
    pub expand: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.detect + self.coarsen + self.solve + self.normalize + self.expand
    }
}

/// Length bookkeeping across the pipeline: walk length on the coarse graph
/// and the growth added back by bulk expansion.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageLog {
    pub coarse_walk_length: usize,
    pub bulk_growth: usize,
}

/// A solved instance: an optimal closed covering walk plus diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub walk: Walk,
    pub length: usize,
    pub coarse_nodes: usize,
    pub timings: StageTimings,
    pub stage_log: StageLog,
}

fn ensure_solvable(g: &Graph, node_limit: usize) -> Result<()> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Format("cannot solve on an empty graph".into()));
    }
    if n > node_limit {
        return Err(Error::InstanceTooLarge { n, limit: node_limit });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Lexicographically smallest shortest path from `u` to `v`, as node ids
/// including both endpoints.
fn lex_shortest_path(
    g: &Graph,
    dist: &crate::graph::DistanceMatrix,
    u: NodeId,
    v: NodeId,
) -> Vec<NodeId> {
    let mut path = vec![u];
    let mut current = u;
    while current != v {
        let remaining = dist.dist(current, v);
        let next = g
            .neighbors(current)
            .find(|&w| dist.dist(w, v) + 1 == remaining)
            .expect("finite distance implies a descending neighbor");
        path.push(next);
        current = next;
    }
    path
}

/// Exact solver: subset DP over the metric closure with start fixed at node
/// 0, ties broken toward smaller ids, then tour stops spliced back into a
/// real walk along lexicographically smallest shortest paths.
pub fn solve_exact(g: &Graph, node_limit: usize) -> Result<Solution> {
    ensure_solvable(g, node_limit)?;
    let started = Instant::now();
    let n = g.node_count();

    if n == 1 {
        return Ok(Solution {
            walk: Walk::new(vec![0]),
            length: 0,
            coarse_nodes: 1,
            timings: StageTimings {
                solve: started.elapsed(),
                ..StageTimings::default()
            },
            stage_log: StageLog::default(),
        });
    }

    let dist = metric_closure(g);
    let d = |u: NodeId, v: NodeId| dist.dist(u, v) as u32;

    const UNSET: u16 = u16::MAX;
    let full: usize = (1 << n) - 1;
    let mut dp = vec![UNSET; (full + 1) * n];
    dp[n] = 0; // mask {0}, last 0

    for mask in 1..=full {
        if mask & 1 == 0 {
            continue;
        }
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cost = dp[mask * n + last];
            if cost == UNSET {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let extended = cost + d(last, next) as u16;
                let slot = &mut dp[(mask | (1 << next)) * n + next];
                if extended < *slot {
                    *slot = extended;
                }
            }
        }
    }

    let mut best_last = 0;
    let mut best_cost = u32::MAX;
    for last in 0..n {
        let cost = dp[full * n + last];
        if cost == UNSET {
            continue;
        }
        let closed = cost as u32 + d(last, 0);
        if closed < best_cost {
            best_cost = closed;
            best_last = last;
        }
    }

    // Recover the first-visit order by walking the DP table backwards,
    // preferring the smallest predecessor id.
    let mut stops_reversed = vec![best_last];
    let mut mask = full;
    let mut current = best_last;
    while mask != 1 {
        let previous_mask = mask & !(1 << current);
        let target = dp[mask * n + current];
        let predecessor = (0..n)
            .find(|&p| {
                previous_mask & (1 << p) != 0
                    && dp[previous_mask * n + p] != UNSET
                    && dp[previous_mask * n + p] + d(p, current) as u16 == target
            })
            .expect("DP table admits a predecessor");
        stops_reversed.push(predecessor);
        mask = previous_mask;
        current = predecessor;
    }
    let stops: Vec<NodeId> = stops_reversed.into_iter().rev().collect();
    debug_assert_eq!(stops[0], 0);

    let mut nodes = vec![0];
    for i in 0..stops.len() {
        let from = stops[i];
        let to = stops[(i + 1) % stops.len()];
        nodes.extend_from_slice(&lex_shortest_path(g, &dist, from, to)[1..]);
    }
    let walk = Walk::new(nodes);
    debug_assert_eq!(walk.length(), best_cost as usize);

    Ok(Solution {
        length: walk.length(),
        walk,
        coarse_nodes: n,
        timings: StageTimings {
            solve: started.elapsed(),
            ..StageTimings::default()
        },
        stage_log: StageLog {
            coarse_walk_length: best_cost as usize,
            bulk_growth: 0,
        },
    })
}

/// Independent oracle: breadth-first search over `(current node, visited
/// set)` states on the raw graph, start and finish fixed at node 0.
pub fn oracle_walk_length(g: &Graph, node_limit: usize) -> Result<usize> {
    ensure_solvable(g, node_limit)?;
    let n = g.node_count();
    if n == 1 {
        return Ok(0);
    }
    let full: usize = (1 << n) - 1;
    let mut dist = vec![u32::MAX; (full + 1) * n];
    let start = n; // mask {0}, node 0
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let goal = full * n + 0;
    while let Some(state) = queue.pop_front() {
        if state == goal {
            return Ok(dist[state] as usize);
        }
        let node = state % n;
        let mask = state / n;
        let next_dist = dist[state] + 1;
        for neighbor in g.neighbors(node) {
            let next_state = (mask | (1 << neighbor)) * n + neighbor;
            if dist[next_state] == u32::MAX {
                dist[next_state] = next_dist;
                queue.push_back(next_state);
            }
        }
    }
    Err(Error::Disconnected)
}

fn rotate_to_non_bulk(plan: &CoarsePlan, w: &Walk) -> Walk {
    if w.length() == 0 || !plan.is_bulk(w.nodes[0]) {
        return w.clone();
    }
    let at = w.nodes[..w.nodes.len() - 1]
        .iter()
        .position(|&u| !plan.is_bulk(u))
        .expect("coarse walks visit at least one survivor");
    w.rotate_to(at)
}

fn bulk_visit_counts(plan: &CoarsePlan, nodes: &[NodeId]) -> Vec<usize> {
    let mut counts = vec![0usize; plan.records.len()];
    for &u in &nodes[..nodes.len().saturating_sub(1)] {
        if let Some(index) = plan.bulk_index(u) {
            counts[index] += 1;
        }
    }
    counts
}

/// Rewrites a covering closed walk of the coarse graph so that every bulk
/// node is visited exactly once, never increasing the length.
///
/// The first visit to each bulk node is kept. Every later visit `x b y` has
/// both flanks in the shell or second shell of `b`'s cluster and is rewritten
/// by case: equal flanks collapse to one, two distinct shell flanks are
/// bridged through the lowest second-shell node, and every other combination
/// drops `b` outright.
pub fn normalize_bulk_visits(plan: &CoarsePlan, w: &Walk) -> Result<Walk> {
    let report = validate_closed_walk(&plan.coarse_graph, w)?;
    if !report.is_closed || !report.all_steps_are_edges || !report.covers_all_nodes {
        return Err(Error::NotACoarseWalk(format!(
            "closed={} steps={} covers={}",
            report.is_closed, report.all_steps_are_edges, report.covers_all_nodes
        )));
    }
    if plan.records.is_empty() {
        return Ok(w.clone());
    }

    let mut walk = rotate_to_non_bulk(plan, w);
    loop {
        let counts = bulk_visit_counts(plan, &walk.nodes);
        let Some(over_visited) = counts.iter().position(|&c| c > 1) else {
            return Ok(walk);
        };
        let record = &plan.records[over_visited];
        let bulk = record.bulk_node;
        let second_occurrence = walk
            .nodes
            .iter()
            .enumerate()
            .filter(|&(_, &u)| u == bulk)
            .nth(1)
            .map(|(i, _)| i)
            .expect("over-visited bulk has a second occurrence");

        let i = second_occurrence;
        let flank_original = |coarse: NodeId| -> Result<NodeId> {
            match plan.provenance(coarse) {
                crate::coarsen::CoarseNode::Survivor(orig)
                    if record.shell.contains(&orig) || record.second_shell.contains(&orig) =>
                {
                    Ok(orig)
                }
                _ => Err(Error::FlankNotInCluster { node: coarse, bulk }),
            }
        };
        let x = flank_original(walk.nodes[i - 1])?;
        let y = flank_original(walk.nodes[i + 1])?;
        let x_shell = record.shell.contains(&x);
        let y_shell = record.shell.contains(&y);

        if x == y {
            // x b x -> x, for shell and second shell alike.
            walk.nodes.drain(i..=i + 1);
        } else if x_shell && y_shell {
            // x b y -> x t y through the lowest second-shell node.
            let t = *record
                .second_shell
                .iter()
                .next()
                .expect("coarsenable clusters have a nonempty second shell");
            walk.nodes[i] = plan
                .to_coarse(t)
                .expect("second-shell nodes survive coarsening");
        } else {
            // At least one second-shell flank: the flanks are adjacent.
            walk.nodes.remove(i);
        }
    }
}

/// Replaces the unique visit to each bulk node by the members of its good
/// bulk in ascending id order, producing a walk on the original graph.
pub fn expand_walk(g: &Graph, plan: &CoarsePlan, w_coarse: &Walk) -> Result<Walk> {
    if w_coarse.nodes.is_empty() {
        return Err(Error::EmptyWalk);
    }
    let report = validate_closed_walk(&plan.coarse_graph, w_coarse)?;
    if !report.is_closed || !report.all_steps_are_edges {
        return Err(Error::NotACoarseWalk(format!(
            "closed={} steps={}",
            report.is_closed, report.all_steps_are_edges
        )));
    }
    for (index, count) in bulk_visit_counts(plan, &w_coarse.nodes).iter().enumerate() {
        if *count != 1 {
            return Err(Error::BulkVisitedNotOnce {
                bulk: plan.records[index].bulk_node,
                count: *count,
            });
        }
    }
    if w_coarse.length() == 0 && !plan.records.is_empty() {
        return Err(Error::NotACoarseWalk(
            "zero-length walk cannot carry a bulk visit".into(),
        ));
    }

    let walk = rotate_to_non_bulk(plan, w_coarse);
    let mut nodes: Vec<NodeId> = Vec::with_capacity(walk.nodes.len() + plan.bulk_extra());
    for (i, &coarse) in walk.nodes.iter().enumerate() {
        match plan.provenance(coarse) {
            crate::coarsen::CoarseNode::Survivor(original) => nodes.push(original),
            crate::coarsen::CoarseNode::Bulk(index) => {
                let record = &plan.records[index];
                for flank in [walk.nodes[i - 1], walk.nodes[i + 1]] {
                    let ok = matches!(
                        plan.provenance(flank),
                        crate::coarsen::CoarseNode::Survivor(orig)
                            if record.members.contains(&orig)
                    );
                    if !ok {
                        return Err(Error::FlankNotInCluster {
                            node: flank,
                            bulk: coarse,
                        });
                    }
                }
                nodes.extend(record.good_bulk.iter().copied());
            }
        }
    }
    let expanded = Walk::new(nodes);
    debug_assert_eq!(expanded.length(), walk.length() + plan.bulk_extra());
    Ok(expanded)
}

/// Options for the coarsening pipeline.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub params: ClusterParams,
    pub mode: DetectionMode,
    pub seed: u64,
    /// Held-Karp cap applied to the coarse graph.
    pub node_limit: usize,
    pub second_shell: SecondShellRule,
}

impl PipelineOptions {
    pub fn new(params: ClusterParams) -> Self {
        PipelineOptions {
            params,
            mode: DetectionMode::Greedy,
            seed: 0,
            node_limit: DEFAULT_NODE_LIMIT,
            second_shell: SecondShellRule::LowestIds,
        }
    }
}

fn trivial_complete_solution(g: &Graph, detect_time: Duration) -> Solution {
    let n = g.node_count();
    let nodes: Vec<NodeId> = match n {
        1 => vec![0],
        2 => vec![0, 1, 0],
        _ => (0..n).chain([0]).collect(),
    };
    let walk = Walk::new(nodes);
    let length = walk.length();
    Solution {
        walk,
        length,
        coarse_nodes: n,
        timings: StageTimings {
            detect: detect_time,
            ..StageTimings::default()
        },
        stage_log: StageLog {
            coarse_walk_length: length,
            bulk_growth: 0,
        },
    }
}

/// Full pipeline: detect clusters, contract their interiors, solve exactly on
/// the coarse graph, normalize bulk visits, and expand back to the original
/// graph. The result length equals the coarse optimum plus the total bulk
/// growth.
///
/// Complete graphs are answered directly: no proper subset of a complete
/// graph is ever coarsenable, and contracting the whole graph to a single
/// isolated node would lose the cost of closing the tour.
pub fn solve_pipeline(g: &Graph, opts: &PipelineOptions) -> Result<Solution> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Format("cannot solve on an empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }

    let detect_started = Instant::now();
    if g.is_complete() {
        return Ok(trivial_complete_solution(g, detect_started.elapsed()));
    }
    let clusters = detect_clusters(g, opts.params, opts.mode, opts.seed)?;
    let detect = detect_started.elapsed();

    let coarsen_started = Instant::now();
    let plan = coarsen_with(g, &clusters, opts.second_shell)?;
    let coarsen_time = coarsen_started.elapsed();

    let coarse_n = plan.coarse_graph.node_count();
    if coarse_n > opts.node_limit {
        return Err(Error::InstanceTooLarge {
            n: coarse_n,
            limit: opts.node_limit,
        });
    }

    let coarse_solution = solve_exact(&plan.coarse_graph, opts.node_limit)?;

    let normalize_started = Instant::now();
    let normalized = normalize_bulk_visits(&plan, &coarse_solution.walk)?;
    let normalize_time = normalize_started.elapsed();
    debug_assert_eq!(normalized.length(), coarse_solution.length);

    let expand_started = Instant::now();
    let walk = expand_walk(g, &plan, &normalized)?;
    let expand_time = expand_started.elapsed();

    let report = validate_closed_walk(g, &walk)?;
    if !report.is_hamiltonian_walk_candidate {
        return Err(Error::InvariantViolation(format!(
            "pipeline produced an invalid walk: closed={} steps={} covers={}",
            report.is_closed, report.all_steps_are_edges, report.covers_all_nodes
        )));
    }
    let expected = normalized.length() + plan.bulk_extra();
    if walk.length() != expected {
        return Err(Error::InvariantViolation(format!(
            "expansion length {} differs from coarse {} + growth {}",
            walk.length(),
            normalized.length(),
            plan.bulk_extra()
        )));
    }

    Ok(Solution {
        length: walk.length(),
        walk,
        coarse_nodes: coarse_n,
        timings: StageTimings {
            detect,
            coarsen: coarsen_time,
            solve: coarse_solution.timings.solve,
            normalize: normalize_time,
            expand: expand_time,
        },
        stage_log: StageLog {
            coarse_walk_length: normalized.length(),
            bulk_growth: plan.bulk_extra(),
        },
    })
}

/// Searches for an expansion of a walk on a naively coarsened graph that
/// replaces the visits to the cluster node by sequences of cluster members,
/// each member used exactly once, every step an edge of `g`.
///
/// Success yields a walk of length `w.length() + |members| - occurrences`.
pub fn find_local_expansion(
    g: &Graph,
    nc: &NaiveCoarsening,
    w: &Walk,
) -> Result<Option<Walk>> {
    let report = validate_closed_walk(&nc.graph, w)?;
    if !report.is_closed || !report.all_steps_are_edges {
        return Err(Error::NotACoarseWalk(format!(
            "closed={} steps={}",
            report.is_closed, report.all_steps_are_edges
        )));
    }
    let occurrences_total = w.nodes[..w.nodes.len() - 1]
        .iter()
        .filter(|&&u| u == nc.cluster_node)
        .count();
    if occurrences_total == 0 {
        return Err(Error::ClusterNodeAbsentFromWalk);
    }

    let walk = if w.nodes[0] == nc.cluster_node {
        let at = w.nodes[..w.nodes.len() - 1]
            .iter()
            .position(|&u| u != nc.cluster_node)
            .ok_or(Error::NotACoarseWalk("walk never leaves the cluster node".into()))?;
        w.rotate_to(at)
    } else {
        w.clone()
    };

    // Flanking original nodes of each cluster-node occurrence.
    let mut occurrences: Vec<(NodeId, NodeId)> = Vec::new();
    for (i, &u) in walk.nodes.iter().enumerate() {
        if u == nc.cluster_node {
            let prev = nc
                .to_original(walk.nodes[i - 1])
                .expect("cluster node has no self-edges");
            let next = nc
                .to_original(walk.nodes[i + 1])
                .expect("cluster node has no self-edges");
            occurrences.push((prev, next));
        }
    }

    let members: Vec<NodeId> = nc.members.iter().copied().collect();
    let mut used = vec![false; members.len()];
    let mut sequences: Vec<Vec<NodeId>> = vec![Vec::new(); occurrences.len()];

    fn assign(
        g: &Graph,
        members: &[NodeId],
        occurrences: &[(NodeId, NodeId)],
        used: &mut [bool],
        sequences: &mut [Vec<NodeId>],
        occurrence: usize,
        remaining: usize,
    ) -> bool {
        if occurrence == occurrences.len() {
            return remaining == 0;
        }
        // Every later occurrence still needs at least one member.
        if remaining < occurrences.len() - occurrence {
            return false;
        }
        let (enter, exit) = occurrences[occurrence];
        extend(
            g, members, occurrences, used, sequences, occurrence, remaining, enter, exit,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        g: &Graph,
        members: &[NodeId],
        occurrences: &[(NodeId, NodeId)],
        used: &mut [bool],
        sequences: &mut [Vec<NodeId>],
        occurrence: usize,
        remaining: usize,
        at: NodeId,
        exit: NodeId,
    ) -> bool {
        let nonempty = !sequences[occurrence].is_empty();
        if nonempty && g.has_edge(at, exit) {
            if assign(
                g,
                members,
                occurrences,
                used,
                sequences,
                occurrence + 1,
                remaining,
            ) {
                return true;
            }
        }
        for (index, &member) in members.iter().enumerate() {
            if used[index] || !g.has_edge(at, member) {
                continue;
            }
            used[index] = true;
            sequences[occurrence].push(member);
            if extend(
                g,
                members,
                occurrences,
                used,
                sequences,
                occurrence,
                remaining - 1,
                member,
                exit,
            ) {
                return true;
            }
            sequences[occurrence].pop();
            used[index] = false;
        }
        false
    }

    let found = assign(
        g,
        &members,
        &occurrences,
        &mut used,
        &mut sequences,
        0,
        members.len(),
    );
    if !found {
        return Ok(None);
    }

    let mut nodes: Vec<NodeId> = Vec::with_capacity(walk.nodes.len() + members.len());
    let mut next_sequence = sequences.into_iter();
    for &u in &walk.nodes {
        if u == nc.cluster_node {
            nodes.extend(next_sequence.next().expect("one sequence per occurrence"));
        } else {
            nodes.push(nc.to_original(u).expect("survivor"));
        }
    }
    let expanded = Walk::new(nodes);
    debug_assert_eq!(
        expanded.length(),
        walk.length() + members.len() - occurrences_total
    );
    Ok(Some(expanded))
}

/// True iff the cluster-node visits of `w` can be replaced by the cluster's
/// own nodes, each used exactly once, yielding a closed walk of `g` of length
/// `w.length() + |members| - occurrences`. Exhaustive over ordered set
/// partitions of the cluster.
pub fn check_local_expandability(g: &Graph, nc: &NaiveCoarsening, w: &Walk) -> Result<bool> {
    Ok(find_local_expansion(g, nc, w)?.is_some())
}

/// Small-parameter fast path: contract whole clusters to single nodes, solve
/// exactly, and undo each contraction by exhaustive local expansion. Intended
/// for `delta <= 2`, `mu = 0`; expansion may be impossible for clusters with
/// a single external neighbor, which is reported as an input error.
pub fn solve_naive(
    g: &Graph,
    params: ClusterParams,
    mode: DetectionMode,
    seed: u64,
    node_limit: usize,
) -> Result<Solution> {
    if params.mu != 0 {
        return Err(Error::Format("naive contraction requires mu = 0".into()));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Format("cannot solve on an empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }

    let detect_started = Instant::now();
    if g.is_complete() {
        return Ok(trivial_complete_solution(g, detect_started.elapsed()));
    }
    let clusters = detect_clusters(g, params, mode, seed)?;
    let detect = detect_started.elapsed();

    let coarsen_started = Instant::now();
    let mut member_sets = clusters.member_sets();
    member_sets.sort_by_key(|members| members.iter().next().copied());

    // Contract one cluster at a time; node ids shift after each contraction.
    let mut stages: Vec<(Graph, NaiveCoarsening)> = Vec::new();
    let mut current = g.clone();
    let mut to_current: Vec<Option<NodeId>> = (0..n).map(Some).collect();
    for members in &member_sets {
        let translated = members
            .iter()
            .map(|&u| to_current[u].expect("clusters are disjoint"))
            .collect();
        let nc = naive_coarsen(&current, &translated)?;
        for slot in to_current.iter_mut() {
            *slot = slot.and_then(|u| nc.to_coarse(u));
        }
        let next = nc.graph.clone();
        stages.push((current, nc));
        current = next;
    }
    let coarsen_time = coarsen_started.elapsed();

    let coarse_nodes = current.node_count();
    let coarse_solution = solve_exact(&current, node_limit)?;
    let coarse_length = coarse_solution.length;

    let expand_started = Instant::now();
    let mut walk = coarse_solution.walk;
    for (previous, nc) in stages.iter().rev() {
        walk = find_local_expansion(previous, nc, &walk)?.ok_or_else(|| {
            Error::Format(
                "naive expansion failed; rerun without the naive fast path".into(),
            )
        })?;
    }
    let expand_time = expand_started.elapsed();

    let report = validate_closed_walk(g, &walk)?;
    if !report.is_hamiltonian_walk_candidate {
        return Err(Error::InvariantViolation(
            "naive pipeline produced an invalid walk".into(),
        ));
    }

    Ok(Solution {
        length: walk.length(),
        walk,
        coarse_nodes,
        timings: StageTimings {
            detect,
            coarsen: coarsen_time,
            solve: coarse_solution.timings.solve,
            expand: expand_time,
            ..StageTimings::default()
        },
        stage_log: StageLog {
            coarse_walk_length: coarse_length,
            bulk_growth: walk.length() - coarse_length,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterSet;
    use crate::coarsen::coarsen;
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

    fn toy8() -> Graph {
        let mut edges = clique_edges(&[0, 1, 2, 3, 4, 5]);
        edges.extend([(0, 6), (1, 7), (6, 7)]);
        Graph::from_edges(8, &edges).unwrap()
    }

    fn toy8_plan() -> (Graph, CoarsePlan) {
        let g = toy8();
        let members: BTreeSet<NodeId> = (0..6).collect();
        let cs = ClusterSet::from_members(&g, vec![members]).unwrap();
        let plan = coarsen(&g, &cs).unwrap();
        (g, plan)
    }

    #[test]
    fn exact_on_path_traverses_twice() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let solution = solve_exact(&g, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(solution.length, 4);
        assert_eq!(solution.walk.nodes, vec![0, 1, 2, 1, 0]);
    }

    #[test]
    fn exact_rejects_disconnected_and_large() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(solve_exact(&g, 22).unwrap_err(), Error::Disconnected);
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            solve_exact(&g, 2).unwrap_err(),
            Error::InstanceTooLarge { n: 3, limit: 2 }
        ));
    }

    #[test]
    fn oracle_small_cases() {
        let k3 = Graph::from_edges(3, &clique_edges(&[0, 1, 2])).unwrap();
        assert_eq!(oracle_walk_length(&k3, 16).unwrap(), 3);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(oracle_walk_length(&star, 16).unwrap(), 6);
        let single = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(oracle_walk_length(&single, 16).unwrap(), 0);
    }

    #[test]
    fn oracle_matches_exact_on_toy8() {
        let g = toy8();
        assert_eq!(oracle_walk_length(&g, 16).unwrap(), 8);
        assert_eq!(solve_exact(&g, 22).unwrap().length, 8);
    }

    #[test]
    fn coarse_toy8_has_short_solution() {
        let (_, plan) = toy8_plan();
        assert_eq!(plan.coarse_graph.node_count(), 7);
        let solution = solve_exact(&plan.coarse_graph, 22).unwrap();
        assert_eq!(solution.length, 7);
        assert_eq!(oracle_walk_length(&plan.coarse_graph, 16).unwrap(), 7);
    }

    #[test]
    fn normalization_drops_second_bulk_visit() {
        let (_, plan) = toy8_plan();
        let c = |orig: NodeId| plan.to_coarse(orig).unwrap();
        let b = plan.records[0].bulk_node;
        // (6, 0, b, 2, b, 3, 1, 7, 6) in original labels.
        let walk = Walk::new(vec![c(6), c(0), b, c(2), b, c(3), c(1), c(7), c(6)]);
        let normalized = normalize_bulk_visits(&plan, &walk).unwrap();
        assert_eq!(
            normalized.nodes,
            vec![c(6), c(0), b, c(2), c(3), c(1), c(7), c(6)]
        );
        assert_eq!(normalized.length(), 7);
    }

    #[test]
    fn normalization_identity_when_single_visits() {
        let (_, plan) = toy8_plan();
        let c = |orig: NodeId| plan.to_coarse(orig).unwrap();
        let b = plan.records[0].bulk_node;
        let walk = Walk::new(vec![c(6), c(0), b, c(2), c(3), c(1), c(7), c(6)]);
        let normalized = normalize_bulk_visits(&plan, &walk).unwrap();
        assert_eq!(normalized, walk);
    }

    #[test]
    fn normalization_collapses_same_shell_flanks() {
        let (_, plan) = toy8_plan();
        let c = |orig: NodeId| plan.to_coarse(orig).unwrap();
        let b = plan.records[0].bulk_node;
        // First visit kept, later s b s detour collapses to s.
        let walk = Walk::new(vec![
            c(6),
            c(0),
            b,
            c(2),
            c(3),
            c(1),
            b,
            c(1),
            c(7),
            c(6),
        ]);
        let normalized = normalize_bulk_visits(&plan, &walk).unwrap();
        assert_eq!(normalized.length(), walk.length() - 2);
        let visits = normalized.nodes.iter().filter(|&&u| u == b).count();
        assert_eq!(visits, 1);
    }

    #[test]
    fn expansion_inserts_good_bulk() {
        let (g, plan) = toy8_plan();
        let c = |orig: NodeId| plan.to_coarse(orig).unwrap();
        let b = plan.records[0].bulk_node;
        let coarse = Walk::new(vec![c(6), c(0), b, c(2), c(3), c(1), c(7), c(6)]);
        let expanded = expand_walk(&g, &plan, &coarse).unwrap();
        assert_eq!(expanded.nodes, vec![6, 0, 4, 5, 2, 3, 1, 7, 6]);
        assert_eq!(expanded.length(), 8);
        let report = validate_closed_walk(&g, &expanded).unwrap();
        assert!(report.is_hamiltonian_walk_candidate);
    }

    #[test]
    fn expansion_identity_without_clusters() {
        let g = toy8();
        let plan = coarsen(&g, &ClusterSet::empty(&g)).unwrap();
        let walk = solve_exact(&g, 22).unwrap().walk;
        let expanded = expand_walk(&g, &plan, &walk).unwrap();
        assert_eq!(expanded, walk);
    }

    #[test]
    fn expansion_rejects_repeated_bulk() {
        let (g, plan) = toy8_plan();
        let c = |orig: NodeId| plan.to_coarse(orig).unwrap();
        let b = plan.records[0].bulk_node;
        let walk = Walk::new(vec![c(6), c(0), b, c(2), b, c(3), c(1), c(7), c(6)]);
        assert!(matches!(
            expand_walk(&g, &plan, &walk).unwrap_err(),
            Error::BulkVisitedNotOnce { count: 2, .. }
        ));
    }

    #[test]
    fn pipeline_solves_toy8_optimally() {
        let g = toy8();
        let opts = PipelineOptions::new(ClusterParams::new(2, 0));
        let solution = solve_pipeline(&g, &opts).unwrap();
        assert_eq!(solution.length, 8);
        assert_eq!(solution.coarse_nodes, 7);
        assert_eq!(
            solution.length,
            solution.stage_log.coarse_walk_length + solution.stage_log.bulk_growth
        );
    }

    #[test]
    fn pipeline_handles_complete_graphs() {
        let g = Graph::from_edges(7, &clique_edges(&[0, 1, 2, 3, 4, 5, 6])).unwrap();
        let opts = PipelineOptions::new(ClusterParams::new(0, 0));
        let solution = solve_pipeline(&g, &opts).unwrap();
        assert_eq!(solution.length, 7);
        assert_eq!(solution.length, oracle_walk_length(&g, 16).unwrap());
    }

    #[test]
    fn pipeline_rejects_disconnected() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let opts = PipelineOptions::new(ClusterParams::new(2, 0));
        assert_eq!(solve_pipeline(&g, &opts).unwrap_err(), Error::Disconnected);
    }

    #[test]
    fn naive_solve_matches_oracle_on_toy8() {
        let g = toy8();
        let solution = solve_naive(
            &g,
            ClusterParams::new(2, 0),
            DetectionMode::Greedy,
            0,
            DEFAULT_NODE_LIMIT,
        )
        .unwrap();
        assert_eq!(solution.length, 8);
    }
}
