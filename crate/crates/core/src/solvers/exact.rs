//! Branch-and-bound maximum independent set on the candidate conflict graph.
//!
//! Phase one finds the optimum size, branching on the remaining candidate of
//! highest remaining degree. Phase two fixes candidates in lexicographic order,
//! keeping each one whose inclusion still admits an optimum, so the returned
//! matching is the lexicographically smallest maximum matching.

use std::time::Instant;

use fixedbitset::FixedBitSet;

use super::{candidate_pairs, conflict, SolveLimits, SolveOutcome};
use crate::error::{Error, Result};
use crate::geometry::{Instance, Matching};

struct ConflictGraph {
    /// `adj[v]` excludes `v` itself.
    adj: Vec<FixedBitSet>,
    /// `closed[v]` = `adj[v] ∪ {v}`.
    closed: Vec<FixedBitSet>,
    /// Endpoints of each candidate, as a point bitset.
    ends: Vec<(usize, usize)>,
    n_points: usize,
}

impl ConflictGraph {
    fn new(inst: &Instance) -> ConflictGraph {
        let cands = candidate_pairs(inst);
        let m = cands.len();
        let mut adj = vec![FixedBitSet::with_capacity(m); m];
        for a in 0..m {
            for b in a + 1..m {
                if conflict(&cands[a], &cands[b]) {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
        let closed = adj
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let mut c = s.clone();
                c.insert(v);
                c
            })
            .collect();
        ConflictGraph { adj, closed, ends: cands.iter().map(|c| (c.i, c.j)).collect(), n_points: inst.len() }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn all(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    /// Upper bound on the independence number of the subgraph induced by `rest`.
    fn upper_bound(&self, rest: &FixedBitSet) -> usize {
        let count = rest.count_ones(..);

        let mut points = FixedBitSet::with_capacity(self.n_points);
        for v in rest.ones() {
            points.insert(self.ends[v].0);
            points.insert(self.ends[v].1);
        }
        let by_points = points.count_ones(..) / 2;

        // Greedy clique cover: an independent set uses at most one vertex per clique.
        let mut cliques: Vec<FixedBitSet> = Vec::new();
        for v in rest.ones() {
            match cliques.iter_mut().find(|common| common.contains(v)) {
                Some(common) => common.intersect_with(&self.adj[v]),
                None => cliques.push(self.adj[v].clone()),
            }
        }

        count.min(by_points).min(cliques.len())
    }
}

struct Search<'g> {
    graph: &'g ConflictGraph,
    max_nodes: u64,
    deadline: Instant,
    nodes: u64,
    current: Vec<usize>,
    best: Vec<usize>,
    /// Incumbent size; may start above `best.len()` to demand a threshold.
    best_len: usize,
    stop_at: Option<usize>,
    aborted: bool,
}

impl<'g> Search<'g> {
    fn new(graph: &'g ConflictGraph, max_nodes: u64, deadline: Instant) -> Self {
        Search {
            graph,
            max_nodes,
            deadline,
            nodes: 0,
            current: Vec::new(),
            best: Vec::new(),
            best_len: 0,
            stop_at: None,
            aborted: false,
        }
    }

    fn finished(&self) -> bool {
        self.aborted || self.stop_at.is_some_and(|t| self.best.len() >= t)
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes || (self.nodes.is_multiple_of(1024) && Instant::now() >= self.deadline) {
            self.aborted = true;
        }
        !self.aborted
    }

    fn record(&mut self, extra: impl IntoIterator<Item = usize>) {
        let mut sol = self.current.clone();
        sol.extend(extra);
        if sol.len() > self.best_len {
            self.best_len = sol.len();
            self.best = sol;
        }
    }

    fn expand(&mut self, rest: FixedBitSet) {
        if !self.tick() {
            return;
        }
        if self.current.len() > self.best_len {
            self.record([]);
            if self.finished() {
                return;
            }
        }
        if rest.is_clear() {
            return;
        }
        if self.current.len() + self.graph.upper_bound(&rest) <= self.best_len {
            return;
        }

        // Highest remaining degree, smallest index on ties.
        let mut pick = None;
        let mut pick_deg = 0;
        for v in rest.ones() {
            let d = self.graph.adj[v].intersection_count(&rest);
            if pick.is_none() || d > pick_deg {
                pick = Some(v);
                pick_deg = d;
            }
        }
        let v = pick.expect("rest is nonempty");
        if pick_deg == 0 {
            // Remaining candidates are pairwise compatible.
            self.record(rest.ones());
            return;
        }

        let mut with_v = rest.clone();
        with_v.difference_with(&self.graph.closed[v]);
        self.current.push(v);
        self.expand(with_v);
        self.current.pop();
        if self.finished() {
            return;
        }

        let mut without_v = rest;
        without_v.remove(v);
        self.expand(without_v);
    }
}

fn to_matching(graph: &ConflictGraph, chosen: &[usize]) -> Matching {
    Matching::new(chosen.iter().map(|&v| graph.ends[v]))
}

/// Maximum matching by branch and bound, lexicographically smallest among optima.
///
/// If the node or time budget runs out before the optimum size is proven,
/// returns [`Error::BudgetExceeded`] with the incumbent. If it runs out during
/// the lexicographic pass, the already-proven optimum is returned as is.
pub fn solve_exact(inst: &Instance, limits: &SolveLimits) -> Result<SolveOutcome> {
    let graph = ConflictGraph::new(inst);
    let deadline = Instant::now() + limits.time_budget;

    let mut search = Search::new(&graph, limits.max_nodes, deadline);
    search.expand(graph.all());
    let mut nodes = search.nodes;
    if search.aborted {
        return Err(Error::BudgetExceeded { best: to_matching(&graph, &search.best), nodes });
    }
    let optimum = search.best;
    let target = optimum.len();

    let mut chosen = Vec::with_capacity(target);
    let mut allowed = graph.all();
    for v in 0..graph.len() {
        if chosen.len() == target {
            break;
        }
        if !allowed.contains(v) {
            continue;
        }
        allowed.remove(v);
        let mut rest = allowed.clone();
        rest.difference_with(&graph.adj[v]);
        let need = target - chosen.len() - 1;

        let feasible = if need == 0 {
            true
        } else {
            let mut probe = Search::new(&graph, limits.max_nodes.saturating_sub(nodes), deadline);
            probe.best_len = need - 1;
            probe.stop_at = Some(need);
            probe.expand(rest.clone());
            nodes += probe.nodes;
            if probe.aborted {
                return Ok(SolveOutcome {
                    matching: to_matching(&graph, &optimum),
                    optimal: true,
                    nodes_explored: nodes,
                });
            }
            probe.best.len() >= need
        };
        if feasible {
            chosen.push(v);
            allowed = rest;
        }
    }
    debug_assert_eq!(chosen.len(), target);

    Ok(SolveOutcome { matching: to_matching(&graph, &chosen), optimal: true, nodes_explored: nodes })
}
