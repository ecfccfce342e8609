//! Maximum matchings of colored point sets with pairwise-disjoint rectangles.
//!
//! Only candidate pairs can appear in a matching: same-color pairs whose
//! bounding box covers no third point. Two candidates conflict when they share
//! a point or their boxes intersect, so a maximum matching is a maximum
//! independent set of the conflict graph.

mod bruteforce;
mod exact;
mod greedy;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bbox, points_in_rect, rects_disjoint, Instance, Matching, Rect};

pub use bruteforce::{solve_bruteforce, BRUTEFORCE_MAX_POINTS};
pub use exact::solve_exact;
pub use greedy::{solve_greedy_sweep, StateLabel, StateTrace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    pub rect: Rect,
}

impl CandidatePair {
    pub fn indices(&self) -> (usize, usize) {
        (self.i, self.j)
    }
}

/// All same-color pairs `i < j` whose bounding box covers exactly `{i, j}`,
/// in lexicographic `(i, j)` order.
pub fn candidate_pairs(inst: &Instance) -> Vec<CandidatePair> {
    let pts = inst.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].color != pts[j].color {
                continue;
            }
            let rect = bbox(&pts[i], &pts[j]);
            // Points are x-sorted, so only indices strictly between i and j can fall inside.
            if (i + 1..j).all(|k| !rect.contains(&pts[k])) {
                out.push(CandidatePair { i, j, rect });
            }
        }
    }
    debug_assert!(out.iter().all(|c| points_in_rect(inst, &c.rect) == vec![c.i, c.j]));
    out
}

/// True iff the two candidates cannot both be in a matching.
pub fn conflict(a: &CandidatePair, b: &CandidatePair) -> bool {
    a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j || !rects_disjoint(&a.rect, &b.rect)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub max_nodes: u64,
    pub time_budget: Duration,
}

impl SolveLimits {
    pub fn new(max_nodes: u64, time_budget: Duration) -> Result<SolveLimits> {
        if max_nodes == 0 || time_budget.is_zero() {
            return Err(Error::InvalidParameter("solve limits must be positive".into()));
        }
        Ok(SolveLimits { max_nodes, time_budget })
    }
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { max_nodes: 100_000_000, time_budget: Duration::from_secs(600) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub matching: Matching,
    /// Whether the matching is proven maximum.
    pub optimal: bool,
    pub nodes_explored: u64,
}

impl SolveOutcome {
    pub fn matched_count(&self) -> usize {
        self.matching.matched_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Exact,
    Bruteforce,
    Greedy,
}

impl SolverChoice {
    /// Whether the solver returns maximum matchings.
    pub fn is_exact(self) -> bool {
        !matches!(self, SolverChoice::Greedy)
    }
}

pub fn solve(inst: &Instance, choice: SolverChoice, limits: &SolveLimits) -> Result<SolveOutcome> {
    match choice {
        SolverChoice::Exact => solve_exact(inst, limits),
        SolverChoice::Bruteforce => solve_bruteforce(inst),
        SolverChoice::Greedy => {
            Ok(SolveOutcome { matching: solve_greedy_sweep(inst).0, optimal: false, nodes_explored: 0 })
        }
    }
}

/// Wire format of a solved instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingRecord {
    pub n: usize,
    /// Points covered (twice the pair count).
    pub size: usize,
    pub pairs: Vec<[usize; 2]>,
    pub optimal: bool,
    pub nodes_explored: u64,
}

impl MatchingRecord {
    pub fn new(inst: &Instance, outcome: &SolveOutcome) -> MatchingRecord {
        MatchingRecord {
            n: inst.len(),
            size: outcome.matched_count(),
            pairs: outcome.matching.pairs().iter().map(|&(i, j)| [i, j]).collect(),
            optimal: outcome.optimal,
            nodes_explored: outcome.nodes_explored,
        }
    }
}
