//! Exhaustive oracle. Shares nothing with the branch-and-bound path beyond the
//! geometric primitives: pairs are enumerated from the definition and every
//! feasible subset is visited.

use super::SolveOutcome;
use crate::error::{Error, Result};
use crate::geometry::{bbox, rects_disjoint, Instance, Matching, Rect};

pub const BRUTEFORCE_MAX_POINTS: usize = 10;

struct Enumeration<'a> {
    pairs: &'a [((usize, usize), Rect)],
    chosen: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
}

impl Enumeration<'_> {
    fn compatible(&self, k: usize) -> bool {
        let ((i, j), r) = &self.pairs[k];
        self.chosen.iter().all(|&c| {
            let ((a, b), s) = &self.pairs[c];
            *i != *a && *i != *b && *j != *a && *j != *b && rects_disjoint(r, s)
        })
    }

    // Subsets are visited in lexicographic order, so the first maximum found
    // is the lexicographically smallest one.
    fn visit(&mut self, from: usize) {
        self.nodes += 1;
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        for k in from..self.pairs.len() {
            if self.compatible(k) {
                self.chosen.push(k);
                self.visit(k + 1);
                self.chosen.pop();
            }
        }
    }
}

pub fn solve_bruteforce(inst: &Instance) -> Result<SolveOutcome> {
    let n = inst.len();
    if n > BRUTEFORCE_MAX_POINTS {
        return Err(Error::InstanceTooLarge { n, max: BRUTEFORCE_MAX_POINTS });
    }
    let pts = inst.points();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if pts[i].color != pts[j].color {
                continue;
            }
            let r = bbox(&pts[i], &pts[j]);
            if pts.iter().filter(|p| r.contains(p)).count() == 2 {
                pairs.push(((i, j), r));
            }
        }
    }
    let mut e = Enumeration { pairs: &pairs, chosen: Vec::new(), best: Vec::new(), nodes: 0 };
    e.visit(0);
    Ok(SolveOutcome {
        matching: Matching::new(e.best.iter().map(|&k| pairs[k].0)),
        optimal: true,
        nodes_explored: e.nodes,
    })
}
