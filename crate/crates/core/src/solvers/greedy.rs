//! Left-to-right sweep heuristic with a coarse state trace.
//!
//! Points are processed in x order. Each new point is matched with the most
//! recently buffered unmatched point of its color whose bounding box covers no
//! other point and misses every rectangle emitted so far; otherwise it joins
//! the buffer.

use serde::Serialize;

use crate::geometry::{bbox, rects_disjoint, Instance, Matching, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StateLabel {
    /// First step.
    Init1,
    /// Last two buffered points are x-consecutive, monotone, and alternate in color.
    MonoAlt2,
    /// Same for the last three buffered points.
    MonoAlt3,
    MatchEmitted,
    Other,
}

impl StateLabel {
    pub const ALL: [StateLabel; 5] =
        [StateLabel::Init1, StateLabel::MonoAlt2, StateLabel::MonoAlt3, StateLabel::MatchEmitted, StateLabel::Other];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateTrace {
    pub labels: Vec<StateLabel>,
    /// Points newly matched at each step.
    pub increments: Vec<u8>,
}

impl StateTrace {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.index()).collect()
    }
}

/// Whether the buffered points `tail` are x-consecutive, strictly monotone in y,
/// and alternate in color.
fn mono_alt(inst: &Instance, tail: &[usize]) -> bool {
    let pts = inst.points();
    let consecutive = tail.windows(2).all(|w| w[1] == w[0] + 1);
    let alternating = tail.windows(2).all(|w| pts[w[0]].color != pts[w[1]].color);
    let up = tail.windows(2).all(|w| pts[w[0]].y < pts[w[1]].y);
    let down = tail.windows(2).all(|w| pts[w[0]].y > pts[w[1]].y);
    consecutive && alternating && (up || down)
}

pub fn solve_greedy_sweep(inst: &Instance) -> (Matching, StateTrace) {
    let pts = inst.points();
    let mut buffer: Vec<usize> = Vec::new();
    let mut emitted: Vec<Rect> = Vec::new();
    let mut pairs = Vec::new();
    let mut labels = Vec::with_capacity(pts.len());
    let mut increments = Vec::with_capacity(pts.len());

    for t in 0..pts.len() {
        let p = &pts[t];
        let partner = buffer.iter().rposition(|&q| {
            if pts[q].color != p.color {
                return false;
            }
            let r = bbox(&pts[q], p);
            // Only points with x between q and p can fall inside.
            (q + 1..t).all(|k| !r.contains(&pts[k])) && emitted.iter().all(|e| rects_disjoint(e, &r))
        });

        let label = match partner {
            Some(pos) => {
                let q = buffer.remove(pos);
                emitted.push(bbox(&pts[q], p));
                pairs.push((q, t));
                increments.push(2);
                StateLabel::MatchEmitted
            }
            None => {
                buffer.push(t);
                increments.push(0);
                let b = buffer.len();
                if t == 0 {
                    StateLabel::Init1
                } else if b >= 3 && mono_alt(inst, &buffer[b - 3..]) {
                    StateLabel::MonoAlt3
                } else if b >= 2 && mono_alt(inst, &buffer[b - 2..]) {
                    StateLabel::MonoAlt2
                } else {
                    StateLabel::Other
                }
            }
        };
        labels.push(label);
    }

    (Matching::new(pairs), StateTrace { labels, increments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_instance, validate_matching, Color, ColoredPoint, PointModel};
    use crate::solvers::{solve_exact, SolveLimits};
    use proptest::prelude::*;

    #[test]
    fn two_same_color_points() {
        let t = Instance::new(vec![ColoredPoint::new(0.2, 0.4, Color::Blue), ColoredPoint::new(0.7, 0.1, Color::Blue)])
            .unwrap();
        let (m, trace) = solve_greedy_sweep(&t);
        assert_eq!(m.pairs(), &[(0, 1)]);
        assert_eq!(trace.labels, vec![StateLabel::Init1, StateLabel::MatchEmitted]);
        assert_eq!(trace.increments, vec![0, 2]);
    }

    #[test]
    fn alternating_monotone_chain() {
        for n in 1..=12 {
            for decreasing in [false, true] {
                let pts = (0..n)
                    .map(|k| {
                        let y = (k + 1) as f64 / 13.0;
                        let y = if decreasing { 1.0 - y } else { y };
                        let c = if k % 2 == 0 { Color::Red } else { Color::Blue };
                        ColoredPoint::new((k + 1) as f64 / 13.0, y, c)
                    })
                    .collect();
                let t = Instance::new(pts).unwrap();
                let (m, trace) = solve_greedy_sweep(&t);
                assert!(m.is_empty());
                for (k, l) in trace.labels.iter().enumerate() {
                    let want = match k {
                        0 => StateLabel::Init1,
                        1 => StateLabel::MonoAlt2,
                        _ => StateLabel::MonoAlt3,
                    };
                    assert_eq!(*l, want);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn greedy_is_feasible_and_dominated(n in 1usize..16, seed: u64) {
            let t = generate_instance(n, seed, PointModel::UniformSquare).unwrap();
            let (m, trace) = solve_greedy_sweep(&t);
            prop_assert!(validate_matching(&t, &m).unwrap().valid);
            prop_assert_eq!(trace.len(), n);
            for (l, inc) in trace.labels.iter().zip(&trace.increments) {
                prop_assert!(matches!(inc, 0 | 2 | 4));
                prop_assert_eq!(*inc > 0, *l == StateLabel::MatchEmitted);
            }
            let total: usize = trace.increments.iter().map(|&i| i as usize).sum();
            prop_assert_eq!(total, m.matched_count());
            let exact = solve_exact(&t, &SolveLimits::default()).unwrap();
            prop_assert!(m.matched_count() <= exact.matched_count());
        }
    }
}
