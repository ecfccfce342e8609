//! Empirical one-step transition frequencies in two time windows, compared
//! cell by cell. This is a diagnostic for time-homogeneity of the one-step
//! probabilities, not a hypothesis test.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::{StateLabel, StateTrace};

pub const DEFAULT_MIN_TRANSITIONS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionEstimate {
    /// `counts[a][b]`: transitions from state `a` to `b`.
    pub counts: Vec<Vec<u64>>,
    pub source_totals: Vec<u64>,
    /// Row-normalized counts; rows of unobserved sources are zero.
    pub frequencies: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDiscrepancy {
    pub source: usize,
    pub target: usize,
    pub difference: f64,
    pub stderr: f64,
    /// `|difference| / stderr`; 0 when both are 0, infinite if only the stderr is.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub first: TransitionEstimate,
    pub second: TransitionEstimate,
    /// Largest absolute frequency difference over all cells.
    pub max_discrepancy: f64,
    /// Cell with the largest standardized difference.
    pub worst: Option<CellDiscrepancy>,
    pub within_four_sigma: bool,
}

/// Counts transitions `x[t-1] → x[t]` for target times `t` in `window`
/// (0-based positions, so `t ≥ 1`).
pub fn transition_counts(sequences: &[Vec<usize>], states: usize, window: Range<usize>) -> TransitionEstimate {
    let mut counts = vec![vec![0u64; states]; states];
    for seq in sequences {
        let lo = window.start.max(1);
        let hi = window.end.min(seq.len());
        for t in lo..hi {
            counts[seq[t - 1]][seq[t]] += 1;
        }
    }
    let source_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let frequencies = counts
        .iter()
        .zip(&source_totals)
        .map(|(row, &tot)| row.iter().map(|&c| if tot == 0 { 0.0 } else { c as f64 / tot as f64 }).collect())
        .collect();
    TransitionEstimate { counts, source_totals, frequencies }
}

/// Compares one-step frequencies between two windows of state sequences over
/// `states` states. Every source observed in either window needs at least
/// `min_transitions` transitions in both.
pub fn transition_homogeneity(
    sequences: &[Vec<usize>],
    states: usize,
    first: Range<usize>,
    second: Range<usize>,
    min_transitions: u64,
) -> Result<HomogeneityReport> {
    let a = transition_counts(sequences, states, first);
    let b = transition_counts(sequences, states, second);
    let mut max_discrepancy: f64 = 0.0;
    let mut worst: Option<CellDiscrepancy> = None;
    for s in 0..states {
        let (na, nb) = (a.source_totals[s], b.source_totals[s]);
        if na == 0 && nb == 0 {
            continue;
        }
        if na < min_transitions || nb < min_transitions {
            return Err(Error::InsufficientSamples(format!(
                "source state {s} has {na} and {nb} transitions in the two windows, need {min_transitions}"
            )));
        }
        for t in 0..states {
            let (pa, pb) = (a.frequencies[s][t], b.frequencies[s][t]);
            let difference = pa - pb;
            let stderr = (pa * (1.0 - pa) / na as f64 + pb * (1.0 - pb) / nb as f64).sqrt();
            let z = if difference == 0.0 {
                0.0
            } else if stderr == 0.0 {
                f64::INFINITY
            } else {
                difference.abs() / stderr
            };
            max_discrepancy = max_discrepancy.max(difference.abs());
            if worst.as_ref().is_none_or(|w| z > w.z) {
                worst = Some(CellDiscrepancy { source: s, target: t, difference, stderr, z });
            }
        }
    }
    let within_four_sigma = worst.as_ref().is_none_or(|w| w.z <= 4.0);
    Ok(HomogeneityReport { first: a, second: b, max_discrepancy, worst, within_four_sigma })
}

/// [`transition_homogeneity`] over sweep state traces.
pub fn empirical_transition_matrix(
    traces: &[StateTrace],
    first: Range<usize>,
    second: Range<usize>,
    min_transitions: u64,
) -> Result<HomogeneityReport> {
    let seqs: Vec<Vec<usize>> = traces.iter().map(StateTrace::label_indices).collect();
    transition_homogeneity(&seqs, StateLabel::ALL.len(), first, second, min_transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::chain::{random_chain, sample_path};
    use crate::rng::rng_from_seed;

    #[test]
    fn identical_windows_have_zero_discrepancy() {
        let c = random_chain(3, 4);
        let mut rng = rng_from_seed(1);
        let seqs: Vec<Vec<usize>> = (0..50).map(|_| sample_path(&c, 100, &mut rng)).collect();
        let r = transition_homogeneity(&seqs, 3, 1..100, 1..100, 10).unwrap();
        assert_eq!(r.max_discrepancy, 0.0);
        assert!(r.within_four_sigma);
    }

    #[test]
    fn constant_labels() {
        let trace = StateTrace { labels: vec![StateLabel::Other; 3000], increments: vec![0; 3000] };
        let r = empirical_transition_matrix(&[trace], 1..1500, 1500..3000, 1000).unwrap();
        let o = StateLabel::Other.index();
        assert_eq!(r.first.frequencies[o][o], 1.0);
        assert_eq!(r.first.source_totals.iter().sum::<u64>(), r.first.source_totals[o]);
        assert_eq!(r.max_discrepancy, 0.0);
    }

    #[test]
    fn homogeneous_chain_within_four_sigma() {
        let c = random_chain(4, 12);
        let mut rng = rng_from_seed(5);
        let seqs: Vec<Vec<usize>> = (0..2000).map(|_| sample_path(&c, 40, &mut rng)).collect();
        let r = transition_homogeneity(&seqs, 4, 5..20, 20..40, 1000).unwrap();
        assert!(r.within_four_sigma, "{:?}", r.worst);
    }

    #[test]
    fn drifting_process_is_flagged() {
        // Strict alternation in the first half, pairs 0,0,1,1,... in the second.
        let seqs: Vec<Vec<usize>> =
            (0..100).map(|_| (0..100).map(|t| if t < 50 { t % 2 } else { (t / 2) % 2 }).collect()).collect();
        let r = transition_homogeneity(&seqs, 2, 1..50, 51..100, 100).unwrap();
        assert!(!r.within_four_sigma);
    }

    #[test]
    fn insufficient_samples() {
        let seqs = vec![vec![0, 1, 0, 1]];
        assert!(matches!(transition_homogeneity(&seqs, 2, 1..2, 2..4, 1000), Err(Error::InsufficientSamples(_))));
    }
}
