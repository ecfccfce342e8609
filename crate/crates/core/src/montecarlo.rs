//! Trial runners. Trial `k` of a run with master seed `s` draws from its own
//! generator seeded with `trial_seed(s, k)`, and results are reduced in trial
//! order, so output does not depend on how many worker threads run the trials.

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::{rng_from_seed, trial_seed, Rng};

/// Runs `f(trial_seed(master, k))` for every trial `k` in parallel and returns
/// the results in trial order.
pub fn map_seeds<T, F>(trials: u64, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..trials).into_par_iter().map(|k| f(trial_seed(master, k))).collect()
}

/// Runs `trials` independent trials in parallel and returns results in trial order.
pub fn map_trials<T, F>(trials: u64, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Rng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(trial_seed(master, k));
            f(k, &mut rng)
        })
        .collect()
}

/// Number of trials for which `event` holds.
pub fn count_hits<F>(trials: u64, master: u64, event: F) -> u64
where
    F: Fn(&mut Rng) -> bool + Sync,
{
    (0..trials).into_par_iter().filter(|&k| event(&mut rng_from_seed(trial_seed(master, k)))).count() as u64
}

/// Binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    /// `sqrt(p̂ (1 - p̂) / trials)`.
    pub stderr: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Proportion {
        let frequency = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (frequency * (1.0 - frequency) / trials as f64).sqrt() };
        Proportion { hits, trials, frequency, stderr }
    }

    /// Binomial standard deviation of the frequency if the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// `|p̂ - p| ≤ k σ(p)`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        (self.frequency - p).abs() <= k * self.sigma_at(p)
    }
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl MeanEstimate {
    /// Sums in slice order, so equal inputs give bit-identical results.
    pub fn from_samples(xs: &[f64]) -> MeanEstimate {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, sd: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd =
            if n > 1 { (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        MeanEstimate { mean, sd, stderr: sd / (n as f64).sqrt(), samples: n as u64 }
    }
}
