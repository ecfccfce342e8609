//! Concentration of the matched fraction `F = M(n)/n`.
//!
//! Moving one point vertically changes `M` by at most 4 and recoloring one
//! point changes it by at most 2, so `F` has bounded differences `4/n` (n
//! position coordinates) and `2/n` (n colors). McDiarmid then gives
//! `Pr(|F - E F| ≥ ε) ≤ 2 exp(-ε² n / 10)`. Summing the one-sided tails over
//! `n ≥ n0` with `r = exp(-ε²/40)` yields the finite partial sum
//! `(n0 - 1) + 2 r^n0 / (1 - r)`.

use std::io::Write;

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{generate_instance, Instance, PointModel};
use crate::montecarlo::{map_seeds, MeanEstimate, Proportion};
use crate::rng::{derive_seed, rng_from_seed};
use crate::solvers::{solve, SolveLimits, SolverChoice};

/// Largest `n` for which Monte Carlo runs call the exact solver.
pub const EXACT_SAMPLING_MAX_POINTS: usize = 20;
/// Largest `|ΔM|` from moving one point vertically.
pub const POSITION_DIFFERENCE: usize = 4;
/// Largest `|ΔM|` from recoloring one point.
pub const COLOR_DIFFERENCE: usize = 2;
/// Threshold in the expectation lower bound `E[M(n)] ≥ (0.83 + β) n`.
pub const EXPECTATION_THRESHOLD: f64 = 0.83;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceProfile {
    pub n: usize,
    /// `n` entries `4/n` (positions) followed by `n` entries `2/n` (colors).
    pub d: Vec<f64>,
}

impl DifferenceProfile {
    pub fn new(n: usize) -> Result<DifferenceProfile> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let nf = n as f64;
        let mut d = vec![POSITION_DIFFERENCE as f64 / nf; n];
        d.extend(std::iter::repeat_n(COLOR_DIFFERENCE as f64 / nf, n));
        Ok(DifferenceProfile { n, d })
    }

    /// `Σ d²`, which is `20/n`.
    pub fn sum_of_squares(&self) -> f64 {
        sum_of_squares(&self.d)
    }
}

/// Compensated (Neumaier) sum of squares, accurate to a few ulps for long profiles.
fn sum_of_squares(d: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in d {
        let v = x * x;
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// McDiarmid bound `exp(-2ε²/Σd²)`, doubled when two-sided, clamped to 1 or 2.
pub fn mcdiarmid_bound(d: &[f64], epsilon: f64, two_sided: bool) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if let Some(x) = d.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("difference constant {x} must be positive")));
    }
    check_epsilon(epsilon)?;
    let ss = sum_of_squares(d);
    let one = (-2.0 * epsilon * epsilon / ss).exp().min(1.0);
    Ok(if two_sided { (2.0 * one).min(2.0) } else { one })
}

/// `2 exp(-ε² n / 10)`, unclamped; values above 1 are vacuous.
pub fn tail_bound(n: usize, epsilon: f64) -> f64 {
    2.0 * (-epsilon * epsilon * n as f64 / 10.0).exp()
}

/// `r = exp(-ε²/40)`.
pub fn borel_cantelli_ratio(epsilon: f64) -> f64 {
    (-epsilon * epsilon / 40.0).exp()
}

/// `(n0 - 1) + 2 r^n0 / (1 - r)` with `r = exp(-ε²/40)`.
pub fn borel_cantelli_tail(epsilon: f64, n0: u64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if n0 == 0 {
        return Err(Error::InvalidParameter("n0 must be at least 1".into()));
    }
    let a = epsilon * epsilon / 40.0;
    // 1 - r without cancellation for small ε.
    let one_minus_r = -(-a).exp_m1();
    if one_minus_r == 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} is too small for a finite partial sum")));
    }
    let r_n0 = (-a * n0 as f64).exp();
    Ok((n0 - 1) as f64 + 2.0 * r_n0 / one_minus_r)
}

/// `β = (α - 0.83) / 3`.
pub fn beta_from_alpha(alpha: f64) -> f64 {
    (alpha - EXPECTATION_THRESHOLD) / 3.0
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    Ok(())
}

fn check_sampling(n: usize, trials: u64, solver: SolverChoice) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if solver == SolverChoice::Exact && n > EXACT_SAMPLING_MAX_POINTS {
        return Err(Error::InstanceTooLarge { n, max: EXACT_SAMPLING_MAX_POINTS });
    }
    Ok(())
}

fn require_exact(solver: SolverChoice) -> Result<()> {
    if !solver.is_exact() {
        return Err(Error::InvalidParameter(
            "this check needs maximum matchings; the greedy sweep is not exact".into(),
        ));
    }
    Ok(())
}

/// Matched count of each trial instance; `None` for trials whose solve ran
/// out of budget. Trial `k` uses the instance `generate_instance(n, trial_seed(seed, k), model)`.
fn sample_matched_counts(
    n: usize,
    trials: u64,
    seed: u64,
    solver: SolverChoice,
    model: PointModel,
    limits: &SolveLimits,
) -> Result<Vec<Option<usize>>> {
    map_seeds(trials, seed, |s| {
        let inst = generate_instance(n, s, model)?;
        match solve(&inst, solver, limits) {
            Ok(out) => Ok(Some(out.matched_count())),
            Err(Error::BudgetExceeded { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub n: usize,
    pub solver: SolverChoice,
    pub model: PointModel,
    pub trials: u64,
    /// Trials whose solve exceeded the budget and were left out.
    pub discarded: u64,
    /// Estimate of `E[M(n)/n]`.
    pub mean: f64,
    pub sd: f64,
    pub stderr: f64,
}

impl ExpectationReport {
    /// Estimate of `E[M(n)]`.
    pub fn mean_matched(&self) -> f64 {
        self.mean * self.n as f64
    }
    pub fn stderr_matched(&self) -> f64 {
        self.stderr * self.n as f64
    }
}

/// Monte Carlo estimate of the matched fraction. With the same seed, exact
/// and greedy runs see the same instances.
pub fn empirical_expectation(
    n: usize,
    trials: u64,
    seed: u64,
    solver: SolverChoice,
    model: PointModel,
    limits: &SolveLimits,
) -> Result<ExpectationReport> {
    check_sampling(n, trials, solver)?;
    let counts = sample_matched_counts(n, trials, seed, solver, model, limits)?;
    let fractions: Vec<f64> = counts.iter().flatten().map(|&m| m as f64 / n as f64).collect();
    let est = MeanEstimate::from_samples(&fractions);
    Ok(ExpectationReport {
        n,
        solver,
        model,
        trials,
        discarded: trials - est.samples,
        mean: est.mean,
        sd: est.sd,
        stderr: est.stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDifferenceReport {
    pub n: usize,
    pub trials: u64,
    pub perturbations_per_trial: usize,
    pub max_position_delta: usize,
    pub max_color_delta: usize,
    /// `position_histogram[d]`: position perturbations with `|ΔM| = d`.
    pub position_histogram: Vec<u64>,
    pub color_histogram: Vec<u64>,
    /// Perturbations exceeding 4 (position) or 2 (color).
    pub violations: u64,
}

/// For each trial instance, re-solves after `perturbations` single-point
/// vertical moves (new y uniform, redrawn on collision) and `perturbations`
/// single-point recolorings, each applied to the base instance.
///
/// Trial `k` uses instance seed `s = trial_seed(seed, k)`; perturbations draw
/// from `derive_seed(s, 1)`: for each move an index then y values, then for
/// each recoloring an index.
pub fn bounded_difference_check(
    n: usize,
    trials: u64,
    perturbations: usize,
    seed: u64,
    solver: SolverChoice,
    model: PointModel,
    limits: &SolveLimits,
) -> Result<BoundedDifferenceReport> {
    require_exact(solver)?;
    check_sampling(n, trials, solver)?;
    let per_trial: Vec<Result<(Vec<usize>, Vec<usize>)>> = map_seeds(trials, seed, |s| {
        let inst = generate_instance(n, s, model)?;
        let base = solve(&inst, solver, limits)?.matched_count();
        let mut rng = rng_from_seed(derive_seed(s, 1));
        let mut pos = Vec::with_capacity(perturbations);
        for _ in 0..perturbations {
            let i = rng.random_range(0..n);
            let moved = loop {
                match inst.perturb_y(i, rng.random::<f64>()) {
                    Ok(m) => break m,
                    Err(Error::GeneralPositionViolation(_)) => continue,
                    Err(e) => return Err(e),
                }
            };
            pos.push(base.abs_diff(solve(&moved, solver, limits)?.matched_count()));
        }
        let mut col = Vec::with_capacity(perturbations);
        for _ in 0..perturbations {
            let flipped = inst.flip_color(rng.random_range(0..n))?;
            col.push(base.abs_diff(solve(&flipped, solver, limits)?.matched_count()));
        }
        Ok((pos, col))
    });

    let mut position_histogram = vec![0u64; n + 1];
    let mut color_histogram = vec![0u64; n + 1];
    let mut violations = 0;
    for r in per_trial {
        let (pos, col) = r?;
        for d in pos {
            position_histogram[d] += 1;
            violations += u64::from(d > POSITION_DIFFERENCE);
        }
        for d in col {
            color_histogram[d] += 1;
            violations += u64::from(d > COLOR_DIFFERENCE);
        }
    }
    let max_of = |h: &[u64]| h.iter().rposition(|&c| c > 0).unwrap_or(0);
    Ok(BoundedDifferenceReport {
        n,
        trials,
        perturbations_per_trial: perturbations,
        max_position_delta: max_of(&position_histogram),
        max_color_delta: max_of(&color_histogram),
        position_histogram,
        color_histogram,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuperadditivityResult {
    pub k: usize,
    pub whole: usize,
    pub left: usize,
    pub right: usize,
    /// `whole ≥ left + right`.
    pub holds: bool,
}

/// Compares `M` of the instance with `M` of its first `k` points by x plus
/// `M` of the remaining `n - k`.
pub fn superadditivity_check(
    inst: &Instance,
    k: usize,
    solver: SolverChoice,
    limits: &SolveLimits,
) -> Result<SuperadditivityResult> {
    require_exact(solver)?;
    let n = inst.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("split index {k} must satisfy 1 <= k < {n}")));
    }
    let whole = solve(inst, solver, limits)?.matched_count();
    superadditivity_with_whole(inst, k, whole, solver, limits)
}

fn superadditivity_with_whole(
    inst: &Instance,
    k: usize,
    whole: usize,
    solver: SolverChoice,
    limits: &SolveLimits,
) -> Result<SuperadditivityResult> {
    let left = solve(&inst.slice(0..k), solver, limits)?.matched_count();
    let right = solve(&inst.slice(k..inst.len()), solver, limits)?.matched_count();
    Ok(SuperadditivityResult { k, whole, left, right, holds: whole >= left + right })
}

/// [`superadditivity_check`] for every split index, solving the whole instance once.
pub fn superadditivity_all_splits(
    inst: &Instance,
    solver: SolverChoice,
    limits: &SolveLimits,
) -> Result<Vec<SuperadditivityResult>> {
    require_exact(solver)?;
    let whole = solve(inst, solver, limits)?.matched_count();
    (1..inst.len()).map(|k| superadditivity_with_whole(inst, k, whole, solver, limits)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeketeRow {
    pub n: usize,
    /// Estimate of `E[M(n)]/n`.
    pub mean: f64,
    pub stderr: f64,
    /// Running maximum of `mean` over this and earlier rows.
    pub sup_so_far: f64,
    pub discarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeketeMargin {
    pub n: usize,
    pub m: usize,
    /// `Ê[M(n+m)] - Ê[M(n)] - Ê[M(m)]`.
    pub margin: f64,
    pub combined_stderr: f64,
    /// `margin ≥ -4 combined_stderr`.
    pub within_four_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeketeReport {
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<FeketeRow>,
    /// Every pair `n ≤ m` with `n`, `m` and `n + m` all in the table.
    pub margins: Vec<FeketeMargin>,
    /// Table size at which the largest `mean` occurs.
    pub argsup: usize,
    /// Whether that is the largest size in the table. Not asserted either way.
    pub sup_at_largest_n: bool,
}

/// Estimates `E[M(n)]/n` with the exact solver for each `n` in `ns`, using
/// `derive_seed(seed, n)` as the master seed of size `n`.
pub fn fekete_report(
    ns: &[usize],
    trials: u64,
    seed: u64,
    model: PointModel,
    limits: &SolveLimits,
) -> Result<FeketeReport> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("no sizes given".into()));
    }
    let mut sizes = ns.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows: Vec<FeketeRow> = Vec::with_capacity(sizes.len());
    let mut sup = f64::NEG_INFINITY;
    let mut argsup = sizes[0];
    for &n in &sizes {
        let e = empirical_expectation(n, trials, derive_seed(seed, n as u64), SolverChoice::Exact, model, limits)?;
        if e.mean > sup {
            sup = e.mean;
            argsup = n;
        }
        rows.push(FeketeRow { n, mean: e.mean, stderr: e.stderr, sup_so_far: sup, discarded: e.discarded });
    }
    let total = |n: usize| rows.iter().find(|r| r.n == n).map(|r| (r.mean * n as f64, r.stderr * n as f64));
    let mut margins = Vec::new();
    for (i, &a) in sizes.iter().enumerate() {
        for &b in &sizes[i..] {
            if let (Some((ma, sa)), Some((mb, sb)), Some((mab, sab))) = (total(a), total(b), total(a + b)) {
                let margin = mab - ma - mb;
                let combined_stderr = (sa * sa + sb * sb + sab * sab).sqrt();
                margins.push(FeketeMargin {
                    n: a,
                    m: b,
                    margin,
                    combined_stderr,
                    within_four_sigma: margin >= -4.0 * combined_stderr,
                });
            }
        }
    }
    Ok(FeketeReport {
        trials,
        seed,
        sup_at_largest_n: argsup == *sizes.last().expect("nonempty"),
        argsup,
        rows,
        margins,
    })
}

/// Writes the table as CSV with columns `n,mean,stderr,sup_so_far`.
pub fn write_fekete_csv<W: Write>(report: &FeketeReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "mean", "stderr", "sup_so_far"]).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([r.n.to_string(), r.mean.to_string(), r.stderr.to_string(), r.sup_so_far.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub pilot_trials: u64,
    /// Reference value standing in for `E[M(n)/n]`.
    pub pilot_mean: f64,
    pub pilot_stderr: f64,
    pub empirical_mean: f64,
    pub empirical_sd: f64,
    /// Trials with `|M/n - pilot_mean| ≥ ε`.
    pub exceedances: Proportion,
    /// `2 exp(-ε² n / 10)`.
    pub bound: f64,
    /// The bound exceeds 1 and says nothing.
    pub vacuous: bool,
    /// `frequency ≤ bound + 4 stderr`.
    pub pass: bool,
    pub discarded: u64,
}

/// Two-sided tail frequency of the matched fraction around the mean of an
/// independent pilot run (seed `derive_seed(seed, 1)`), against the McDiarmid bound.
#[allow(clippy::too_many_arguments)]
pub fn tail_vs_bound(
    n: usize,
    epsilon: f64,
    trials: u64,
    pilot_trials: u64,
    seed: u64,
    solver: SolverChoice,
    model: PointModel,
    limits: &SolveLimits,
) -> Result<TailReport> {
    check_epsilon(epsilon)?;
    require_exact(solver)?;
    let pilot = empirical_expectation(n, pilot_trials, derive_seed(seed, 1), solver, model, limits)?;
    check_sampling(n, trials, solver)?;
    let fractions: Vec<f64> = sample_matched_counts(n, trials, seed, solver, model, limits)?
        .into_iter()
        .flatten()
        .map(|m| m as f64 / n as f64)
        .collect();
    let used = fractions.len() as u64;
    let est = MeanEstimate::from_samples(&fractions);
    let hits = fractions.iter().filter(|&&f| (f - pilot.mean).abs() >= epsilon).count() as u64;
    let exceedances = Proportion::new(hits, used);
    let bound = tail_bound(n, epsilon);
    Ok(TailReport {
        n,
        epsilon,
        trials,
        pilot_trials,
        pilot_mean: pilot.mean,
        pilot_stderr: pilot.stderr,
        empirical_mean: est.mean,
        empirical_sd: est.sd,
        exceedances,
        bound,
        vacuous: bound > 1.0,
        pass: exceedances.frequency <= bound + 4.0 * exceedances.stderr,
        discarded: trials - used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelReport {
    pub epsilon: f64,
    pub n0: u64,
    pub r: f64,
    pub partial_sum: f64,
}

pub fn borel_report(epsilon: f64, n0: u64) -> Result<BorelReport> {
    Ok(BorelReport { epsilon, n0, r: borel_cantelli_ratio(epsilon), partial_sum: borel_cantelli_tail(epsilon, n0)? })
}

/// Combined output of the concentration checks; sections that were not run are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ConcentrationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// `2 exp(-ε² n / 10)` when both `n` and `ε` are known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    /// McDiarmid bound for the difference profile of size `n`, two-sided.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcdiarmid_two_sided: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_differences: Option<BoundedDifferenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fekete: Option<FeketeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub borel: Option<BorelReport>,
    /// Only present when a chain with its `α` was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl ConcentrationReport {
    /// Fills in the closed-form fields that depend only on `n` and `ε`.
    pub fn with_parameters(mut self, n: Option<usize>, epsilon: Option<f64>) -> Result<Self> {
        self.n = n;
        self.epsilon = epsilon;
        if let (Some(n), Some(eps)) = (n, epsilon) {
            self.tail_bound = Some(tail_bound(n, eps));
            self.mcdiarmid_two_sided = Some(mcdiarmid_bound(&DifferenceProfile::new(n)?.d, eps, true)?);
        }
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self.beta = Some(beta_from_alpha(alpha));
        self
    }
}
