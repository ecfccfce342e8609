//! Acceptance suite. Runs without the libtest harness so that it prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;

use rectmatch::concentration::{
    borel_cantelli_tail, bounded_difference_check, empirical_expectation, mcdiarmid_bound, superadditivity_all_splits,
    DifferenceProfile,
};
use rectmatch::counterexample::{
    alt_chain_probability, conditional_extension_exact, estimate_alt_chain_probability, estimate_conditional_extension,
    markov_gap_report,
};
use rectmatch::geometry::{generate_instance, Axis, MonotoneMap, PointModel};
use rectmatch::process::{
    expectation_bounds, random_chain, stationary, ChainSpec, DEFAULT_CONVERGENCE_CAP, DEFAULT_STATIONARY_TOL,
};
use rectmatch::solvers::{solve_bruteforce, solve_exact, SolveLimits, SolverChoice};

// Pinned tolerances and budgets.
const SIGMAS: f64 = 4.0;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const BOUNDED_DIFF_BUDGET: Duration = Duration::from_secs(600);
const JOINT_BUDGET_PER_T: Duration = Duration::from_secs(60);
const STATIONARY_RESIDUAL: f64 = 1e-10;
const TWO_STATE_TOL: f64 = 1e-12;
const MCDIARMID_TOL: f64 = 1e-12;
const BOREL_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn limits() -> SolveLimits {
    SolveLimits::default()
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for seed in 0u64..1000 {
        let n = 4 + (seed % 6) as usize;
        let inst = generate_instance(n, seed, PointModel::UniformSquare).map_err(|e| e.to_string())?;
        let ex = solve_exact(&inst, &limits()).map_err(|e| e.to_string())?;
        let bf = solve_bruteforce(&inst).map_err(|e| e.to_string())?;
        if ex.matched_count() != bf.matched_count() || ex.matching != bf.matching {
            mismatches.push(seed);
        }
    }
    let t = start.elapsed();
    check(
        mismatches.is_empty() && t < ORACLE_BUDGET,
        format!("1000 instances, n in 4..=9, mismatching seeds {mismatches:?}, {:.2?}", t),
    )
}

fn c2_bounded_differences() -> Outcome {
    let start = Instant::now();
    let r = bounded_difference_check(12, 500, 3, 2, SolverChoice::Exact, PointModel::UniformSquare, &limits())
        .map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let total = r.position_histogram.iter().sum::<u64>() + r.color_histogram.iter().sum::<u64>();
    check(
        r.violations == 0
            && r.max_position_delta <= 4
            && r.max_color_delta <= 2
            && total == 3000
            && t < BOUNDED_DIFF_BUDGET,
        format!(
            "{total} perturbations, max |dM| position {} color {}, violations {}, {:.2?}",
            r.max_position_delta, r.max_color_delta, r.violations, t
        ),
    )
}

fn c3_superadditivity() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for seed in 0u64..200 {
        let inst = generate_instance(12, seed, PointModel::UniformSquare).map_err(|e| e.to_string())?;
        for r in superadditivity_all_splits(&inst, SolverChoice::Exact, &limits()).map_err(|e| e.to_string())? {
            checked += 1;
            if !r.holds {
                failures.push((seed, r.k));
            }
        }
    }
    check(failures.is_empty() && checked == 200 * 11, format!("{checked} splits, violations {failures:?}"))
}

fn c4_joint_probability() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for t in [3u32, 4, 5] {
        let start = Instant::now();
        let p = alt_chain_probability(t).map_err(|e| e.to_string())?;
        let est = estimate_alt_chain_probability(t, 1_000_000, 0xC4 + t as u64).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let pf = p.to_f64().unwrap();
        let z = (est.frequency - pf) / est.sigma_at(pf);
        ok &= est.within_sigmas(pf, SIGMAS) && elapsed < JOINT_BUDGET_PER_T;
        parts.push(format!("t={t}: {}/{} vs {} (z={z:+.2}, {:.2?})", est.hits, est.trials, p, elapsed));
    }
    check(ok, parts.join("; "))
}

fn c5_conditional() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for t in [3u32, 5, 10] {
        let p = conditional_extension_exact(t).map_err(|e| e.to_string())?.to_f64().unwrap();
        let est = estimate_conditional_extension(t, 100_000, 0xC5 + t as u64).map_err(|e| e.to_string())?;
        let z = (est.frequency - p) / est.sigma_at(p);
        ok &= est.within_sigmas(p, SIGMAS);
        parts.push(format!("t={t}: {:.5} vs {p:.5} (z={z:+.2})", est.frequency));
    }
    let r = markov_gap_report(5, 1000, 5).map_err(|e| e.to_string())?;
    ok &= r.conditional_below_one_step && r.exact_conditional_value == 0.1;
    parts.push(format!("t=5: 1/10 < 1/8 is {}", r.conditional_below_one_step));
    check(ok, parts.join("; "))
}

fn test_chains() -> Vec<ChainSpec> {
    (0u64..100).map(|k| random_chain(2 + (k % 5) as usize, 6000 + k)).collect()
}

fn c6_expectation_sandwich() -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for (k, c) in test_chains().iter().enumerate() {
        for eps in [0.05, 0.1] {
            let n0 = expectation_bounds(c, eps, 1, DEFAULT_CONVERGENCE_CAP).map_err(|e| e.to_string())?.n0;
            let n = (10 * n0).max(100);
            let r = expectation_bounds(c, eps, n, DEFAULT_CONVERGENCE_CAP).map_err(|e| e.to_string())?;
            let slack = eps + r.n0 as f64 * r.states as f64 * r.m / n as f64;
            cases += 1;
            if !r.sandwich_holds() || (r.exact / n as f64 - r.alpha).abs() > slack || r.degenerate {
                failures.push((k, eps));
            }
        }
    }
    check(failures.is_empty(), format!("{cases} cases, N in 2..=6, failures {failures:?}"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn c7_stationary() -> Outcome {
    let mut chains = test_chains();
    for f in ["two_state.json", "symmetric.json", "random6.json"] {
        let text = std::fs::read_to_string(fixture(f)).map_err(|e| e.to_string())?;
        chains.push(ChainSpec::from_json(&text).map_err(|e| e.to_string())?);
    }
    let mut worst: f64 = 0.0;
    for c in &chains {
        let s = stationary(c, DEFAULT_STATIONARY_TOL).map_err(|e| e.to_string())?;
        worst = worst.max((&s * c.q() - &s).amax());
    }
    let two = ChainSpec::from_q_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], vec![0.0, 2.0], vec![1.0, 0.0])
        .map_err(|e| e.to_string())?;
    let s = stationary(&two, DEFAULT_STATIONARY_TOL).map_err(|e| e.to_string())?;
    let err = (s[0] - 2.0 / 3.0).abs().max((s[1] - 1.0 / 3.0).abs());
    check(
        worst <= STATIONARY_RESIDUAL && err <= TWO_STATE_TOL,
        format!("{} chains, max |sQ - s| = {worst:.1e}; two-state error {err:.1e}", chains.len()),
    )
}

fn c8_tail_arithmetic() -> Outcome {
    let d = DifferenceProfile::new(1000).map_err(|e| e.to_string())?;
    let m = mcdiarmid_bound(&d.d, 0.1, false).map_err(|e| e.to_string())?;
    let m_err = (m - (-1.0f64).exp()).abs();
    let b = borel_cantelli_tail(2.0, 1).map_err(|e| e.to_string())?;
    let r = (-0.1f64).exp();
    let b_err = (b - 2.0 * r / (1.0 - r)).abs();
    check(
        m_err <= MCDIARMID_TOL && b_err <= BOREL_TOL,
        format!("mcdiarmid {m:.15} (error {m_err:.1e}); partial sum {b:.10} (error {b_err:.1e})"),
    )
}

fn c9_structural() -> Outcome {
    let mut odd = 0;
    let mut changed = Vec::new();
    for seed in 0u64..200 {
        let n = 2 + (seed % 11) as usize;
        let inst = generate_instance(n, 9000 + seed, PointModel::UniformSquare).map_err(|e| e.to_string())?;
        let m = solve_exact(&inst, &limits()).map_err(|e| e.to_string())?.matched_count();
        odd += m % 2;
        for map in MonotoneMap::ALL {
            for axis in [Axis::X, Axis::Y] {
                let mapped = match inst.apply_monotone_map(map, axis) {
                    Ok(i) => i,
                    Err(e) => return Err(format!("seed {seed}: {e}")),
                };
                let mm = solve_exact(&mapped, &limits()).map_err(|e| e.to_string())?.matched_count();
                odd += mm % 2;
                if mm != m {
                    changed.push((seed, map, axis));
                }
            }
        }
    }
    let trials = 100_000;
    let e = empirical_expectation(2, trials, 0xC9, SolverChoice::Exact, PointModel::UniformSquare, &limits())
        .map_err(|e| e.to_string())?;
    let sigma = 0.5 / (trials as f64).sqrt();
    let z = (e.mean - 0.5) / sigma;
    check(
        odd == 0 && changed.is_empty() && z.abs() <= SIGMAS,
        format!("odd counts {odd}, map-sensitive instances {changed:?}, E[M(2)/2] = {:.5} (z={z:+.2})", e.mean),
    )
}

fn run_cli(args: &[&str], workers: usize, out: &Path) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rectmatch"));
    cmd.args(args).arg("--workers").arg(workers.to_string()).arg("--output").arg(out);
    let status = cmd.output().map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} exited {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn c10_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inst = dir.path().join("inst.csv");
    let two = fixture("two_state.json");
    let six = fixture("random6.json");
    std::fs::write(&inst, run_cli(&["gen", "--n", "14", "--seed", "5"], 1, &dir.path().join("seed.csv"))?)
        .map_err(|e| e.to_string())?;
    let commands: Vec<Vec<String>> = vec![
        vec!["gen", "--n", "30", "--seed", "11"],
        vec!["gen", "--n", "8", "--seed", "11", "--model", "grid-x"],
        vec!["solve", "--input", inst.to_str().unwrap()],
        vec!["solve", "--input", inst.to_str().unwrap(), "--solver", "greedy"],
        vec!["chain", "--input", two.to_str().unwrap(), "--n", "200"],
        vec!["chain", "--input", six.to_str().unwrap(), "--n", "500", "--epsilon", "0.05"],
        vec!["counterexample", "--t", "5", "--trials", "200000", "--seed", "3"],
        vec!["concentration", "--check", "bounded-diff", "--n", "12", "--trials", "200", "--seed", "4"],
        vec!["concentration", "--check", "tail", "--n", "12", "--epsilon", "0.25", "--trials", "2000", "--seed", "4"],
        vec!["concentration", "--check", "fekete", "--ns", "2,4,6,8", "--trials", "2000", "--seed", "4"],
        vec!["concentration", "--check", "borel", "--epsilon", "2", "--n0", "3"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let mut differing = Vec::new();
    for (k, c) in commands.iter().enumerate() {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        let a = run_cli(&args, 1, &dir.path().join(format!("{k}-a")))?;
        let b = run_cli(&args, 8, &dir.path().join(format!("{k}-b")))?;
        let c2 = run_cli(&args, 1, &dir.path().join(format!("{k}-c")))?;
        if a.is_empty() || a != b || a != c2 {
            differing.push(args.join(" "));
        }
    }
    check(differing.is_empty(), format!("{} commands at 1 and 8 workers, differing: {differing:?}", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("bounded differences", c2_bounded_differences),
        ("superadditivity", c3_superadditivity),
        ("alternating-chain joint probability", c4_joint_probability),
        ("alternating-chain conditional probability", c5_conditional),
        ("expectation sandwich", c6_expectation_sandwich),
        ("stationary solver", c7_stationary),
        ("tail-bound arithmetic", c8_tail_arithmetic),
        ("structural invariants", c9_structural),
        ("CLI reproducibility", c10_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name} [{:.2?}]: {detail}", i + 1, start.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
