//! The sweep process is first-order homogeneous but not Markov.
//!
//! For `t` points in random position with fair colors, the event "the whole
//! prefix is a monotone chain with alternating colors" has probability
//! `2/t! · 1/2^(t-1) = 1/(t! 2^(t-2))`. Given the first `t-1` points form such
//! a chain, the `t`-th extends it with probability `1/(2t)`: it must land
//! beyond the current extreme (probability `1/t`) and switch color (`1/2`).
//! The one-step probability of staying in the alternating-chain state is
//! `1/8` regardless of history, and `1/(2t) < 1/8` once `t ≥ 5`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{generate_instance, PointModel};
use crate::montecarlo::{count_hits, Proportion};
use crate::rng::derive_seed;

/// One-step probability of remaining in the alternating-chain state, as
/// published for the sweep algorithm's transition matrix. Not derived here.
pub fn reported_one_step() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(8))
}

fn require_t(t: u32, min: u32) -> Result<()> {
    if t < min {
        return Err(Error::InvalidParameter(format!("t = {t} must be at least {min}")));
    }
    Ok(())
}

/// `1 / (t! · 2^(t-2))`, for `t ≥ 2`.
pub fn alt_chain_probability(t: u32) -> Result<BigRational> {
    require_t(t, 2)?;
    let factorial: BigInt = (1..=t).map(BigInt::from).product();
    let den = factorial * (BigInt::one() << (t - 2));
    Ok(BigRational::new(BigInt::one(), den))
}

/// `1 / (2t)`, for `t ≥ 3`.
pub fn conditional_extension_exact(t: u32) -> Result<BigRational> {
    require_t(t, 3)?;
    Ok(BigRational::new(BigInt::one(), BigInt::from(2 * t as u64)))
}

/// Fraction of random `t`-point instances whose y-sequence (in x order) is
/// strictly monotone and whose colors alternate.
pub fn estimate_alt_chain_probability(t: u32, trials: u64, seed: u64) -> Result<Proportion> {
    require_t(t, 2)?;
    require_trials(trials)?;
    let hits = count_hits(trials, seed, |rng| {
        let inst = generate_instance(t as usize, rng.random(), PointModel::UniformSquare).expect("t >= 2");
        let pts = inst.points();
        let alternating = pts.windows(2).all(|w| w[0].color != w[1].color);
        let up = pts.windows(2).all(|w| w[0].y < w[1].y);
        let down = pts.windows(2).all(|w| w[0].y > w[1].y);
        alternating && (up || down)
    });
    Ok(Proportion::new(hits, trials))
}

/// Samples the conditional law directly: the first `t-1` points form a
/// monotone alternating chain (sorted uniforms, direction and starting color
/// by fair coins), then a fresh point with uniform y and fair color is
/// appended. Counts how often it extends the chain in the same direction with
/// the opposite color.
///
/// Draws per trial, in order: `t-1` uniforms, direction coin, coloring coin,
/// new y, new color coin.
pub fn estimate_conditional_extension(t: u32, trials: u64, seed: u64) -> Result<Proportion> {
    require_t(t, 3)?;
    require_trials(trials)?;
    let prefix = (t - 1) as usize;
    let hits = count_hits(trials, seed, |rng| {
        let mut ys: Vec<f64> = (0..prefix).map(|_| rng.random::<f64>()).collect();
        ys.sort_by(f64::total_cmp);
        let increasing: bool = rng.random();
        if !increasing {
            for y in &mut ys {
                *y = 1.0 - *y;
            }
        }
        let first_red: bool = rng.random();
        // Colors alternate from the first point, so the last one is red iff
        // the parities of `first_red` and the chain length agree.
        let last_red = first_red == (prefix % 2 == 1);
        let y: f64 = rng.random();
        let red: bool = rng.random();
        let last = ys[prefix - 1];
        let extends = if increasing { y > last } else { y < last };
        extends && red != last_red
    });
    Ok(Proportion::new(hits, trials))
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

/// Exact rational as decimal strings, since denominators outgrow any fixed-width integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalRecord {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalRecord {
    fn from(r: &BigRational) -> Self {
        RationalRecord { num: r.numer().to_string(), den: r.denom().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSection {
    pub joint: Proportion,
    pub joint_within_4_sigma: bool,
    pub conditional: Proportion,
    pub conditional_within_4_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub t: u32,
    pub exact_joint: RationalRecord,
    pub exact_joint_value: f64,
    pub exact_conditional: RationalRecord,
    pub exact_conditional_value: f64,
    pub one_step: RationalRecord,
    /// `1/8 - 1/(2t)`.
    pub gap: RationalRecord,
    pub gap_value: f64,
    /// `1/(2t) < 1/8`, which holds exactly when `t ≥ 5`.
    pub conditional_below_one_step: bool,
    pub empirical: EmpiricalSection,
    pub trials: u64,
    pub seed: u64,
}

pub fn markov_gap_report(t: u32, trials: u64, seed: u64) -> Result<CounterexampleReport> {
    require_t(t, 3)?;
    let joint = alt_chain_probability(t)?;
    let conditional = conditional_extension_exact(t)?;
    let one_step = reported_one_step();
    let gap = &one_step - &conditional;
    let to_f64 = |r: &BigRational| r.to_f64().unwrap_or(0.0);

    let joint_est = estimate_alt_chain_probability(t, trials, derive_seed(seed, 1))?;
    let cond_est = estimate_conditional_extension(t, trials, derive_seed(seed, 2))?;

    Ok(CounterexampleReport {
        t,
        exact_joint: (&joint).into(),
        exact_joint_value: to_f64(&joint),
        exact_conditional: (&conditional).into(),
        exact_conditional_value: to_f64(&conditional),
        one_step: (&one_step).into(),
        gap: (&gap).into(),
        gap_value: to_f64(&gap),
        conditional_below_one_step: conditional < one_step,
        empirical: EmpiricalSection {
            joint: joint_est,
            joint_within_4_sigma: joint_est.within_sigmas(to_f64(&joint), 4.0),
            conditional: cond_est,
            conditional_within_4_sigma: cond_est.within_sigmas(to_f64(&conditional), 4.0),
        },
        trials,
        seed,
    })
}
