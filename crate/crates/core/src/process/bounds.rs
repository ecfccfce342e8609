//! Bounds on the expected reward sum `E[f(X_1) + ... + f(X_n)]`.
//!
//! With `m = max f`, `δ = ε / (N m)` and `n0` the convergence index at `δ`,
//! for `n > n0`:
//!
//! ```text
//! (n - n0)(α - δ N m)  ≤  E[Σ f(X_t)]  ≤  n0 N m + (n - n0)(α + δ N m)
//! ```

use serde::Serialize;

use super::chain::{alpha, convergence_index, ChainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationBounds {
    pub n: usize,
    pub epsilon: f64,
    pub states: usize,
    pub alpha: f64,
    /// Largest reward.
    pub m: f64,
    /// `epsilon / (N m)`; absent when every reward is zero.
    pub delta: Option<f64>,
    pub n0: usize,
    pub lower: f64,
    pub upper: f64,
    /// Exact expected sum for this `n`.
    pub exact: f64,
    /// `n ≤ n0`: the bounds fall back to `[0, n m]`.
    pub degenerate: bool,
    pub zero_reward: bool,
}

impl ExpectationBounds {
    pub fn sandwich_holds(&self) -> bool {
        self.lower <= self.exact && self.exact <= self.upper
    }
}

/// `f · p_1 (Q⁰ + Q¹ + ... + Qⁿ⁻¹)`, accumulated as `p_t = p_{t-1} Q`.
pub fn exact_expected_sum(c: &ChainSpec, n: usize) -> f64 {
    let q = c.q();
    let mut p = c.initial().clone();
    let mut total = 0.0;
    for t in 0..n {
        total += p.transpose().dot(c.rewards());
        if t + 1 < n {
            p = &p * &q;
        }
    }
    total
}

pub fn expectation_bounds(c: &ChainSpec, epsilon: f64, n: usize, cap: usize) -> Result<ExpectationBounds> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let states = c.len();
    let m = c.max_reward();
    if m == 0.0 {
        // Validation still applies even though every term vanishes.
        super::chain::require_valid(c)?;
        return Ok(ExpectationBounds {
            n,
            epsilon,
            states,
            alpha: 0.0,
            m,
            delta: None,
            n0: 0,
            lower: 0.0,
            upper: 0.0,
            exact: 0.0,
            degenerate: false,
            zero_reward: true,
        });
    }

    let a = alpha(c)?;
    let delta = epsilon / (states as f64 * m);
    let n0 = convergence_index(c, delta, cap)?;
    let exact = exact_expected_sum(c, n);
    let slack = delta * states as f64 * m;
    let (lower, upper, degenerate) = if n > n0 {
        let tail = (n - n0) as f64;
        (tail * (a - slack), n0 as f64 * states as f64 * m + tail * (a + slack), false)
    } else {
        (0.0, n as f64 * m, true)
    };

    Ok(ExpectationBounds {
        n,
        epsilon,
        states,
        alpha: a,
        m,
        delta: Some(delta),
        n0,
        lower,
        upper,
        exact,
        degenerate,
        zero_reward: false,
    })
}
