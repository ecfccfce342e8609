use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

pub const STOCHASTIC_TOL: f64 = 1e-9;
pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_CONVERGENCE_CAP: usize = 1_000_000;

/// A finite-state process with time-independent one-step transition
/// probabilities.
///
/// `P` is column-stochastic: `P[i][j] = Pr(X_t = e_i | X_{t-1} = e_j)`.
/// All computations use the row-stochastic `Q = Pᵀ` with row vectors,
/// `p_t = p_{t-1} · Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    labels: Vec<String>,
    p: DMatrix<f64>,
    rewards: DVector<f64>,
    initial: RowDVector<f64>,
}

/// On-disk chain description. `P` is given as rows of the column-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub states: Vec<String>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub p1: Vec<f64>,
}

impl ChainSpec {
    /// `p_rows[i][j] = Pr(X_t = e_i | X_{t-1} = e_j)`.
    ///
    /// Checks shapes, finiteness, nonnegativity, rewards and the initial
    /// distribution. Stochasticity of `P` is reported by [`validate_chain`].
    pub fn new(labels: Vec<String>, p_rows: &[Vec<f64>], rewards: Vec<f64>, initial: Vec<f64>) -> Result<ChainSpec> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::MalformedMatrix("no states".into()));
        }
        if p_rows.len() != n || p_rows.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedMatrix(format!("P must be {n}x{n}")));
        }
        if let Some(v) = p_rows.iter().flatten().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::MalformedMatrix(format!("entry {v} is negative or not finite")));
        }
        if rewards.len() != n {
            return Err(Error::MalformedMatrix(format!("f has length {}, expected {n}", rewards.len())));
        }
        if let Some(v) = rewards.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!("reward {v} is negative or not finite")));
        }
        if initial.len() != n {
            return Err(Error::InvalidDistribution(format!("p1 has length {}, expected {n}", initial.len())));
        }
        if initial.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution("p1 has a negative or non-finite entry".into()));
        }
        let total: f64 = initial.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!("p1 sums to {total}")));
        }
        Ok(ChainSpec {
            labels,
            p: DMatrix::from_fn(n, n, |i, j| p_rows[i][j]),
            rewards: DVector::from_vec(rewards),
            initial: RowDVector::from_vec(initial),
        })
    }

    /// Builds a chain from the row-stochastic `Q`, `q_rows[j][i] = Pr(e_j → e_i)`.
    pub fn from_q_rows(q_rows: &[Vec<f64>], rewards: Vec<f64>, initial: Vec<f64>) -> Result<ChainSpec> {
        let n = q_rows.len();
        if q_rows.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedMatrix(format!("Q must be {n}x{n}")));
        }
        let p_rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q_rows[j][i]).collect()).collect();
        let labels = (1..=n).map(|i| format!("e{i}")).collect();
        ChainSpec::new(labels, &p_rows, rewards, initial)
    }

    pub fn from_file(file: &ChainFile) -> Result<ChainSpec> {
        ChainSpec::new(file.states.clone(), &file.p, file.f.clone(), file.p1.clone())
    }

    pub fn from_json(text: &str) -> Result<ChainSpec> {
        let file: ChainFile = serde_json::from_str(text)?;
        ChainSpec::from_file(&file)
    }

    pub fn to_file(&self) -> ChainFile {
        let n = self.len();
        ChainFile {
            states: self.labels.clone(),
            p: (0..n).map(|i| (0..n).map(|j| self.p[(i, j)]).collect()).collect(),
            f: self.rewards.iter().copied().collect(),
            p1: self.initial.iter().copied().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Column-stochastic transition matrix.
    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Row-stochastic transition matrix `Pᵀ`.
    pub fn q(&self) -> DMatrix<f64> {
        self.p.transpose()
    }

    pub fn rewards(&self) -> &DVector<f64> {
        &self.rewards
    }

    pub fn initial(&self) -> &RowDVector<f64> {
        &self.initial
    }

    pub fn max_reward(&self) -> f64 {
        self.rewards.iter().copied().fold(0.0, f64::max)
    }

    /// Simultaneously permutes states: new state `k` is old state `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> ChainSpec {
        let n = self.len();
        assert_eq!(perm.len(), n);
        ChainSpec {
            labels: perm.iter().map(|&k| self.labels[k].clone()).collect(),
            p: DMatrix::from_fn(n, n, |i, j| self.p[(perm[i], perm[j])]),
            rewards: DVector::from_fn(n, |i, _| self.rewards[perm[i]]),
            initial: RowDVector::from_fn(n, |_, i| self.initial[perm[i]]),
        }
    }
}

/// Random chain with every transition probability positive (hence irreducible
/// and aperiodic): each column of `P` is a vector of i.i.d. uniforms, normalized.
/// Rewards are uniform on [0, 4); `p1` is normalized uniforms.
pub fn random_chain(n_states: usize, seed: u64) -> ChainSpec {
    assert!(n_states >= 1);
    let mut rng = rng_from_seed(seed);
    let normalized = |rng: &mut Rng| {
        let v: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let q_rows: Vec<Vec<f64>> = (0..n_states).map(|_| normalized(&mut rng)).collect();
    let rewards = (0..n_states).map(|_| 4.0 * rng.random::<f64>()).collect();
    let initial = normalized(&mut rng);
    ChainSpec::from_q_rows(&q_rows, rewards, initial).expect("construction is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainValidation {
    pub stochastic: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of the support graph (meaningful when irreducible).
    pub period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reach(n: usize, edge: impl Fn(usize, usize) -> bool, from: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    level[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if level[v].is_none() && edge(u, v) {
                level[v] = Some(level[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

/// Stochasticity, irreducibility (strong connectivity of the support graph),
/// and aperiodicity (gcd of `level(u) + 1 - level(v)` over support edges `u → v`,
/// with BFS levels from state 0).
pub fn validate_chain(c: &ChainSpec) -> ChainValidation {
    let n = c.len();
    let q = c.q();
    let stochastic = (0..n).all(|j| {
        let row = q.row(j);
        row.iter().all(|&v| v <= 1.0) && (row.sum() - 1.0).abs() <= STOCHASTIC_TOL
    });

    let forward = |u: usize, v: usize| q[(u, v)] > 0.0;
    let levels = reach(n, forward, 0);
    let back = reach(n, |u, v| q[(v, u)] > 0.0, 0);
    let irreducible = levels.iter().all(Option::is_some) && back.iter().all(Option::is_some);

    let mut period = 0;
    for u in 0..n {
        for v in 0..n {
            if let (true, Some(lu), Some(lv)) = (forward(u, v), levels[u], levels[v]) {
                period = gcd(period, (lu + 1).abs_diff(lv));
            }
        }
    }

    ChainValidation { stochastic, irreducible, aperiodic: period == 1, period }
}

/// Errors unless the chain is stochastic, irreducible and aperiodic.
pub fn require_valid(c: &ChainSpec) -> Result<ChainValidation> {
    let v = validate_chain(c);
    if !v.stochastic {
        return Err(Error::NotStochastic(format!("columns of P must sum to 1 within {STOCHASTIC_TOL:e}")));
    }
    if !v.irreducible {
        return Err(Error::NotIrreducible);
    }
    if !v.aperiodic {
        return Err(Error::Periodic { period: v.period });
    }
    Ok(v)
}

fn residual(s: &RowDVector<f64>, q: &DMatrix<f64>) -> f64 {
    (s * q - s).amax()
}

/// Stationary distribution `s = s·Q`, `Σ s = 1`.
///
/// Solved directly from `(Qᵀ - I) sᵀ = 0` with one equation replaced by the
/// normalization, then polished with power steps until `‖sQ - s‖∞ ≤ tol`.
pub fn stationary(c: &ChainSpec, tol: f64) -> Result<RowDVector<f64>> {
    require_valid(c)?;
    let n = c.len();
    let q = c.q();
    let mut a = q.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let solved = a.lu().solve(&b).ok_or(Error::NoConvergence { iterations: 0, residual: f64::NAN })?;

    let mut s = RowDVector::from_fn(n, |_, i| solved[i].max(0.0));
    s /= s.sum();
    let mut iterations = 0;
    let mut res = residual(&s, &q);
    while res > tol {
        if iterations >= DEFAULT_CONVERGENCE_CAP {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        s = &s * &q;
        s /= s.sum();
        iterations += 1;
        res = residual(&s, &q);
    }
    Ok(s)
}

/// Power iteration from the uniform distribution. Independent of the direct
/// solve in [`stationary`]; used to cross-check it.
pub fn stationary_by_power_iteration(c: &ChainSpec, tol: f64, max_iter: usize) -> Result<RowDVector<f64>> {
    require_valid(c)?;
    let n = c.len();
    let q = c.q();
    let mut s = RowDVector::from_element(n, 1.0 / n as f64);
    for _ in 0..max_iter {
        let next = &s * &q;
        let next = &next / next.sum();
        let delta = (&next - &s).amax();
        s = next;
        if delta <= tol {
            return Ok(s);
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: residual(&s, &q) })
}

/// Stationary expected reward `f · s`.
pub fn alpha(c: &ChainSpec) -> Result<f64> {
    let s = stationary(c, DEFAULT_STATIONARY_TOL)?;
    Ok(s.transpose().dot(c.rewards()))
}

/// Smallest `t ≥ 1` with `|Qᵗ[i][j] - s_j| < delta` for all `i, j`.
///
/// The entrywise distance is nonincreasing in `t` (`Qᵗ⁺¹ - Q̃ = Q (Qᵗ - Q̃)` and
/// rows of `Q` are convex weights), so the bound holds for every later power too.
pub fn convergence_index(c: &ChainSpec, delta: f64, cap: usize) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let s = stationary(c, DEFAULT_STATIONARY_TOL)?;
    let q = c.q();
    let n = c.len();
    let mut power = q.clone();
    for t in 1..=cap {
        let dist = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (power[(i, j)] - s[j]).abs())
            .fold(0.0, f64::max);
        if dist < delta {
            return Ok(t);
        }
        power = &power * &q;
    }
    Err(Error::CapExceeded { cap })
}

/// Samples a path `X_1..X_len` of the chain viewed as a Markov chain.
pub fn sample_path(c: &ChainSpec, len: usize, rng: &mut Rng) -> Vec<usize> {
    let q = c.q();
    let rows: Vec<WeightedIndex<f64>> =
        (0..c.len()).map(|j| WeightedIndex::new(q.row(j).iter().copied()).expect("row is a distribution")).collect();
    let first = WeightedIndex::new(c.initial().iter().copied()).expect("p1 is a distribution");
    let mut path = Vec::with_capacity(len);
    if len == 0 {
        return path;
    }
    let mut x = first.sample(rng);
    path.push(x);
    for _ in 1..len {
        x = rows[x].sample(rng);
        path.push(x);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> ChainSpec {
        ChainSpec::from_q_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]], vec![0.0, 2.0], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn validation_examples() {
        let full = two_state(0.3, 0.6);
        assert_eq!(
            validate_chain(&full),
            ChainValidation { stochastic: true, irreducible: true, aperiodic: true, period: 1 }
        );
        let swap = two_state(1.0, 1.0);
        let v = validate_chain(&swap);
        assert!(v.irreducible && !v.aperiodic);
        assert_eq!(v.period, 2);
        assert!(matches!(require_valid(&swap), Err(Error::Periodic { period: 2 })));

        let block = ChainSpec::from_q_rows(
            &[vec![0.5, 0.5, 0.0, 0.0], vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.5], vec![0.0, 0.0, 0.5, 0.5]],
            vec![0.0; 4],
            vec![0.25; 4],
        )
        .unwrap();
        assert!(!validate_chain(&block).irreducible);
        assert!(matches!(stationary(&block, 1e-12), Err(Error::NotIrreducible)));
    }

    #[test]
    fn three_cycle_has_period_three() {
        let c = ChainSpec::from_q_rows(
            &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
            vec![1.0; 3],
            vec![1.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(validate_chain(&c).period, 3);
    }

    #[test]
    fn malformed_inputs() {
        let bad = ChainSpec::from_q_rows(&[vec![1.0, 0.0]], vec![0.0], vec![1.0]);
        assert!(matches!(bad, Err(Error::MalformedMatrix(_))));
        let neg = ChainSpec::from_q_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]], vec![0.0, 0.0], vec![1.0, 0.0]);
        assert!(matches!(neg, Err(Error::MalformedMatrix(_))));
        let p1 = ChainSpec::from_q_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]], vec![0.0, 0.0], vec![0.7, 0.7]);
        assert!(matches!(p1, Err(Error::InvalidDistribution(_))));
        let unnormalized =
            ChainSpec::from_q_rows(&[vec![0.5, 0.6], vec![0.5, 0.5]], vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(!validate_chain(&unnormalized).stochastic);
        assert!(matches!(alpha(&unnormalized), Err(Error::NotStochastic(_))));
    }

    #[test]
    fn two_state_closed_form() {
        let c = ChainSpec::from_q_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], vec![0.0, 2.0], vec![1.0, 0.0]).unwrap();
        let s = stationary(&c, 1e-12).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() <= 1e-12);
        assert!((s[1] - 1.0 / 3.0).abs() <= 1e-12);
        assert!((alpha(&c).unwrap() - 2.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn alpha_examples() {
        let zero = ChainSpec::from_q_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(alpha(&zero).unwrap(), 0.0);
        let constant =
            ChainSpec::from_q_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], vec![3.0, 3.0], vec![1.0, 0.0]).unwrap();
        assert!((alpha(&constant).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_chain() {
        let c = two_state(0.5, 0.5);
        let s = stationary(&c, 1e-12).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15);
        assert_eq!(convergence_index(&c, 1e-6, 10).unwrap(), 1);
    }

    #[test]
    fn rank_one_q_converges_immediately() {
        let s = [0.2, 0.3, 0.5];
        let rows = vec![s.to_vec(); 3];
        let c = ChainSpec::from_q_rows(&rows, vec![1.0, 0.0, 2.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(convergence_index(&c, 1e-9, 5).unwrap(), 1);
    }

    #[test]
    fn power_iteration_agrees_on_random_chains() {
        for seed in 0..50 {
            let c = random_chain(6, seed);
            let direct = stationary(&c, 1e-12).unwrap();
            let power = stationary_by_power_iteration(&c, 1e-14, 100_000).unwrap();
            assert!((&direct - &power).amax() <= 1e-9, "seed {seed}");
            assert!(residual(&direct, &c.q()) <= 1e-12);
            assert!((direct.sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn convergence_index_tracks_spectral_decay() {
        // n0 should be within a small factor of log(delta) / log|lambda_2|.
        for seed in 0..20 {
            let c = random_chain(6, 100 + seed);
            let delta = 1e-3;
            let n0 = convergence_index(&c, delta, 10_000).unwrap();
            let eig = c.q().complex_eigenvalues();
            let mut mods: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
            mods.sort_by(|a, b| b.total_cmp(a));
            let lambda2 = mods[1];
            let estimate = (delta.ln() / lambda2.ln()).max(1.0);
            assert!(
                (n0 as f64) <= 3.0 * estimate + 3.0 && (n0 as f64) >= estimate / 4.0 - 1.0,
                "seed {seed}: n0 = {n0}, estimate {estimate}"
            );
        }
    }

    #[test]
    fn cap_exceeded() {
        let c = two_state(0.001, 0.001);
        assert!(matches!(convergence_index(&c, 1e-9, 3), Err(Error::CapExceeded { cap: 3 })));
        assert!(convergence_index(&c, 0.0, 3).is_err());
    }

    #[test]
    fn alpha_invariant_under_relabeling() {
        let c = random_chain(5, 77);
        let perm = [3, 0, 4, 1, 2];
        let a = alpha(&c).unwrap();
        let b = alpha(&c.permuted(&perm)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_transposes() {
        let text = r#"{"states":["a","b"],"P":[[0.9,0.2],[0.1,0.8]],"f":[0,2],"p1":[1,0]}"#;
        let c = ChainSpec::from_json(text).unwrap();
        // Column j of P is the distribution out of state j.
        assert_eq!(c.q()[(0, 1)], 0.1);
        assert_eq!(c.q()[(1, 0)], 0.2);
        assert_eq!(ChainSpec::from_file(&c.to_file()).unwrap(), c);
        assert!((alpha(&c).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_paths_follow_transitions() {
        let c = ChainSpec::from_q_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], vec![0.0, 2.0], vec![1.0, 0.0]).unwrap();
        let mut rng = rng_from_seed(3);
        let path = sample_path(&c, 200_000, &mut rng);
        assert_eq!(path[0], 0);
        let ones = path.iter().filter(|&&x| x == 1).count() as f64 / path.len() as f64;
        assert!((ones - 1.0 / 3.0).abs() < 0.01, "{ones}");
    }
}
