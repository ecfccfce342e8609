//! Finite-state processes whose one-step transition probabilities do not
//! depend on time (first-order homogeneity, which is weaker than the Markov
//! property): stationary distribution, stationary reward rate, convergence
//! of matrix powers, and bounds on expected reward sums.

mod bounds;
mod chain;
mod homogeneity;

pub use bounds::{exact_expected_sum, expectation_bounds, ExpectationBounds};
pub use chain::{
    alpha, convergence_index, random_chain, require_valid, sample_path, stationary, stationary_by_power_iteration,
    validate_chain, ChainFile, ChainSpec, ChainValidation, DEFAULT_CONVERGENCE_CAP, DEFAULT_STATIONARY_TOL,
    STOCHASTIC_TOL,
};
pub use homogeneity::{
    empirical_transition_matrix, transition_counts, transition_homogeneity, CellDiscrepancy, HomogeneityReport,
    TransitionEstimate, DEFAULT_MIN_TRANSITIONS,
};
