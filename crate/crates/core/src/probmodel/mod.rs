//! The random partition process and its Gaussian point estimate.
//!
//! Every block is sent independently and uniformly to one of `l` bins. The
//! statistic X stacks, for each of the first `l - 1` bins, the sum of
//! `phi(b)` over the blocks in that bin; a large set exists iff
//! `X = E[X]` has positive probability. This module computes the exact
//! moments of X, its characteristic function, the norms used to control
//! it, the Gaussian estimate `det(L(Phi)) f_Y(E[X])` with explicit error
//! bounds, and exact and sampled values of `Pr[X = E[X]]` for small systems.
//!
//! Unspecified absolute constants are carried in [`Constants`] and default
//! to 1; every verdict is conditional on them.

mod bounds;
mod fourier;
mod moments;
mod sampling;

pub use bounds::{
    bounds_I, bounds_I_strict, design_threshold, estimate_success_probability,
    largeset_threshold, norm_constant_M, BoundInputs, Constants, EstimateOptions,
    EstimateReport, IBounds, ThresholdReport, ThresholdVerdict, Violation,
};
pub use fourier::{
    char_fn_X, check_f_approx, check_f_bound, f_multiplier, gaussian_char, norms, r_norm,
    NormReport,
};
pub use moments::{
    covariance, gram_matrix, log_gaussian_density_at_mean, log_gaussian_density_from_det,
    m_factor, mean_is_integral, mean_x, MomentData,
};
pub use sampling::{
    exact_as_f64, exact_hit_probability, monte_carlo_hit_probability, sample_assignment,
    sample_into, statistic_X, Assignment, ChunkCount, ExactReport, McConfig, McReport,
    DEFAULT_EXACT_CAP,
};
