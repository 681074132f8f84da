//! The disagreement-count chain D_t and the wedge probabilities driving it.

mod bounds;
mod kernel;
mod quad;
mod wedge;

pub use bounds::{
    bound_oracles, folded_angle, half_condition, lower_bound, probability_check, probability_lower_bound, upper_bound,
    wedge_angle, BoundCheck, BoundReport, ProbabilityBoundCheck, BOUND_SLACK,
};
pub use kernel::{
    band, band_before_absorption, binomial_pmf, evolve, evolve_with_band, exact_kernel, half_state, sample_w,
    sampled_kernel, step_correlated, step_model_with, tau_hit, DisagreementKernel, HittingResult, TauDistribution,
    DEFAULT_BAND_DELTA, MAX_DENSE_N,
};
pub use quad::{gauss_hermite, integrate};
pub use wedge::{expected_g_w, g, g_checked, g_w, g_w_monte_carlo, norm_cdf, w_variance, WedgeParams, G_W_TOL};
