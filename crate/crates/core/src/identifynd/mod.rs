//! Single-source identification in two and three dimensions, plus the
//! identifiability checks for several sources.
//!
//! Distance differences come from the exponential decay rate of transform
//! ratios between sensors; the prefactor of the ratio then fixes the absolute
//! distances, and the source is found by intersecting spheres (circles).

mod diagnostics;
pub mod examples;
mod geometry;
mod locate;
mod ratios;

pub use diagnostics::{build_a0, drift_phase, sufficiency_check, A0Matrix};
pub use geometry::{
    circumcenter, condition_d_check, multilaterate, ConditionD, Multilateration, INCONSISTENCY_THRESHOLD,
};
pub use locate::{
    alpha_ladder, locate_nd, recover_intensity_all, recover_intensity_nd, DistanceEstimates, IntensityND,
    PairDifference, PairFit, RecoveryND, DEGENERATE_FLOOR, DEGENERATE_SIGMAS, SPREAD_THRESHOLD,
};
pub use ratios::{
    distance_differences, fit_ratio, g_ratio, pairwise_distance_solve, pairwise_from_log_rho, pairwise_std_errors,
    DifferenceFit, GRatio, RatioFit, RHO_GUARD,
};
