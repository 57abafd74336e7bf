//! Laplace transforms of sampled sensor series and recovery of intensities
//! by regularized deconvolution.

mod deconv;
mod transform;

pub use deconv::{
    convolve, estimate_noise_sigma, volterra_deconvolve, volterra_deconvolve_with, Deconvolution, DeconvolutionOptions,
    DeconvolutionSystem, Regularization, TikhonovSolution,
};
pub use transform::{
    lambda_grid_advisor, lambda_grid_advisor_with, laplace_grid, laplace_transform, LambdaAdvice, LaplaceSamples,
    LaplaceValue, DEFAULT_LAMBDA_CAP,
};

/// Transforms whose truncation bound exceeds this fraction of `|Φ|` are not
/// used for identification.
pub const TRUNCATION_GUARD: f64 = 1e-3;
