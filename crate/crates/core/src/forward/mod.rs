//! Forward models: heat kernels, resolvent Green functions, the free-space
//! Duhamel oracle and a finite-difference solver on an interval.

mod duhamel;
mod fd;
mod green;
mod kernels;

pub use duhamel::{convolve_moments, free_space_response, free_space_response_in, FreeSpaceMedium, KernelMoments};
pub use fd::{crank_nicolson_1d, field_at, trace_at, CnOptions, CnSolution};
pub use green::{
    green_1d_asymptotic, green_1d_asymptotic_with, green_exact, green_laplace, green_laplace_asymptotic,
    green_laplace_with_diffusivity, GreenEval, GreenMode, DEFAULT_DECAY_EXPONENT,
};
pub use kernels::{heat_kernel, heat_kernel_with_diffusivity, v_kernel, HeatKernel, Kernel, VKernel};
