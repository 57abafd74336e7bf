//! Free-space heat kernels and the distance kernels `V_γ`.

use crate::{Error, Result};
use core::f64::consts::PI;

fn check_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

/// `(4πt)^{-n/2} exp(-r²/4t)`.
pub fn heat_kernel(n: usize, r: f64, t: f64) -> Result<f64> {
    heat_kernel_with_diffusivity(n, r, t, 1.0)
}

/// Heat kernel of `u_t = D Δu`: `(4πDt)^{-n/2} exp(-r²/4Dt)`.
pub fn heat_kernel_with_diffusivity(n: usize, r: f64, t: f64, diffusivity: f64) -> Result<f64> {
    check_dim(n)?;
    if !(t > 0.0) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    if !(diffusivity > 0.0) {
        return Err(Error::NonPositive { name: "diffusivity", value: diffusivity });
    }
    Ok(heat_unchecked(n, r, t, diffusivity))
}

#[inline]
pub(crate) fn heat_unchecked(n: usize, r: f64, t: f64, d: f64) -> f64 {
    let s = 4.0 * PI * d * t;
    let pre = match n {
        1 => 1.0 / s.sqrt(),
        2 => 1.0 / s,
        _ => 1.0 / (s * s.sqrt()),
    };
    pre * (-r * r / (4.0 * d * t)).exp()
}

/// Kernel `V_γ(t)` whose Laplace transform is the leading-order resolvent
/// decay at distance `γ`.
///
/// - `n = 1`: `e^{-γ²/4t}/√(πt)`, transform `e^{-√λγ}/√λ`;
/// - `n = 2`: `e^{-γ²/4t}/(4πt)`;
/// - `n = 3`: `γ e^{-γ²/4t}/(2√π t^{3/2})`, transform `e^{-√λγ}`.
pub fn v_kernel(n: usize, gamma: f64, t: f64) -> Result<f64> {
    check_dim(n)?;
    if !(gamma > 0.0) {
        return Err(Error::NonPositive { name: "gamma", value: gamma });
    }
    if !(t > 0.0) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    Ok(v_unchecked(n, gamma, t))
}

#[inline]
pub(crate) fn v_unchecked(n: usize, gamma: f64, t: f64) -> f64 {
    let e = (-gamma * gamma / (4.0 * t)).exp();
    match n {
        1 => e / (PI * t).sqrt(),
        2 => e / (4.0 * PI * t),
        _ => gamma * e / (2.0 * PI.sqrt() * t * t.sqrt()),
    }
}

/// A causal convolution kernel `K(t)`, `t > 0`.
pub trait Kernel {
    fn eval(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Kernel for F {
    fn eval(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Free-space Duhamel kernel `e^{-λ₀t} (4πDt)^{-n/2} e^{-r²/4Dt}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatKernel {
    pub dim: usize,
    pub distance: f64,
    pub reaction: f64,
    pub diffusivity: f64,
}

impl HeatKernel {
    pub fn new(dim: usize, distance: f64, reaction: f64, diffusivity: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(distance > 0.0) {
            return Err(Error::SensorAtSource);
        }
        if !(reaction >= 0.0) {
            return Err(Error::OutOfRange { what: "reaction", value: reaction, min: 0.0, max: f64::INFINITY });
        }
        if !(diffusivity > 0.0) {
            return Err(Error::NonPositive { name: "diffusivity", value: diffusivity });
        }
        Ok(Self { dim, distance, reaction, diffusivity })
    }
}

impl Kernel for HeatKernel {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        (-self.reaction * t).exp() * heat_unchecked(self.dim, self.distance, t, self.diffusivity)
    }
}

/// `V_γ` as a convolution kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VKernel {
    pub dim: usize,
    pub gamma: f64,
}

impl VKernel {
    pub fn new(dim: usize, gamma: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(gamma > 0.0) {
            return Err(Error::NonPositive { name: "gamma", value: gamma });
        }
        Ok(Self { dim, gamma })
    }
}

impl Kernel for VKernel {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        v_unchecked(self.dim, self.gamma, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_kronrod;

    #[test]
    fn heat_kernel_values() {
        let v = heat_kernel(3, 0.0, 1.0).unwrap();
        assert!((v - (4.0 * PI).powf(-1.5)).abs() < 1e-17);
        assert!((v - 0.022_45).abs() < 1e-5);
        let v = heat_kernel(2, 2.0, 1.0).unwrap();
        assert!((v - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-17);
        let v = heat_kernel(1, 1.0, 0.25).unwrap();
        assert!((v - (-1.0f64).exp() / PI.sqrt()).abs() < 1e-16);
        assert!(heat_kernel(1, 1.0, 0.0).is_err());
        assert!(heat_kernel(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn v3_is_scaled_heat_kernel() {
        for &t in &[0.1, 1.0, 10.0] {
            let v = v_kernel(3, 1.0, t).unwrap();
            let h = 4.0 * PI * heat_kernel(3, 1.0, t).unwrap();
            assert!(((v - h) / h).abs() < 1e-14);
        }
    }

    #[test]
    fn v2_value() {
        let v = v_kernel(2, 2.0, 1.0).unwrap();
        assert!((v - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-17);
    }

    #[test]
    fn v1_laplace_transform() {
        let lt = gauss_kronrod(
            |t| if t > 0.0 { (-4.0 * t).exp() * v_unchecked(1, 1.0, t) } else { 0.0 },
            0.0,
            40.0,
            0.0,
            1e-12,
        );
        let want = (-2.0f64).exp() / 2.0;
        assert!((lt - want).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(v_kernel(0, 1.0, 1.0).is_err());
        assert!(v_kernel(1, 0.0, 1.0).is_err());
        assert!(HeatKernel::new(3, 0.0, 0.0, 1.0).is_err());
    }
}
