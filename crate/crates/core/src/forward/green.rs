//! Resolvent Green functions: exact free-space kernels and the large-λ
//! asymptotic form on an interval with variable coefficients.

use crate::model::CoefficientField1D;
use crate::special::bessel_k0;
use crate::{Error, Result};
use core::f64::consts::PI;

/// Default asymptotic threshold: `λ_min = 25/δ²`, i.e. `√λ·δ ≥ 5`.
pub const DEFAULT_DECAY_EXPONENT: f64 = 5.0;

/// Exact or leading-order evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenMode {
    Exact,
    Asymptotic,
}

/// A resolvent Green function value with the data used to produce it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenEval {
    pub dim: usize,
    pub mode: GreenMode,
    pub value: f64,
    /// Signed `∫_{x₁}^{b} r dξ` (1D asymptotic mode only).
    pub integral_r: Option<f64>,
    /// Signed `∫_{x₁}^{b} r₁ dξ` (1D asymptotic mode only).
    pub integral_r1: Option<f64>,
    /// Whether `λ` lies in the asymptotic regime (`true` in exact mode).
    pub valid: bool,
    pub lambda_min: f64,
}

/// Free-space resolvent kernel of `λ + λ₀ - Δ` at distance `r`.
///
/// With `μ = √(λ+λ₀)`: `n = 3` gives `e^{-μr}/(4πr)`, `n = 2` gives
/// `K₀(μr)/(2π)`, `n = 1` gives `e^{-μr}/(2μ)`.
pub fn green_laplace(n: usize, r: f64, lambda: f64, reaction: f64) -> Result<f64> {
    green_laplace_with_diffusivity(n, r, lambda, reaction, 1.0)
}

/// As [`green_laplace`] for `λ + λ₀ - cΔ`. For `n = 1` this is
/// `e^{-μ_c r}/(2cμ_c)` with `μ_c = √((λ+λ₀)/c)`.
pub fn green_laplace_with_diffusivity(n: usize, r: f64, lambda: f64, reaction: f64, c: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    if !(r > 0.0) {
        return Err(Error::SingularKernel);
    }
    if !(c > 0.0) {
        return Err(Error::NonPositive { name: "diffusivity", value: c });
    }
    let s = lambda + reaction;
    if n == 3 {
        if !(s >= 0.0) {
            return Err(Error::OutOfRange { what: "lambda + reaction", value: s, min: 0.0, max: f64::INFINITY });
        }
        let mu = (s / c).sqrt();
        return Ok((-mu * r).exp() / (4.0 * PI * c * r));
    }
    if !(s > 0.0) {
        return Err(Error::NonPositive { name: "lambda + reaction", value: s });
    }
    let mu = (s / c).sqrt();
    match n {
        1 => Ok((-mu * r).exp() / (2.0 * c * mu)),
        _ => Ok(bessel_k0(mu * r)? / (2.0 * PI * c)),
    }
}

/// Leading term of the large-`μr` expansion of [`green_laplace`]; for
/// `n = 2` this is `e^{-μr}/(2√(2πμr))`, for `n ∈ {1, 3}` it is exact.
pub fn green_laplace_asymptotic(n: usize, r: f64, lambda: f64, reaction: f64) -> Result<f64> {
    if n != 2 {
        return green_laplace(n, r, lambda, reaction);
    }
    if !(r > 0.0) {
        return Err(Error::SingularKernel);
    }
    let s = lambda + reaction;
    if !(s > 0.0) {
        return Err(Error::NonPositive { name: "lambda + reaction", value: s });
    }
    let z = s.sqrt() * r;
    Ok((-z).exp() / (2.0 * (2.0 * PI * z).sqrt()))
}

/// Exact free-space Green evaluation wrapped in a [`GreenEval`].
pub fn green_exact(n: usize, r: f64, lambda: f64, reaction: f64) -> Result<GreenEval> {
    Ok(GreenEval {
        dim: n,
        mode: GreenMode::Exact,
        value: green_laplace(n, r, lambda, reaction)?,
        integral_r: None,
        integral_r1: None,
        valid: true,
        lambda_min: 0.0,
    })
}

/// Leading-order resolvent kernel on an interval with variable coefficients:
///
/// `exp(-√λ |∫_{x₁}^{b} r| + ∫_{x₁}^{b} r₁) / (2√(λ a₂(x₁)))`.
///
/// The customary statement of this expansion carries an overall minus sign
/// (Green function of `L₀ - λ`); the positive kernel of `λ - L₀` is returned
/// here. Recovery formulas only use ratios and moduli, so the sign is
/// immaterial. Uses `λ_min = 25/δ²` with `δ = |∫ r|`.
pub fn green_1d_asymptotic(coeffs: &CoefficientField1D, x1: f64, b: f64, lambda: f64) -> Result<GreenEval> {
    let ir = travel_integral(coeffs, x1, b)?;
    let lambda_min = (DEFAULT_DECAY_EXPONENT / ir.abs()).powi(2);
    green_1d_asymptotic_with(coeffs, x1, b, lambda, lambda_min)
}

/// [`green_1d_asymptotic`] with an explicit validity threshold.
pub fn green_1d_asymptotic_with(
    coeffs: &CoefficientField1D,
    x1: f64,
    b: f64,
    lambda: f64,
    lambda_min: f64,
) -> Result<GreenEval> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositive { name: "lambda", value: lambda });
    }
    let ir = travel_integral(coeffs, x1, b)?;
    let ir1 = coeffs.integral_r1(x1, b);
    let a2 = coeffs.a2_at(x1);
    if !(a2 > 0.0) {
        return Err(Error::NotElliptic { min: a2 });
    }
    let sl = lambda.sqrt();
    let value = (-sl * ir.abs() + ir1).exp() / (2.0 * (lambda * a2).sqrt());
    Ok(GreenEval {
        dim: 1,
        mode: GreenMode::Asymptotic,
        value,
        integral_r: Some(ir),
        integral_r1: Some(ir1),
        valid: lambda >= lambda_min,
        lambda_min,
    })
}

fn travel_integral(coeffs: &CoefficientField1D, x1: f64, b: f64) -> Result<f64> {
    for (what, v) in [("source", x1), ("sensor", b)] {
        if !(v >= coeffs.a && v <= coeffs.b) {
            return Err(Error::OutOfRange { what, value: v, min: coeffs.a, max: coeffs.b });
        }
    }
    if x1 == b {
        return Err(Error::SingularKernel);
    }
    Ok(coeffs.integral_r(x1, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_kronrod;

    #[test]
    fn three_dimensional_values() {
        let v = green_laplace(3, 1.0, 0.0, 0.0).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-16);
        let v = green_laplace(3, 2.0, 4.0, 0.0).unwrap();
        assert!((v - (-4.0f64).exp() / (8.0 * PI)).abs() < 1e-17);
        assert_eq!(green_laplace(3, 0.0, 1.0, 0.0), Err(Error::SingularKernel));
    }

    #[test]
    fn two_dimensional_against_quadrature_and_asymptotics() {
        let k0 = gauss_kronrod(|s| (-5.0 * s.cosh()).exp(), 0.0, 10.0, 0.0, 1e-14);
        let exact = green_laplace(2, 1.0, 25.0, 0.0).unwrap();
        assert!((exact - k0 / (2.0 * PI)).abs() < 1e-15);
        let asym = green_laplace_asymptotic(2, 1.0, 25.0, 0.0).unwrap();
        let want = (-5.0f64).exp() / (2.0 * (2.0 * PI).sqrt() * 25f64.powf(0.25));
        assert!((asym - want).abs() < 1e-16);
        assert!(((exact - asym) / exact).abs() <= 0.1);
    }

    #[test]
    fn asymptotic_matches_exact_for_constant_coefficients() {
        let c = CoefficientField1D::constant(-1.0, 2.0, 5, 1.0, 0.0, 0.0).unwrap();
        let g = green_1d_asymptotic(&c, 0.0, 1.0, 4.0).unwrap();
        assert!((g.value - (-2.0f64).exp() / 4.0).abs() < 1e-14);
        let e = green_laplace(1, 1.0, 4.0, 0.0).unwrap();
        assert!((g.value - e).abs() < 1e-14);
        assert!(!g.valid);

        let c4 = CoefficientField1D::constant(-1.0, 2.0, 5, 4.0, 0.0, 0.0).unwrap();
        for lambda in [4.0, 100.0] {
            let g = green_1d_asymptotic(&c4, 0.0, 1.0, lambda).unwrap();
            assert!((g.integral_r.unwrap() - 0.5).abs() < 1e-12);
            assert!(g.integral_r1.unwrap().abs() < 1e-14);
            let e = green_laplace_with_diffusivity(1, 1.0, lambda, 0.0, 4.0).unwrap();
            assert!(((g.value - e) / e).abs() < 1e-12);
        }
    }

    #[test]
    fn travel_integral_variable_a2() {
        let c = CoefficientField1D::from_fn(0.0, 1.0, 41, |x| 1.0 + x, |_| 0.0, |_| 0.0).unwrap();
        let g = green_1d_asymptotic(&c, 0.0, 1.0, 100.0).unwrap();
        assert!((g.integral_r.unwrap() - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn drift_matches_exact_decaying_root() {
        // λ - u'' + a1 u': decaying roots give exp(a1 (b - x1)/2) per unit length.
        let a1 = 0.6;
        let c = CoefficientField1D::constant(-2.0, 2.0, 5, 1.0, a1, 0.0).unwrap();
        for b in [1.0, -1.0] {
            let g = green_1d_asymptotic(&c, 0.0, b, 400.0).unwrap();
            let k = (a1 - (a1 * a1 + 4.0 * 400.0f64).sqrt()) / 2.0;
            let k = if b > 0.0 { k } else { (a1 + (a1 * a1 + 1600.0f64).sqrt()) / 2.0 };
            let exact = (k * b).exp() / (a1 * a1 + 1600.0f64).sqrt();
            assert!(((g.value - exact) / exact).abs() < 1e-2, "{} vs {}", g.value, exact);
        }
    }
}
