//! Transform ratios between sensors and the distance information they carry.
//!
//! For a single source at distances `α_i`, `α_j` from two sensors, the ratio
//! `G_ij(λ) = Φ_j(λ)/Φ_i(λ)` behaves like `ρ e^{-√λ(α_j-α_i)}` with
//! `ρ = α_i/α_j` in three dimensions and `ρ = √(α_i/α_j)` in two.

use crate::fit::least_squares;
use crate::laplace::LaplaceSamples;
use crate::{Error, Result};
use alloc::vec::Vec;

/// Pointwise ratio `Φ_j/Φ_i` on a shared λ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GRatio {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Relative error bound propagated from both truncation bounds.
    pub relative_bound: Vec<f64>,
}

pub fn g_ratio(phi_j: &LaplaceSamples, phi_i: &LaplaceSamples) -> Result<GRatio> {
    phi_j.check_same_grid(phi_i)?;
    let mut values = Vec::with_capacity(phi_i.len());
    let mut relative_bound = Vec::with_capacity(phi_i.len());
    for k in 0..phi_i.len() {
        let den = phi_i.values[k];
        let bound = phi_i.truncation[k];
        if !(den.abs() > bound) {
            return Err(Error::BelowErrorBound { value: den, bound });
        }
        values.push(phi_j.values[k] / den);
        relative_bound.push(phi_i.get(k).relative_truncation() + phi_j.get(k).relative_truncation());
    }
    Ok(GRatio { lambdas: phi_i.lambdas.clone(), values, relative_bound })
}

/// Fit of the ladder log-ratios `ℓ(α) = d + c/α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferenceFit {
    /// `α_j - α_i`.
    pub d: f64,
    pub std_error: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Distance difference from `G` sampled at `λ = α²` on an increasing ladder.
///
/// Consecutive rungs give `ℓ = ln(G(α_k²)/G(α_{k+1}²))/(α_{k+1}-α_k)`; on a
/// unit-step ladder this is the plain log ratio of ratios, in which the
/// prefactor `ρ` cancels.
pub fn distance_differences(alphas: &[f64], g: &[f64]) -> Result<DifferenceFit> {
    if alphas.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: alphas.len(), found: g.len() });
    }
    if alphas.len() < 3 {
        return Err(Error::InsufficientData { what: "alpha ladder", needed: 3, found: alphas.len() });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..alphas.len() - 1 {
        let step = alphas[k + 1] - alphas[k];
        if !(step > 0.0) {
            return Err(Error::OutOfRange {
                what: "alpha ladder (must increase)",
                value: alphas[k + 1],
                min: alphas[k],
                max: f64::INFINITY,
            });
        }
        let ratio = g[k] / g[k + 1];
        if ratio > 0.0 && ratio.is_finite() {
            xs.push(1.0 / alphas[k]);
            ys.push(ratio.ln() / step);
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData { what: "ladder log-ratios", needed: 2, found: xs.len() });
    }
    let ones: Vec<f64> = xs.iter().map(|_| 1.0).collect();
    let fit = least_squares(&[&ones, &xs], &ys)?;
    Ok(DifferenceFit {
        d: fit.coefficients[0],
        std_error: fit.std_errors[0],
        c: fit.coefficients[1],
        rms_residual: fit.rms_residual,
        points: xs.len(),
    })
}

/// Joint fit `ln G = -d s + κ + c/s` in the decay variable `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioFit {
    pub d: f64,
    pub d_std_error: f64,
    /// `κ = ln ρ`.
    pub log_rho: f64,
    pub log_rho_std_error: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Fits the difference and the prefactor together. `s = √λ` for the plain
/// operator; points with nonpositive `G` are skipped.
pub fn fit_ratio(s: &[f64], g: &[f64]) -> Result<RatioFit> {
    if s.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), found: g.len() });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&sk, &gk) in s.iter().zip(g) {
        if gk > 0.0 && gk.is_finite() && sk > 0.0 {
            xs.push(sk);
            ys.push(gk.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData { what: "ratio fit points", needed: 3, found: xs.len() });
    }
    let neg: Vec<f64> = xs.iter().map(|v| -v).collect();
    let ones: Vec<f64> = xs.iter().map(|_| 1.0).collect();
    let inv: Vec<f64> = xs.iter().map(|v| 1.0 / v).collect();
    let fit = least_squares(&[&neg, &ones, &inv], &ys)?;
    Ok(RatioFit {
        d: fit.coefficients[0],
        d_std_error: fit.std_errors[0],
        log_rho: fit.coefficients[1],
        log_rho_std_error: fit.std_errors[1],
        c: fit.coefficients[2],
        rms_residual: fit.rms_residual,
        points: xs.len(),
    })
}

/// Guard on `|1 - ρ_eff|` below which a pair cannot be separated.
pub const RHO_GUARD: f64 = 1e-6;

fn check_dim(n: usize) -> Result<u8> {
    match n {
        2 => Ok(2),
        3 => Ok(1),
        _ => Err(Error::InvalidDimension(n)),
    }
}

/// `(α_i, α_j)` from `G(λ)` and `d = α_j - α_i`, via `ρ = G e^{√λ d}`.
pub fn pairwise_distance_solve(n: usize, g: f64, lambda: f64, d: f64) -> Result<(f64, f64)> {
    if !(g > 0.0) {
        return Err(Error::NonPositive { name: "G", value: g });
    }
    if !(lambda > 0.0) {
        return Err(Error::NonPositive { name: "lambda", value: lambda });
    }
    pairwise_from_log_rho(n, g.ln() + lambda.sqrt() * d, d)
}

/// `(α_i, α_j)` from `ln ρ` and `d`: `α_j = d/(1-ρ_eff)`, `α_i = ρ_eff α_j`,
/// with `ρ_eff = ρ` for `n = 3` and `ρ²` for `n = 2`.
pub fn pairwise_from_log_rho(n: usize, log_rho: f64, d: f64) -> Result<(f64, f64)> {
    let power = check_dim(n)?;
    let rho_eff = (f64::from(power) * log_rho).exp();
    if (1.0 - rho_eff).abs() <= RHO_GUARD {
        return Err(Error::IndistinguishablePair { rho: rho_eff });
    }
    let alpha_j = d / (1.0 - rho_eff);
    let alpha_i = rho_eff * alpha_j;
    for v in [alpha_i, alpha_j] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::OutOfRange { what: "distance estimate", value: v, min: 0.0, max: f64::INFINITY });
        }
    }
    Ok((alpha_i, alpha_j))
}

/// First-order standard errors of `(α_i, α_j)` from those of `d` and `ln ρ`.
pub fn pairwise_std_errors(n: usize, log_rho: f64, d: f64, d_se: f64, log_rho_se: f64) -> Result<(f64, f64)> {
    let p = f64::from(check_dim(n)?);
    let rho = (p * log_rho).exp();
    let den = 1.0 - rho;
    let alpha_j = d / den;
    // ∂α_j/∂d = 1/(1-ρ), ∂α_j/∂κ = d p ρ/(1-ρ)²
    let se_j = (d_se / den).abs() + (d * p * rho * log_rho_se / (den * den)).abs();
    let se_i = rho * se_j + (alpha_j * p * rho * log_rho_se).abs();
    Ok((se_i, se_j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(alpha_i: f64, alpha_j: f64, alphas: &[f64]) -> Vec<f64> {
        alphas.iter().map(|a| alpha_i / alpha_j * (-a * (alpha_j - alpha_i)).exp()).collect()
    }

    #[test]
    fn ladder_cancels_prefactor() {
        let alphas: Vec<f64> = (8..=16).map(f64::from).collect();
        let g = model(1.0, 1.5, &alphas);
        let f = distance_differences(&alphas, &g).unwrap();
        assert!((f.d - 0.5).abs() < 1e-13);
        assert!(f.c.abs() < 1e-11);
    }

    #[test]
    fn symmetric_pair_has_zero_difference() {
        let alphas = [8.0, 9.0, 10.0, 11.0];
        let f = distance_differences(&alphas, &[0.7; 4]).unwrap();
        assert!(f.d.abs() < 1e-15);
        assert!(distance_differences(&alphas[..2], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn joint_fit_recovers_prefactor() {
        let alphas: Vec<f64> = (8..=16).map(f64::from).collect();
        let g = model(1.0, 1.5, &alphas);
        let f = fit_ratio(&alphas, &g).unwrap();
        assert!((f.d - 0.5).abs() < 1e-12);
        assert!((f.log_rho - (1.0f64 / 1.5).ln()).abs() < 1e-11);
    }

    #[test]
    fn pairwise_examples() {
        let (ai, aj) = pairwise_from_log_rho(3, (1.0f64 / 1.5).ln(), 0.5).unwrap();
        assert!((aj - 1.5).abs() < 1e-14 && (ai - 1.0).abs() < 1e-14);
        let (ai, aj) = pairwise_from_log_rho(2, 0.5 * (1.0f64 / 1.5).ln(), 0.5).unwrap();
        assert!((aj - 1.5).abs() < 1e-14 && (ai - 1.0).abs() < 1e-14);
        let lambda = 100.0;
        let g = (1.0 / 1.5) * (-10.0f64 * 0.5).exp();
        let (ai, aj) = pairwise_distance_solve(3, g, lambda, 0.5).unwrap();
        assert!((aj - 1.5).abs() < 1e-12 && (ai - 1.0).abs() < 1e-12);
        assert!(matches!(pairwise_from_log_rho(3, 1e-9, 1e-9), Err(Error::IndistinguishablePair { .. })));
        assert!(pairwise_from_log_rho(3, 0.1, 0.5).is_err());
        assert!(pairwise_from_log_rho(4, 0.1, 0.5).is_err());
    }

    #[test]
    fn ratio_of_samples() {
        let mk = |v: Vec<f64>| LaplaceSamples {
            lambdas: vec![1.0, 2.0],
            truncation: vec![0.0; v.len()],
            discretization: vec![0.0; v.len()],
            values: v,
            horizon: 1.0,
            series: 0,
        };
        let a = mk(vec![2.0, 3.0]);
        let b = mk(vec![4.0, 5.0]);
        let ab = g_ratio(&a, &b).unwrap();
        let ba = g_ratio(&b, &a).unwrap();
        for k in 0..2 {
            assert!((ab.values[k] * ba.values[k] - 1.0).abs() < 1e-15);
        }
        assert!(g_ratio(&a, &a).unwrap().values.iter().all(|v| *v == 1.0));
        let mut z = mk(vec![0.0, 1.0]);
        z.truncation[0] = 1e-20;
        assert!(matches!(g_ratio(&a, &z), Err(Error::BelowErrorBound { .. })));
    }
}
