//! Truncated Laplace transforms of sampled series.

use crate::model::TimeGrid;
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Transform value with its error bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    /// `|ψ(T)| e^{-λT}/λ`: the neglected tail if `ψ` stayed at its last value.
    pub truncation: f64,
    /// `(λτ)⁴‖ψ‖∞/(90λ)`: quadrature error estimate for an integrand that
    /// varies on the `1/λ` scale.
    pub discretization: f64,
}

impl LaplaceValue {
    pub fn bound(&self) -> f64 {
        self.truncation + self.discretization
    }

    /// Truncation bound relative to `|Φ|`.
    pub fn relative_truncation(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.truncation / self.value.abs()
        }
    }
}

/// End weights of the fourth-order extended Simpson rule; interior weights are 1.
const END_WEIGHTS: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];

/// Approximation of `∫₀^T e^{-λt} ψ(t) dt` by the trapezoidal rule with
/// fourth-order end corrections (plain trapezoid for fewer than 8 steps).
///
/// Sensor series of a distant source vanish to all orders at `t = 0`, where
/// the plain trapezoid is already spectrally accurate; the end corrections
/// matter for data that start at a nonzero level.
pub fn laplace_transform(series: &[f64], grid: &TimeGrid, lambda: f64) -> Result<LaplaceValue> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositive { name: "lambda", value: lambda });
    }
    grid.check_series(series)?;
    let tau = grid.step;
    let n = grid.steps;
    let weight = |k: usize| -> f64 {
        if n < 8 {
            return if k == 0 || k == n { 0.5 } else { 1.0 };
        }
        let e = k.min(n - k);
        if e < 4 {
            END_WEIGHTS[e]
        } else {
            1.0
        }
    };
    let mut sum = 0.0;
    for (k, v) in series.iter().enumerate() {
        if *v != 0.0 {
            sum += weight(k) * v * (-lambda * tau * k as f64).exp();
        }
    }
    let tail = (-lambda * grid.horizon()).exp();
    let sup = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lt = lambda * tau;
    Ok(LaplaceValue {
        value: tau * sum,
        truncation: series[n].abs() * tail / lambda,
        discretization: lt * lt * lt * lt * sup / (90.0 * lambda),
    })
}

/// Transform values of one series on a λ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceSamples {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation: Vec<f64>,
    pub discretization: Vec<f64>,
    pub horizon: f64,
    /// Index of the series (sensor) the transform belongs to.
    pub series: usize,
}

impl LaplaceSamples {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn get(&self, k: usize) -> LaplaceValue {
        LaplaceValue { value: self.values[k], truncation: self.truncation[k], discretization: self.discretization[k] }
    }

    /// Whether the truncation bound at `k` is within `rel` of `|Φ|`.
    pub fn admissible(&self, k: usize, rel: f64) -> bool {
        self.values[k].is_finite() && self.values[k] != 0.0 && self.truncation[k] <= rel * self.values[k].abs()
    }

    /// Same λ grid as `other`.
    pub fn check_same_grid(&self, other: &LaplaceSamples) -> Result<()> {
        if self.lambdas != other.lambdas {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }
}

/// Maps [`laplace_transform`] over a strictly increasing λ grid.
pub fn laplace_grid(series: &[f64], grid: &TimeGrid, lambdas: &[f64], id: usize) -> Result<LaplaceSamples> {
    if lambdas.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::OutOfRange {
            what: "lambda grid (must increase)",
            value: lambdas[0],
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let mut out = LaplaceSamples {
        lambdas: lambdas.to_vec(),
        values: Vec::with_capacity(lambdas.len()),
        truncation: Vec::with_capacity(lambdas.len()),
        discretization: Vec::with_capacity(lambdas.len()),
        horizon: grid.horizon(),
        series: id,
    };
    for &l in lambdas {
        let v = laplace_transform(series, grid, l)?;
        out.values.push(v.value);
        out.truncation.push(v.truncation);
        out.discretization.push(v.discretization);
    }
    Ok(out)
}

/// Geometric λ grid suggested for a time grid and a distance scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaAdvice {
    pub lambdas: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rationale: String,
}

/// Default constant `c` in the cap `λ ≤ c/τ`.
pub const DEFAULT_LAMBDA_CAP: f64 = 0.05;

/// λ window `[max(4/T², 25/δ²), c/τ]` with `c = 0.05` and 12 geometric points.
///
/// The lower end keeps `e^{-λT}` small and `√λ·δ ≥ 5`; the upper end keeps
/// `λτ` small so the sampled data still resolve `e^{-λt}`.
pub fn lambda_grid_advisor(grid: &TimeGrid, delta_hint: f64) -> Result<LambdaAdvice> {
    lambda_grid_advisor_with(grid, delta_hint, DEFAULT_LAMBDA_CAP, 12)
}

pub fn lambda_grid_advisor_with(grid: &TimeGrid, delta_hint: f64, cap: f64, points: usize) -> Result<LambdaAdvice> {
    if !(grid.step > 0.0) {
        return Err(Error::NonPositive { name: "time step", value: grid.step });
    }
    if !(delta_hint > 0.0) {
        return Err(Error::NonPositive { name: "distance hint", value: delta_hint });
    }
    let t = grid.horizon();
    let from_horizon = 4.0 / (t * t);
    let from_distance = 25.0 / (delta_hint * delta_hint);
    let lambda_min = from_horizon.max(from_distance);
    let lambda_max = cap / grid.step;
    if !(lambda_min < lambda_max) {
        return Err(Error::LambdaWindowEmpty { lambda_min, lambda_max });
    }
    let points = points.max(12);
    let ratio = (lambda_max / lambda_min).ln() / (points - 1) as f64;
    let lambdas = (0..points).map(|k| lambda_min * (ratio * k as f64).exp()).collect();
    let binding = if from_distance >= from_horizon { "25/delta^2" } else { "4/T^2" };
    Ok(LambdaAdvice {
        lambdas,
        lambda_min,
        lambda_max,
        rationale: format!(
            "lambda_min = {lambda_min:.6e} from {binding}; lambda_max = {cap}/tau = {lambda_max:.6e}; \
             {points} geometric points"
        ),
    })
}
