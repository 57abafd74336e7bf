//! Source identification on an interval from two sensors.
//!
//! With sensors `b₁ < x₁ < b₂` the transforms of the two sensor series decay
//! like `exp(-√λ ∫ r)` over the travel distances `∫_{b₁}^{x₁} r` and
//! `∫_{x₁}^{b₂} r`, with `r = 1/√a₂`. Their log-ratio therefore pins down the
//! travel distance from `b₁` to the source:
//!
//! `∫_{b₁}^{x₁} r = R/2 - (∫_{b₁}^{b₂} r₁ + ln(Φ₁/Φ₂)) / (2√λ) + o(1/√λ)`,
//!
//! where `R = ∫_{b₁}^{b₂} r`. A sensor sitting on a Neumann end doubles its
//! own Green function, which shifts the log term by `∓ln 2`.

use crate::fit::{least_squares, weighted_median};
use crate::forward::{Kernel, VKernel};
use crate::laplace::{
    laplace_grid, volterra_deconvolve, Deconvolution, LaplaceSamples, Regularization, TRUNCATION_GUARD,
};
use crate::model::{BoundaryCondition, CoefficientField1D, SensorRecord, SpatialDomain, TimeGrid};
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

/// Which location formula applies to the sensor pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Branch {
    /// Both sensors strictly inside the interval.
    Interior,
    /// `b₁` is the left end, carrying a Neumann condition.
    LeftBoundary,
    /// `b₂` is the right end, carrying a Neumann condition.
    RightBoundary,
}

impl Branch {
    /// Correction added to `ln(Φ₁/Φ₂)`.
    fn log_shift(self) -> f64 {
        match self {
            Branch::Interior => 0.0,
            Branch::LeftBoundary => -LN_2,
            Branch::RightBoundary => LN_2,
        }
    }
}

/// Picks the branch for a sensor pair on `domain`. A sensor on an end that
/// does not carry a Neumann condition falls back to the interior formula with
/// a warning.
pub fn choose_branch(domain: &SpatialDomain, b1: f64, b2: f64) -> (Branch, Option<String>) {
    let SpatialDomain::Interval { a, b, left, right } = domain else {
        return (Branch::Interior, None);
    };
    let neumann = |bc: &BoundaryCondition| matches!(bc, BoundaryCondition::Robin { sigma, .. } if *sigma == 0.0);
    let on_left = b1 == *a;
    let on_right = b2 == *b;
    match (on_left, on_right) {
        (true, false) if neumann(left) => (Branch::LeftBoundary, None),
        (false, true) if neumann(right) => (Branch::RightBoundary, None),
        (false, false) => (Branch::Interior, None),
        _ => (
            Branch::Interior,
            Some(String::from("sensor on a boundary without a Neumann condition; using the interior formula")),
        ),
    }
}

/// Fit of `(1/2√λ) ln(Φ₁/Φ₂) = Â + c/√λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AEstimate {
    pub a_hat: f64,
    pub slope: f64,
    pub std_error: f64,
    pub rms_residual: f64,
    /// `(λ, a_λ)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    /// λ values skipped (truncation guard or nonpositive ratio).
    pub skipped: Vec<f64>,
}

fn check_pair(phi1: &LaplaceSamples, phi2: &LaplaceSamples) -> Result<()> {
    phi1.check_same_grid(phi2)?;
    if phi1.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    Ok(())
}

/// Indices where both transforms pass the truncation guard, with the log
/// ratio; errors if the ratio changes sign more than at isolated points.
fn log_ratios(phi1: &LaplaceSamples, phi2: &LaplaceSamples) -> Result<(Vec<(usize, f64)>, Vec<f64>)> {
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut negative = 0;
    for k in 0..phi1.len() {
        if !(phi1.admissible(k, TRUNCATION_GUARD) && phi2.admissible(k, TRUNCATION_GUARD)) {
            skipped.push(phi1.lambdas[k]);
            continue;
        }
        let ratio = phi1.values[k] / phi2.values[k];
        if ratio > 0.0 && ratio.is_finite() {
            used.push((k, ratio.ln()));
        } else {
            negative += 1;
            skipped.push(phi1.lambdas[k]);
        }
    }
    if negative > 1 || (negative > 0 && used.is_empty()) {
        return Err(Error::InconsistentRatio);
    }
    Ok((used, skipped))
}

/// Estimates the limit `A = lim (1/2√λ) ln(Φ₁/Φ₂)`.
pub fn estimate_a(phi1: &LaplaceSamples, phi2: &LaplaceSamples) -> Result<AEstimate> {
    check_pair(phi1, phi2)?;
    let (used, skipped) = log_ratios(phi1, phi2)?;
    if used.len() < 3 {
        return Err(Error::InsufficientData { what: "admissible lambda points", needed: 3, found: used.len() });
    }
    let points: Vec<(f64, f64)> = used
        .iter()
        .map(|&(k, l)| {
            let lam = phi1.lambdas[k];
            (lam, l / (2.0 * lam.sqrt()))
        })
        .collect();
    let ones: Vec<f64> = points.iter().map(|_| 1.0).collect();
    let inv: Vec<f64> = points.iter().map(|p| 1.0 / p.0.sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = least_squares(&[&ones, &inv], &y)?;
    Ok(AEstimate {
        a_hat: fit.coefficients[0],
        slope: fit.coefficients[1],
        std_error: fit.std_errors[0],
        rms_residual: fit.rms_residual,
        points,
        skipped,
    })
}

/// Location estimate at one λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub lambda: f64,
    /// Estimated travel distance `∫_{b₁}^{x₁} r`.
    pub m: f64,
    /// Location estimate (only meaningful when `bracketed`).
    pub x: f64,
    /// Aggregation weight: 1 far from the truncation guard, 0 at it.
    pub weight: f64,
    pub bracketed: bool,
}

/// Location from a sensor pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Location1D {
    pub x_hat: f64,
    pub per_lambda: Vec<LambdaEstimate>,
    /// `R = ∫_{b₁}^{b₂} r`.
    pub total_r: f64,
    /// `∫_{b₁}^{b₂} r₁`.
    pub total_r1: f64,
    /// Weighted median absolute deviation of the bracketed estimates.
    pub spread: f64,
    /// Closed form for constant `a₂` was used.
    pub closed_form: bool,
    pub branch: Branch,
}

/// Recovers the source location between sensors `b₁ < b₂`.
pub fn locate_1d(
    phi1: &LaplaceSamples,
    phi2: &LaplaceSamples,
    coeffs: &CoefficientField1D,
    b1: f64,
    b2: f64,
    branch: Branch,
) -> Result<Location1D> {
    check_pair(phi1, phi2)?;
    if !(b1 < b2) {
        return Err(Error::OutOfRange { what: "sensor b2", value: b2, min: b1, max: coeffs.b });
    }
    for (what, v) in [("sensor b1", b1), ("sensor b2", b2)] {
        if !(v >= coeffs.a && v <= coeffs.b) {
            return Err(Error::OutOfRange { what, value: v, min: coeffs.a, max: coeffs.b });
        }
    }
    let (used, _) = log_ratios(phi1, phi2)?;
    let total_r = coeffs.integral_r(b1, b2);
    let total_r1 = coeffs.integral_r1(b1, b2);
    let closed_form = coeffs.is_constant_a2();
    let sqrt_a2 = coeffs.a2_at(b1).sqrt();
    let mut per_lambda = Vec::with_capacity(used.len());
    for &(k, log_ratio) in &used {
        let lambda = phi1.lambdas[k];
        let correction = (total_r1 + log_ratio + branch.log_shift()) / (2.0 * lambda.sqrt());
        let m = 0.5 * total_r - correction;
        let bracketed = m > 0.0 && m < total_r;
        let x = if closed_form {
            0.5 * (b1 + b2) - sqrt_a2 * correction
        } else if bracketed {
            invert_distance_integral(coeffs, b1, m, 1.0)?
        } else {
            f64::NAN
        };
        let rel = phi1.get(k).relative_truncation().max(phi2.get(k).relative_truncation());
        let weight = (1.0 - rel / TRUNCATION_GUARD).clamp(0.0, 1.0);
        per_lambda.push(LambdaEstimate { lambda, m, x, weight, bracketed });
    }
    let good: Vec<&LambdaEstimate> = per_lambda.iter().filter(|e| e.bracketed && e.weight > 0.0).collect();
    let xs: Vec<f64> = good.iter().map(|e| e.x).collect();
    let ws: Vec<f64> = good.iter().map(|e| e.weight).collect();
    let x_hat = weighted_median(&xs, &ws).ok_or(Error::NotBracketed)?;
    let dev: Vec<f64> = xs.iter().map(|x| (x - x_hat).abs()).collect();
    let spread = weighted_median(&dev, &ws).unwrap_or(0.0);
    Ok(Location1D { x_hat, per_lambda, total_r, total_r1, spread, closed_form, branch })
}

/// Point `x` with `|∫_{b₁}^{x} r dξ| = m`, searching to the right of `b₁`
/// when `direction > 0` and to the left otherwise.
pub fn invert_distance_integral(coeffs: &CoefficientField1D, b1: f64, m: f64, direction: f64) -> Result<f64> {
    if !(b1 >= coeffs.a && b1 <= coeffs.b) {
        return Err(Error::OutOfRange { what: "b1", value: b1, min: coeffs.a, max: coeffs.b });
    }
    let end = if direction > 0.0 { coeffs.b } else { coeffs.a };
    let total = coeffs.integral_r(b1, end).abs();
    let slack = 1e-12 * total.max(1.0);
    if !(m >= 0.0 && m <= total + slack) {
        return Err(Error::OutOfRange { what: "travel distance", value: m, min: 0.0, max: total });
    }
    if m == 0.0 {
        return Ok(b1);
    }
    let (mut lo, mut hi) = (b1, end);
    let tol = 1e-12 * (coeffs.b - coeffs.a);
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if coeffs.integral_r(b1, mid).abs() < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Intensity recovered at one sensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Intensity1D {
    pub q: Vec<f64>,
    /// Travel distance `|∫_{x̂₁}^{b} r|` used in the kernel.
    pub delta0: f64,
    /// Amplitude `exp(∫_{x̂₁}^{b} r₁)/(2√a₂(x̂₁))`, doubled for a sensor on a
    /// Neumann end.
    pub amplitude: f64,
    /// Exponential damping rate `a₀ + a₁²/(4a₂)` of the kernel; zero unless
    /// all coefficients are constant.
    pub damping: f64,
    pub deconvolution: Deconvolution,
    /// The kernel is the exact free-space one (constant coefficients); leading
    /// order in `1/√λ` otherwise.
    pub exact: bool,
}

/// `e^{-κt} V_δ(t)`.
struct DampedKernel {
    v: VKernel,
    damping: f64,
}

impl Kernel for DampedKernel {
    fn eval(&self, t: f64) -> f64 {
        (-self.damping * t).exp() * self.v.eval(t)
    }
}

fn constant(values: &[f64]) -> bool {
    values.iter().all(|v| *v == values[0])
}

/// Intensity from one sensor series and a known (estimated) location.
///
/// The series is deconvolved by `e^{-κt}V_δ₀(t)`, whose transform is
/// `e^{-√(λ+κ)δ₀}/√(λ+κ)`, and divided by the amplitude. For constant
/// coefficients this is the exact free-space kernel of
/// `u_t = a₂u'' - a₁u' - a₀u`; otherwise `κ = 0` and only the leading
/// large-λ behaviour is matched.
pub fn recover_intensity_1d(
    psi: &[f64],
    grid: &TimeGrid,
    coeffs: &CoefficientField1D,
    x_hat: f64,
    b: f64,
    on_neumann_end: bool,
    regularization: Regularization,
) -> Result<Intensity1D> {
    if x_hat == b {
        return Err(Error::SensorAtSource);
    }
    let ir = coeffs.integral_r(x_hat, b);
    let ir1 = coeffs.integral_r1(x_hat, b);
    let a2 = coeffs.a2_at(x_hat);
    if !(a2 > 0.0) {
        return Err(Error::NotElliptic { min: a2 });
    }
    let delta0 = ir.abs();
    let mut amplitude = ir1.exp() / (2.0 * a2.sqrt());
    if on_neumann_end {
        amplitude *= 2.0;
    }
    let exact = constant(&coeffs.a2) && constant(&coeffs.a1) && constant(&coeffs.a0);
    let damping = if exact { coeffs.a0[0] + coeffs.a1[0] * coeffs.a1[0] / (4.0 * a2) } else { 0.0 };
    let kernel = DampedKernel { v: VKernel::new(1, delta0)?, damping };
    let deconvolution = volterra_deconvolve(psi, grid, &kernel, regularization)?;
    let q = deconvolution.q.iter().map(|v| v / amplitude).collect();
    Ok(Intensity1D { q, delta0, amplitude, damping, deconvolution, exact })
}

/// Layouts under which intensities cannot be recovered uniquely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum AlternationViolation {
    /// At least two sources and every sensor lies right of the second source.
    AllRightOfSecond,
    /// At least two sources and every sensor lies left of the second-to-last source.
    AllLeftOfPenultimate,
    /// No sensor in `[x_i, x_{i+2}]` (indices into the sorted sources).
    UncoveredTriple { first: usize },
}

impl AlternationViolation {
    /// Condition number in the classical statement (1, 2 or 3).
    pub fn condition(&self) -> u8 {
        match self {
            AlternationViolation::AllRightOfSecond => 1,
            AlternationViolation::AllLeftOfPenultimate => 2,
            AlternationViolation::UncoveredTriple { .. } => 3,
        }
    }
}

/// Lists every non-uniqueness layout that holds. An empty list means no such
/// obstruction was found; it does not prove uniqueness.
pub fn alternation_diagnostic(sources: &[f64], sensors: &[f64]) -> Vec<AlternationViolation> {
    let mut x: Vec<f64> = sources.to_vec();
    x.sort_by(f64::total_cmp);
    let r = x.len();
    let mut out = Vec::new();
    if r >= 2 && !sensors.is_empty() {
        if sensors.iter().all(|b| *b > x[1]) {
            out.push(AlternationViolation::AllRightOfSecond);
        }
        if sensors.iter().all(|b| *b < x[r - 2]) {
            out.push(AlternationViolation::AllLeftOfPenultimate);
        }
    }
    for i in 0..r.saturating_sub(2) {
        if !sensors.iter().any(|b| *b >= x[i] && *b <= x[i + 2]) {
            out.push(AlternationViolation::UncoveredTriple { first: i });
        }
    }
    out
}

/// Full result of the two-sensor pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery1D {
    pub x1_hat: f64,
    pub a_hat: f64,
    pub a_fit: AEstimate,
    /// `|Â| < R/2`.
    pub admissible: bool,
    pub location: Location1D,
    pub q_hat: Vec<f64>,
    /// Index (0 or 1) of the sensor used for the intensity.
    pub intensity_sensor: usize,
    pub intensity: Intensity1D,
    /// `Â + ∫_{b₁}^{x̂₁} r - R/2`; zero up to the fit residual.
    pub consistency_gap: f64,
    pub diagnostics: Vec<String>,
}

/// Location, limit `A` and intensity from two records with `b₁ < b₂`.
///
/// Records must already have the background removed.
pub fn identify_1d(
    first: &SensorRecord,
    second: &SensorRecord,
    coeffs: &CoefficientField1D,
    branch: Branch,
    lambdas: &[f64],
    regularization: Regularization,
) -> Result<Recovery1D> {
    if first.grid != second.grid {
        return Err(Error::SeriesLength { expected: first.samples.len(), found: second.samples.len() });
    }
    let (b1, b2) = (first.location.x(), second.location.x());
    let phi1 = laplace_grid(&first.samples, &first.grid, lambdas, 0)?;
    let phi2 = laplace_grid(&second.samples, &second.grid, lambdas, 1)?;
    let a_fit = estimate_a(&phi1, &phi2)?;
    let location = locate_1d(&phi1, &phi2, coeffs, b1, b2, branch)?;
    let x1 = location.x_hat;
    let half = 0.5 * location.total_r;
    let admissible = a_fit.a_hat.abs() < half;
    let consistency_gap = a_fit.a_hat + coeffs.integral_r(b1, x1) - half;

    let d1 = coeffs.integral_r(b1, x1).abs();
    let d2 = coeffs.integral_r(x1, b2).abs();
    let (intensity_sensor, rec) = if d1 <= d2 { (0, first) } else { (1, second) };
    let on_neumann_end = matches!((branch, intensity_sensor), (Branch::LeftBoundary, 0) | (Branch::RightBoundary, 1));
    let intensity =
        recover_intensity_1d(&rec.samples, &rec.grid, coeffs, x1, rec.location.x(), on_neumann_end, regularization)?;

    let mut diagnostics = Vec::new();
    diagnostics.push(format!(
        "A fit used {} of {} lambda values (rms residual {:.3e})",
        a_fit.points.len(),
        lambdas.len(),
        a_fit.rms_residual
    ));
    let bracketed = location.per_lambda.iter().filter(|e| e.bracketed).count();
    if bracketed < location.per_lambda.len() {
        diagnostics.push(format!(
            "{} of {} lambda values gave a travel distance outside the sensor pair",
            location.per_lambda.len() - bracketed,
            location.per_lambda.len()
        ));
    }
    if !admissible {
        diagnostics.push(format!("|A| = {:.6e} violates |A| < R/2 = {:.6e}", a_fit.a_hat.abs(), half));
    }
    if !intensity.exact {
        diagnostics.push(String::from("intensity kernel is leading order in 1/sqrt(lambda) (variable coefficients)"));
    }
    diagnostics.push(format!("location spread over lambda window {:.3e}", location.spread));
    Ok(Recovery1D {
        x1_hat: x1,
        a_hat: a_fit.a_hat,
        a_fit,
        admissible,
        q_hat: intensity.q.clone(),
        location,
        intensity_sensor,
        intensity,
        consistency_gap,
        diagnostics,
    })
}
