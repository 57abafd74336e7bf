//! Single-source localization and intensity recovery in two and three
//! dimensions.

use super::geometry::{circumcenter, condition_d_check, multilaterate, ConditionD, Multilateration};
use super::ratios::{
    distance_differences, fit_ratio, pairwise_from_log_rho, pairwise_std_errors, DifferenceFit, RatioFit,
};
use crate::forward::{FreeSpaceMedium, HeatKernel};
use crate::laplace::{
    laplace_grid, volterra_deconvolve, Deconvolution, LaplaceSamples, Regularization, TRUNCATION_GUARD,
};
use crate::model::{Point, SensorRecord, TimeGrid};
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Unit-step ladder `α_min, α_min + 1, …` inside `[α_min, α_max]`.
pub fn alpha_ladder(alpha_min: f64, alpha_max: f64) -> Result<Vec<f64>> {
    if !(alpha_min > 0.0) {
        return Err(Error::NonPositive { name: "alpha_min", value: alpha_min });
    }
    let mut out = Vec::new();
    let mut a = alpha_min;
    while a <= alpha_max * (1.0 + 1e-12) {
        out.push(a);
        a += 1.0;
    }
    if out.len() < 3 {
        return Err(Error::InsufficientData { what: "alpha ladder", needed: 3, found: out.len() });
    }
    Ok(out)
}

/// Signed difference `α_j - α_i` for one sensor pair.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairDifference {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    pub std_error: f64,
}

/// Per-sensor distance estimates.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceEstimates {
    pub alpha: Vec<f64>,
    pub alpha_std_error: Vec<f64>,
    /// One entry per pair `i < j`.
    pub differences: Vec<PairDifference>,
    /// All differences vanish within their uncertainty.
    pub degenerate: bool,
}

impl DistanceEstimates {
    /// `α_j - α_i` with its standard error; antisymmetric in `(i, j)`.
    pub fn d(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        if i == j {
            return Some((0.0, 0.0));
        }
        let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        self.differences.iter().find(|p| p.i == lo && p.j == hi).map(|p| (sign * p.d, p.std_error))
    }
}

/// Ratio fits for one sensor pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFit {
    pub i: usize,
    pub j: usize,
    pub fit: RatioFit,
    /// Ratio-of-ratios ladder fit, when the ladder has unit steps.
    pub ladder: Option<DifferenceFit>,
}

/// Result of the multidimensional pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryND {
    pub x1_hat: Point,
    pub distances: DistanceEstimates,
    pub pair_fits: Vec<PairFit>,
    /// Pair whose prefactor fixed the absolute distances; `None` on the
    /// degenerate path.
    pub reference_pair: Option<(usize, usize)>,
    pub multilateration: Option<Multilateration>,
    pub condition_d: ConditionD,
    pub diagnostics: Vec<String>,
}

/// Differences below `DEGENERATE_SIGMAS` standard errors plus
/// `DEGENERATE_FLOOR·scale` count as zero.
pub const DEGENERATE_SIGMAS: f64 = 3.0;
pub const DEGENERATE_FLOOR: f64 = 1e-9;

fn pair_fit(phi: &[LaplaceSamples], i: usize, j: usize, s: &[f64], ladder: &[f64]) -> Result<PairFit> {
    let mut sv = Vec::new();
    let mut gv = Vec::new();
    let mut all = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        let g = phi[j].values[k] / phi[i].values[k];
        all.push(g);
        if phi[i].admissible(k, TRUNCATION_GUARD) && phi[j].admissible(k, TRUNCATION_GUARD) {
            sv.push(s[k]);
            gv.push(g);
        }
    }
    let fit = fit_ratio(&sv, &gv)?;
    let unit = ladder.windows(2).all(|w| ((w[1] - w[0]) - 1.0).abs() < 1e-12);
    let ladder_fit = if unit { distance_differences(ladder, &all).ok() } else { None };
    Ok(PairFit { i, j, fit, ladder: ladder_fit })
}

/// Locates a single source from background-free records of `s ≥ n + 1`
/// sensors in free space. `ladder` holds the `α = √λ` values.
///
/// With reaction `λ₀` and diffusivity `D` the decay variable is
/// `√((λ + λ₀)/D)`; the prefactor ratio is unaffected.
pub fn locate_nd(records: &[SensorRecord], medium: &FreeSpaceMedium, ladder: &[f64]) -> Result<RecoveryND> {
    let n = medium.dim;
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    if records.len() < n + 1 {
        return Err(Error::InsufficientData { what: "sensors", needed: n + 1, found: records.len() });
    }
    let sensors: Vec<Point> = records.iter().map(|r| r.location).collect();
    for p in &sensors {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
    }
    let condition_d = condition_d_check(&sensors, n);
    if let Some(witness) = &condition_d.witness {
        return Err(Error::DegenerateGeometry { witness: witness.clone() });
    }
    if ladder.len() < 3 {
        return Err(Error::InsufficientData { what: "alpha ladder", needed: 3, found: ladder.len() });
    }
    let grid = records[0].grid;
    let lambdas: Vec<f64> = ladder.iter().map(|a| a * a).collect();
    let s: Vec<f64> = lambdas.iter().map(|l| ((l + medium.reaction) / medium.diffusivity).sqrt()).collect();
    let mut phi = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        if r.grid != grid {
            return Err(Error::SeriesLength { expected: grid.len(), found: r.samples.len() });
        }
        phi.push(laplace_grid(&r.samples, &r.grid, &lambdas, k)?);
    }

    let m = records.len();
    let mut pair_fits = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            pair_fits.push(pair_fit(&phi, i, j, &s, ladder)?);
        }
    }
    let differences: Vec<PairDifference> =
        pair_fits.iter().map(|p| PairDifference { i: p.i, j: p.j, d: p.fit.d, std_error: p.fit.d_std_error }).collect();
    let mut scale: f64 = 0.0;
    for (k, a) in sensors.iter().enumerate() {
        for b in &sensors[k + 1..] {
            scale = scale.max(a.distance(b));
        }
    }
    let degenerate =
        differences.iter().all(|p| p.d.abs() <= DEGENERATE_SIGMAS * p.std_error + DEGENERATE_FLOOR * scale);
    let mut diagnostics = Vec::new();

    if degenerate {
        let x = circumcenter(&sensors, n)?;
        let alpha: Vec<f64> = sensors.iter().map(|b| b.distance(&x)).collect();
        diagnostics.push(String::from("all distance differences vanish; source taken at the sensors' circumcenter"));
        return Ok(RecoveryND {
            x1_hat: x,
            distances: DistanceEstimates { alpha_std_error: alloc::vec![0.0; m], alpha, differences, degenerate: true },
            pair_fits,
            reference_pair: None,
            multilateration: None,
            condition_d,
            diagnostics,
        });
    }

    let reference = pair_fits.iter().max_by(|a, b| a.fit.d.abs().total_cmp(&b.fit.d.abs())).expect("at least one pair");
    let (i0, j0) = (reference.i, reference.j);
    let f = reference.fit;
    let (ai, aj) = pairwise_from_log_rho(n, f.log_rho, f.d)?;
    let (se_i, se_j) = pairwise_std_errors(n, f.log_rho, f.d, f.d_std_error, f.log_rho_std_error)?;
    let mut alpha = alloc::vec![0.0; m];
    let mut alpha_se = alloc::vec![0.0; m];
    alpha[i0] = ai;
    alpha[j0] = aj;
    alpha_se[i0] = se_i;
    alpha_se[j0] = se_j;
    let estimates =
        DistanceEstimates { alpha: Vec::new(), alpha_std_error: Vec::new(), differences, degenerate: false };
    for k in 0..m {
        if k == i0 || k == j0 {
            continue;
        }
        let (di, si) = estimates.d(i0, k).expect("pair present");
        let (dj, sj) = estimates.d(j0, k).expect("pair present");
        let (from_i, from_j) = (se_i + si, se_j + sj);
        if from_i <= from_j {
            alpha[k] = ai + di;
            alpha_se[k] = from_i;
        } else {
            alpha[k] = aj + dj;
            alpha_se[k] = from_j;
        }
        if !(alpha[k] > 0.0) {
            return Err(Error::OutOfRange { what: "distance estimate", value: alpha[k], min: 0.0, max: f64::INFINITY });
        }
    }
    let ml = multilaterate(&sensors, &alpha, n)?;
    diagnostics.push(format!("reference pair ({i0}, {j0}) with d = {:.6e} and ln rho = {:.6e}", f.d, f.log_rho));
    diagnostics
        .push(format!("multilateration rms residual {:.3e}, condition number {:.3e}", ml.rms_residual, ml.condition));
    for p in &pair_fits {
        if let Some(l) = p.ladder {
            if (l.d - p.fit.d).abs() > 3.0 * (l.std_error + p.fit.d_std_error) + 1e-6 * scale {
                diagnostics.push(format!(
                    "pair ({}, {}): ladder difference {:.6e} disagrees with joint fit {:.6e}",
                    p.i, p.j, l.d, p.fit.d
                ));
            }
        }
    }
    Ok(RecoveryND {
        x1_hat: ml.x,
        distances: DistanceEstimates { alpha, alpha_std_error: alpha_se, ..estimates },
        pair_fits,
        reference_pair: Some((i0, j0)),
        multilateration: Some(ml),
        condition_d,
        diagnostics,
    })
}

/// Intensity from one sensor at distance `alpha`, deconvolving by the exact
/// free-space Duhamel kernel.
pub fn recover_intensity_nd(
    psi: &[f64],
    grid: &TimeGrid,
    alpha: f64,
    medium: &FreeSpaceMedium,
    regularization: Regularization,
) -> Result<Deconvolution> {
    let kernel = HeatKernel::new(medium.dim, alpha, medium.reaction, medium.diffusivity)?;
    volterra_deconvolve(psi, grid, &kernel, regularization)
}

/// Cross-sensor relative spread above which the distances are suspect.
pub const SPREAD_THRESHOLD: f64 = 0.1;

/// Intensities recovered at every sensor.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityND {
    pub per_sensor: Vec<Vec<f64>>,
    /// Estimate from the nearest sensor.
    pub q_hat: Vec<f64>,
    pub nearest: usize,
    /// Largest relative L₂ distance of a per-sensor estimate from `q_hat`.
    pub spread: f64,
    pub consistent: bool,
}

pub fn recover_intensity_all(
    records: &[SensorRecord],
    alpha: &[f64],
    medium: &FreeSpaceMedium,
    regularization: Regularization,
) -> Result<IntensityND> {
    if records.len() != alpha.len() {
        return Err(Error::DimensionMismatch { expected: records.len(), found: alpha.len() });
    }
    if records.is_empty() {
        return Err(Error::Empty("sensors"));
    }
    let mut per_sensor = Vec::with_capacity(records.len());
    for (r, &a) in records.iter().zip(alpha) {
        per_sensor.push(recover_intensity_nd(&r.samples, &r.grid, a, medium, regularization)?.q);
    }
    let nearest = alpha.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).expect("nonempty");
    let q_hat = per_sensor[nearest].clone();
    let norm = q_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
    let spread = per_sensor
        .iter()
        .map(|q| {
            let diff = q.iter().zip(&q_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if norm > 0.0 {
                diff / norm
            } else {
                diff
            }
        })
        .fold(0.0, f64::max);
    Ok(IntensityND { per_sensor, q_hat, nearest, spread, consistent: spread <= SPREAD_THRESHOLD })
}
