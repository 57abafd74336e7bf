//! Small dense least-squares fits and robust aggregation helpers.

use crate::{Error, Result};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Result of an ordinary least-squares fit `y ≈ X β`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Standard errors of the coefficients (zero for an exact fit).
    pub std_errors: Vec<f64>,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Least squares with design columns given as slices of equal length.
pub fn least_squares(columns: &[&[f64]], y: &[f64]) -> Result<LinearFit> {
    let p = columns.len();
    let n = y.len();
    if n < p || p == 0 {
        return Err(Error::InsufficientData { what: "least-squares points", needed: p.max(1), found: n });
    }
    for c in columns {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
    }
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::RankDeficient { condition: smax / smin });
    }
    let beta = svd.solve(&yv, 1e-13 * smax).map_err(|_| Error::RankDeficient { condition: smax / smin })?;
    let resid = &yv - &x * &beta;
    let rss = resid.norm_squared();
    let rms = (rss / n as f64).sqrt();
    let dof = n.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    // diag((XᵀX)⁻¹) = Σ_k V_jk² / s_k²
    let vt = svd.v_t.as_ref().expect("computed");
    let std_errors = (0..p)
        .map(|j| {
            let d: f64 = (0..p).map(|k| vt[(k, j)].powi(2) / svd.singular_values[k].powi(2)).sum();
            (sigma2 * d).sqrt()
        })
        .collect();
    Ok(LinearFit { coefficients: beta.iter().copied().collect(), std_errors, rms_residual: rms })
}

/// Weighted median: smallest value whose cumulative weight reaches half the total.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> Option<f64> {
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(v, w)| v.is_finite() && **w > 0.0 && w.is_finite())
        .map(|(v, w)| (*v, *w))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (v, w) in &pairs {
        acc += w;
        if acc >= 0.5 * total {
            return Some(*v);
        }
    }
    pairs.last().map(|p| p.0)
}

/// Median absolute deviation about `center`.
pub fn mad(values: &[f64], center: f64) -> f64 {
    let dev: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    let ones: Vec<f64> = dev.iter().map(|_| 1.0).collect();
    weighted_median(&dev, &ones).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_line_exactly() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let ones = [1.0; 4];
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v).collect();
        let fit = least_squares(&[&ones, &x], &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 0.5).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn rank_deficient_design() {
        let a = [1.0, 1.0, 1.0];
        assert!(matches!(least_squares(&[&a, &a], &[1.0, 2.0, 3.0]), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn weighted_median_respects_weights() {
        assert_eq!(weighted_median(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), Some(2.0));
        assert_eq!(weighted_median(&[1.0, 2.0, 3.0], &[10.0, 1.0, 1.0]), Some(1.0));
        assert_eq!(weighted_median(&[], &[]), None);
    }
}
