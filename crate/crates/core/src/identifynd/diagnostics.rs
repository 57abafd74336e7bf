//! Identifiability checks for several sources with constant intensities.

use crate::model::{sensor_source_distances, DriftFieldND, Point};
use crate::quad::gauss_legendre_integrate;
use crate::{Error, Result};
use alloc::vec::Vec;
use nalgebra::DMatrix;

/// Leading-order amplitude matrix of the sensor transforms.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct A0Matrix {
    /// `entries[j][i]`: sensor `j`, source `i`.
    pub entries: Vec<Vec<f64>>,
    /// `phi[j][i] = φ_j(x_i)`.
    pub phi: Vec<Vec<f64>>,
    /// Sources attaining the smallest distance, per sensor.
    pub nearest: Vec<Vec<usize>>,
    /// `None` for a non-square matrix.
    pub determinant: Option<f64>,
    /// `|det| ≤ 1e-10·‖A₀‖_F^r`.
    pub singular: Option<bool>,
}

const LINE_NODES: usize = 16;

/// `φ(x) = -½ ∫₀¹ ā(b + τ(x - b))·(x - b) dτ`.
pub fn drift_phase(drift: &DriftFieldND, sensor: &Point, x: &Point) -> f64 {
    if drift.is_zero() {
        return 0.0;
    }
    let dx = x.sub(sensor);
    -0.5 * gauss_legendre_integrate(|tau| drift.eval(&sensor.add(&dx.scale(tau))).dot(&dx), 0.0, 1.0, LINE_NODES)
}

pub fn build_a0(sources: &[Point], sensors: &[Point], drift: &DriftFieldND) -> Result<A0Matrix> {
    let dist = sensor_source_distances(sources, sensors)?;
    if drift.dim() != sources[0].dim() {
        return Err(Error::DimensionMismatch { expected: sources[0].dim(), found: drift.dim() });
    }
    let r = sources.len();
    let s = sensors.len();
    let mut phi = Vec::with_capacity(s);
    let mut entries: Vec<Vec<f64>> = Vec::with_capacity(s);
    for (j, b) in sensors.iter().enumerate() {
        let row: Vec<f64> = sources.iter().map(|x| drift_phase(drift, b, x)).collect();
        entries.push((0..r).map(|i| if dist.nearest[j].contains(&i) { row[i].exp() } else { 0.0 }).collect());
        phi.push(row);
    }
    let (determinant, singular) = if r == s {
        let m = DMatrix::from_fn(s, r, |j, i| entries[j][i]);
        let det = m.clone().lu().determinant();
        let norm = m.norm();
        (Some(det), Some(det.abs() <= 1e-10 * norm.powi(r as i32)))
    } else {
        (None, None)
    };
    Ok(A0Matrix { entries, phi, nearest: dist.nearest, determinant, singular })
}

/// Sensor-count bound for `r` constant-intensity sources: `s ≥ 2r + 1` in
/// the plane, `s ≥ 3r + 1` in space.
pub fn sufficiency_check(r: usize, s: usize, n: usize) -> Result<bool> {
    if r == 0 {
        return Err(Error::NonPositive { name: "source count", value: 0.0 });
    }
    match n {
        2 => Ok(s > 2 * r),
        3 => Ok(s > 3 * r),
        _ => Err(Error::InvalidDimension(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_drift_permutation() {
        let sources = [Point::planar(0.0, 0.0), Point::planar(5.0, 0.0)];
        let sensors = [Point::planar(4.0, 0.5), Point::planar(1.0, 0.2)];
        let a = build_a0(&sources, &sensors, &DriftFieldND::Zero { dim: 2 }).unwrap();
        assert_eq!(a.entries, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(a.determinant, Some(-1.0));
        assert_eq!(a.singular, Some(false));
    }

    #[test]
    fn shared_nearest_source() {
        let sources = [Point::planar(0.0, 0.0), Point::planar(5.0, 0.0)];
        let sensors = [Point::planar(0.0, 1.0), Point::planar(0.0, -1.0)];
        let a = build_a0(&sources, &sensors, &DriftFieldND::Zero { dim: 2 }).unwrap();
        assert_eq!(a.entries, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(a.singular, Some(true));
    }

    #[test]
    fn constant_drift_phase() {
        let drift = DriftFieldND::Constant { value: Point::planar(1.0, 0.0) };
        let a = build_a0(&[Point::planar(1.0, 0.0)], &[Point::planar(0.0, 0.0)], &drift).unwrap();
        assert!((a.phi[0][0] + 0.5).abs() < 1e-15);
        assert!((a.entries[0][0] - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn affine_drift_phase() {
        // ā(x) = (x, 0): φ = -½ ∫₀¹ τ·1 dτ = -1/4 from 0 to (1, 0)
        let drift =
            DriftFieldND::Affine { offset: Point::planar(0.0, 0.0), matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]] };
        let p = drift_phase(&drift, &Point::planar(0.0, 0.0), &Point::planar(1.0, 0.0));
        assert!((p + 0.25).abs() < 1e-15);
    }

    #[test]
    fn sufficiency_bounds() {
        assert!(sufficiency_check(2, 7, 3).unwrap());
        assert!(!sufficiency_check(2, 6, 3).unwrap());
        assert!(sufficiency_check(1, 3, 2).unwrap());
        assert!(!sufficiency_check(1, 2, 2).unwrap());
        assert!(sufficiency_check(1, 3, 1).is_err());
    }
}
