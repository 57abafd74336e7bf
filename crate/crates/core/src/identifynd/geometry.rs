//! Sensor geometry: condition (D), circumcenters and multilateration.

use crate::model::Point;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Outcome of the condition (D) check.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionD {
    pub holds: bool,
    /// Indices of a collinear triple (`n = 2`) or coplanar quadruple (`n = 3`).
    pub witness: Option<Vec<usize>>,
}

fn scale_of(points: &[Point]) -> f64 {
    let mut s: f64 = 0.0;
    for (k, p) in points.iter().enumerate() {
        for q in &points[k + 1..] {
            s = s.max(p.distance(q));
        }
    }
    s
}

fn det2(u: &[f64], v: &[f64]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

fn det3(u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// No three points collinear (`n = 2`) or four coplanar (`n = 3`), with
/// tolerance `1e-12·scale^n` on the determinant. Fewer points than a full
/// subset pass vacuously.
pub fn condition_d_check(points: &[Point], n: usize) -> ConditionD {
    let scale = scale_of(points);
    let tol = 1e-12 * scale.powi(n as i32);
    let s = points.len();
    let diff = |a: usize, b: usize| points[a].sub(&points[b]);
    let fail = |w: Vec<usize>| ConditionD { holds: false, witness: Some(w) };
    if n == 2 {
        for i in 0..s {
            for j in i + 1..s {
                for k in j + 1..s {
                    if det2(diff(j, i).coords(), diff(k, i).coords()).abs() <= tol {
                        return fail(vec![i, j, k]);
                    }
                }
            }
        }
    } else if n == 3 {
        for i in 0..s {
            for j in i + 1..s {
                for k in j + 1..s {
                    for l in k + 1..s {
                        let d = det3(diff(j, i).coords(), diff(k, i).coords(), diff(l, i).coords());
                        if d.abs() <= tol {
                            return fail(vec![i, j, k, l]);
                        }
                    }
                }
            }
        }
    }
    ConditionD { holds: true, witness: None }
}

fn check_points(points: &[Point], n: usize) -> Result<()> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    for p in points {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
    }
    if points.len() < n + 1 {
        return Err(Error::InsufficientData { what: "sensors", needed: n + 1, found: points.len() });
    }
    Ok(())
}

/// Least-squares solve with a rank check; returns the solution and the
/// condition number.
fn solve_checked(a: DMatrix<f64>, rhs: DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(smin > 1e-10 * smax) {
        return Err(Error::RankDeficient { condition });
    }
    let x = svd.solve(&rhs, 0.0).map_err(|_| Error::RankDeficient { condition })?;
    Ok((x, condition))
}

/// Subtracts the sphere equation of point 0 from the others:
/// `2(b_j - b_0)·x = |b_j|² - |b_0|² - α_j² + α_0²`.
fn sphere_system(points: &[Point], radii: &[f64], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let b0 = points[0];
    let m = points.len() - 1;
    let a = DMatrix::from_fn(m, n, |r, c| 2.0 * (points[r + 1].coords()[c] - b0.coords()[c]));
    let rhs = DVector::from_fn(m, |r, _| {
        let b = points[r + 1];
        b.dot(&b) - b0.dot(&b0) - radii[r + 1] * radii[r + 1] + radii[0] * radii[0]
    });
    (a, rhs)
}

fn to_point(v: &DVector<f64>) -> Point {
    Point::new(v.as_slice()).expect("dimension 2 or 3")
}

/// Center of the circle (`n = 2`) or sphere (`n = 3`) through the points;
/// least squares if more than `n + 1` are given.
pub fn circumcenter(points: &[Point], n: usize) -> Result<Point> {
    check_points(points, n)?;
    let cd = condition_d_check(points, n);
    if let Some(witness) = cd.witness {
        return Err(Error::DegenerateGeometry { witness });
    }
    let zeros = vec![0.0; points.len()];
    let (a, rhs) = sphere_system(points, &zeros, n);
    Ok(to_point(&solve_checked(a, rhs)?.0))
}

/// Source point from sensor distances.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Multilateration {
    pub x: Point,
    /// `|x - b_j| - α_j`.
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
    /// Condition number of the linearized system.
    pub condition: f64,
    pub iterations: usize,
}

/// Residual rms above this fraction of the mean distance is rejected.
pub const INCONSISTENCY_THRESHOLD: f64 = 0.1;

/// Linearized sphere intersection refined by Gauss–Newton on
/// `Σ (|x - b_j| - α_j)²`.
pub fn multilaterate(sensors: &[Point], distances: &[f64], n: usize) -> Result<Multilateration> {
    check_points(sensors, n)?;
    if distances.len() != sensors.len() {
        return Err(Error::DimensionMismatch { expected: sensors.len(), found: distances.len() });
    }
    for &a in distances {
        if !(a > 0.0) {
            return Err(Error::NonPositive { name: "distance", value: a });
        }
    }
    let (a, rhs) = sphere_system(sensors, distances, n);
    let (x0, condition) = solve_checked(a, rhs)?;
    let scale = scale_of(sensors).max(1.0);
    let mut x = x0;
    let mut iterations = 0;
    let residual = |x: &DVector<f64>| -> Vec<f64> {
        let p = to_point(x);
        sensors.iter().zip(distances).map(|(b, a)| p.distance(b) - a).collect()
    };
    for _ in 0..100 {
        let p = to_point(&x);
        let mut jac = DMatrix::zeros(sensors.len(), n);
        let mut singular = false;
        for (r, b) in sensors.iter().enumerate() {
            let dist = p.distance(b);
            if dist == 0.0 {
                singular = true;
                break;
            }
            for c in 0..n {
                jac[(r, c)] = (p.coords()[c] - b.coords()[c]) / dist;
            }
        }
        if singular {
            break;
        }
        let res = DVector::from_vec(residual(&x));
        let Ok(step) = jac.svd(true, true).solve(&res, 1e-14) else { break };
        x -= &step;
        iterations += 1;
        if step.norm() <= 1e-15 * scale {
            break;
        }
    }
    let residuals = residual(&x);
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    if rms_residual > INCONSISTENCY_THRESHOLD * mean {
        return Err(Error::InconsistentDistances { residual: rms_residual });
    }
    Ok(Multilateration { x: to_point(&x), residuals, rms_residual, condition, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Vec<Point> {
        vec![
            Point::spatial(1.0, 1.0, 1.0),
            Point::spatial(1.0, -1.0, -1.0),
            Point::spatial(-1.0, 1.0, -1.0),
            Point::spatial(-1.0, -1.0, 1.0),
        ]
    }

    #[test]
    fn condition_d_examples() {
        let ok = [Point::planar(0.0, 0.0), Point::planar(1.0, 0.0), Point::planar(0.0, 1.0)];
        assert!(condition_d_check(&ok, 2).holds);
        let bad = [Point::planar(0.0, 0.0), Point::planar(1.0, 1.0), Point::planar(2.0, 2.0), Point::planar(0.0, 1.0)];
        let c = condition_d_check(&bad, 2);
        assert!(!c.holds);
        assert_eq!(c.witness, Some(vec![0, 1, 2]));
        assert!(condition_d_check(&tetra(), 3).holds);
    }

    #[test]
    fn circumcenters() {
        let tri = [Point::planar(1.0, 0.0), Point::planar(-1.0, 0.0), Point::planar(0.0, 1.0)];
        let c = circumcenter(&tri, 2).unwrap();
        assert!(c.norm() < 1e-15);
        assert!(circumcenter(&tetra(), 3).unwrap().norm() < 1e-15);
        let pts = [
            Point::spatial(1.0, 0.0, 0.0),
            Point::spatial(0.0, 1.0, 0.0),
            Point::spatial(0.0, 0.0, 1.0),
            Point::spatial(1.0, 1.0, 1.0),
        ];
        let c = circumcenter(&pts, 3).unwrap();
        let d: Vec<f64> = pts.iter().map(|p| p.distance(&c)).collect();
        let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-12);
    }

    #[test]
    fn exact_distances_recover_point() {
        let x = Point::spatial(0.2, 0.1, -0.3);
        let s = tetra();
        let d: Vec<f64> = s.iter().map(|b| b.distance(&x)).collect();
        let m = multilaterate(&s, &d, 3).unwrap();
        assert!(m.x.distance(&x) < 1e-10);
        assert!(m.rms_residual < 1e-10);
    }

    #[test]
    fn collinear_sensors_are_rank_deficient() {
        let s = [Point::planar(0.0, 0.0), Point::planar(1.0, 0.0), Point::planar(2.0, 0.0)];
        let d = [1.0, 1.0, 1.5];
        assert!(matches!(multilaterate(&s, &d, 2), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn perturbed_distances_stay_close() {
        let x = Point::planar(0.3, -0.2);
        let s = [Point::planar(1.0, 0.0), Point::planar(-1.0, 0.5), Point::planar(0.0, -1.5), Point::planar(1.2, 1.1)];
        let mut d: Vec<f64> = s.iter().map(|b| b.distance(&x)).collect();
        d[0] += 1e-3;
        let m = multilaterate(&s, &d, 2).unwrap();
        assert!(m.x.distance(&x) <= m.condition * 1e-3);
        assert!(m.rms_residual > 0.0);
    }
}
