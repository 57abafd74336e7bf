//! Source layouts whose sensor transforms cannot tell two configurations
//! apart, evaluated directly from free-space resolvent sums.

use crate::forward::green_laplace;
use crate::model::Point;
use crate::{Error, Result};
use alloc::vec::Vec;

/// One probe evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleRow {
    pub probe: Point,
    pub lambda: f64,
    pub discrepancy: f64,
    /// Magnitude of a single-source term at the probe, for relative comparisons.
    pub scale: f64,
}

/// Probe table of a reproduction run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleTable {
    pub rows: Vec<OracleRow>,
}

impl OracleTable {
    pub fn max_discrepancy(&self) -> f64 {
        self.rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max)
    }

    /// Largest `discrepancy/scale`.
    pub fn max_relative(&self) -> f64 {
        self.rows.iter().map(|r| r.discrepancy / r.scale).fold(0.0, f64::max)
    }
}

fn green(n: usize, source: &Point, probe: &Point, lambda: f64) -> Result<f64> {
    let r = source.distance(probe);
    if r == 0.0 {
        return Err(Error::SensorAtSource);
    }
    green_laplace(n, r, lambda, 0.0)
}

/// Sources `+q` at `(a, 0, …)` and `-q` at `(-a, 0, …)`: the transform
/// vanishes on the bisecting line or plane.
pub fn example1(n: usize, a: f64, q: f64, probes: &[Point], lambdas: &[f64]) -> Result<OracleTable> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    let mut c = [0.0; 3];
    c[0] = a;
    let x1 = Point::new(&c[..n])?;
    let x2 = x1.scale(-1.0);
    let mut rows = Vec::with_capacity(probes.len() * lambdas.len());
    for p in probes {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
        for &lambda in lambdas {
            let u1 = q * green(n, &x1, p, lambda)?;
            let u2 = q * green(n, &x2, p, lambda)?;
            rows.push(OracleRow { probe: *p, lambda, discrepancy: (u1 - u2).abs(), scale: u1.abs() });
        }
    }
    Ok(OracleTable { rows })
}

/// Unit-intensity pairs `(a, a, 0), (-a, -a, 0)` and `(a, -a, 0), (-a, a, 0)`
/// in three dimensions.
pub fn example2(a: f64, probes: &[Point], lambdas: &[f64]) -> Result<OracleTable> {
    let first = [Point::spatial(a, a, 0.0), Point::spatial(-a, -a, 0.0)];
    let second = [Point::spatial(a, -a, 0.0), Point::spatial(-a, a, 0.0)];
    let mut rows = Vec::with_capacity(probes.len() * lambdas.len());
    for p in probes {
        if p.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: p.dim() });
        }
        for &lambda in lambdas {
            let mut u1 = 0.0;
            let mut u2 = 0.0;
            for (x, y) in first.iter().zip(&second) {
                u1 += green(3, x, p, lambda)?;
                u2 += green(3, y, p, lambda)?;
            }
            let scale = green(3, &first[0], p, lambda)?.abs();
            rows.push(OracleRow { probe: *p, lambda, discrepancy: (u1 - u2).abs(), scale });
        }
    }
    Ok(OracleTable { rows })
}

/// `count` probes on the bisector of the first example, spread over radius
/// `radius` (a single point for `n = 1`).
pub fn bisector_probes(n: usize, count: usize, radius: f64) -> Result<Vec<Point>> {
    match n {
        1 => Ok(alloc::vec![Point::on_line(0.0)]),
        2 => Ok((0..count)
            .map(|k| {
                let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
                Point::planar(0.0, radius * (2.0 * t - 1.0))
            })
            .collect()),
        3 => Ok((0..count)
            .map(|k| {
                // golden-angle spiral on a disc
                let f = (k as f64 + 0.5) / count as f64;
                let rad = radius * f.sqrt();
                let th = 2.399_963_229_728_653 * k as f64;
                Point::spatial(0.0, rad * th.cos(), rad * th.sin())
            })
            .collect()),
        _ => Err(Error::InvalidDimension(n)),
    }
}

/// The six axis points `(±M,0,0), (0,±M,0), (0,0,±M)`.
pub fn axis_probes(m: f64) -> Vec<Point> {
    alloc::vec![
        Point::spatial(m, 0.0, 0.0),
        Point::spatial(-m, 0.0, 0.0),
        Point::spatial(0.0, m, 0.0),
        Point::spatial(0.0, -m, 0.0),
        Point::spatial(0.0, 0.0, m),
        Point::spatial(0.0, 0.0, -m),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_example_vanishes_on_bisector() {
        for n in 1..=3 {
            let probes = bisector_probes(n, 20, 3.0).unwrap();
            let t = example1(n, 1.0, 1.0, &probes, &[1.0, 10.0, 100.0]).unwrap();
            assert_eq!(t.max_discrepancy(), 0.0);
        }
        let off = example1(3, 1.0, 1.0, &[Point::spatial(0.5, 0.3, 0.0)], &[1.0]).unwrap();
        assert!(off.max_discrepancy() > 0.0);
    }

    #[test]
    fn second_example_axis_points() {
        let t = example2(1.0, &axis_probes(3.0), &[10.0]).unwrap();
        let six = t.max_discrepancy();
        assert!(six <= 1e-14 * t.rows[0].scale);
        let seventh = example2(1.0, &[Point::spatial(1.0, 2.0, 0.0)], &[10.0]).unwrap();
        assert!(seventh.max_discrepancy() > 1e3 * six.max(f64::MIN_POSITIVE));
        let same = example2(0.0, &[Point::spatial(1.0, 2.0, 0.0)], &[10.0]).unwrap();
        assert_eq!(same.max_discrepancy(), 0.0);
    }

    #[test]
    fn probe_on_source_is_rejected() {
        assert_eq!(example2(1.0, &[Point::spatial(1.0, 1.0, 0.0)], &[1.0]).unwrap_err(), Error::SensorAtSource);
    }
}
