//! Crank–Nicolson solver for `u_t = a₂u_xx - a₁u_x - a₀u + Σ q_i δ(x - x_i) + f₀`
//! on an interval.

use crate::model::{BoundaryCondition, Coefficients, Point, Scenario, SpatialDomain, TimeGrid};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Discretization options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CnOptions {
    /// Number of spatial cells; `None` uses the coefficient grid.
    pub cells: Option<usize>,
    /// Keep every `stride`-th time level of the field (the last is always kept).
    pub snapshot_stride: usize,
    /// Replace the first two Crank–Nicolson steps by four backward-Euler
    /// half steps, which damps the grid-scale oscillations a point load
    /// excites in the trapezoidal rule.
    pub smoothing_start: bool,
}

impl Default for CnOptions {
    fn default() -> Self {
        Self { cells: None, snapshot_stride: 1, smoothing_start: true }
    }
}

/// Field snapshots and sensor traces.
#[derive(Clone, Debug, PartialEq)]
pub struct CnSolution {
    pub nodes: Vec<f64>,
    /// Time index of each stored snapshot.
    pub snapshot_steps: Vec<usize>,
    pub field: Vec<Vec<f64>>,
    /// One trace per scenario sensor, one sample per grid time.
    pub traces: Vec<Vec<f64>>,
    pub grid: TimeGrid,
}

impl CnSolution {
    /// Field snapshot as `(x, u)` rows.
    pub fn snapshot(&self, i: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.field[i].iter().copied())
    }
}

struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.lower[i] * u[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * u[i + 1];
            }
            out[i] = s;
        }
    }

    /// Thomas algorithm for `(I - θA) x = rhs`, overwriting `rhs`.
    fn solve_shifted(&self, theta: f64, fixed: &[bool], rhs: &mut [f64], scratch: &mut [f64]) {
        let n = rhs.len();
        let coef = |i: usize| -> (f64, f64, f64) {
            if fixed[i] {
                (0.0, 1.0, 0.0)
            } else {
                (-theta * self.lower[i], 1.0 - theta * self.diag[i], -theta * self.upper[i])
            }
        };
        let (_, d0, u0) = coef(0);
        scratch[0] = u0 / d0;
        rhs[0] /= d0;
        for i in 1..n {
            let (l, d, u) = coef(i);
            let m = d - l * scratch[i - 1];
            scratch[i] = u / m;
            rhs[i] = (rhs[i] - l * rhs[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i] * rhs[i + 1];
        }
    }
}

/// Linear interpolation of node values at `x`.
fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let h = nodes[1] - nodes[0];
    let pos = ((x - nodes[0]) / h).clamp(0.0, (nodes.len() - 1) as f64);
    let m = (pos.floor() as usize).min(nodes.len() - 2);
    let th = pos - m as f64;
    (1.0 - th) * values[m] + th * values[m + 1]
}

/// Resamples values given on `count` uniform nodes over `[a, b]` at `x`.
fn resample(values: &[f64], a: f64, b: f64, x: f64) -> f64 {
    let nodes: Vec<f64> = (0..values.len()).map(|m| a + (b - a) * m as f64 / (values.len() - 1) as f64).collect();
    interpolate(&nodes, values, x)
}

/// Solves the scenario on its interval with second-order differences in
/// space and the trapezoidal rule in time.
pub fn crank_nicolson_1d(scenario: &Scenario, options: &CnOptions) -> Result<CnSolution> {
    let (a, b, left, right) = match &scenario.domain {
        SpatialDomain::Interval { a, b, left, right } => (*a, *b, left, right),
        SpatialDomain::FreeSpace { dim, .. } => return Err(Error::InvalidDimension(*dim)),
    };
    let coeffs = match &scenario.coefficients {
        Coefficients::Field1D(c) => c,
        _ => return Err(Error::InvalidDimension(scenario.domain.dim())),
    };
    let grid = scenario.grid;
    TimeGrid::new(grid.step, grid.steps)?;
    let (m1, _) = coeffs.ellipticity_bounds();
    if !(m1 > 0.0) {
        return Err(Error::NotElliptic { min: m1 });
    }
    let cells = options.cells.unwrap_or(coeffs.points() - 1);
    if cells < 2 {
        return Err(Error::InsufficientData { what: "spatial cells", needed: 2, found: cells });
    }
    for src in &scenario.sources {
        let x = src.location.x();
        if src.location.dim() != 1 || !(x > a && x < b) {
            return Err(Error::OutOfRange { what: "source location", value: x, min: a, max: b });
        }
    }
    for s in &scenario.sensors {
        let x = s.x();
        if s.dim() != 1 || !(x >= a && x <= b) {
            return Err(Error::OutOfRange { what: "sensor location", value: x, min: a, max: b });
        }
    }

    let n = cells + 1;
    let h = (b - a) / cells as f64;
    let nodes: Vec<f64> = (0..n).map(|m| a + h * m as f64).collect();

    // Spatial operator A with ghost-node closure of Robin conditions.
    let mut op = Tridiagonal::zeros(n);
    for (i, &x) in nodes.iter().enumerate() {
        let a2 = coeffs.a2_at(x);
        let a1 = coeffs.a1_at(x);
        let a0 = coeffs.a0_at(x);
        op.lower[i] = a2 / (h * h) + a1 / (2.0 * h);
        op.diag[i] = -2.0 * a2 / (h * h) - a0;
        op.upper[i] = a2 / (h * h) - a1 / (2.0 * h);
    }
    let mut fixed = vec![false; n];
    // Boundary load per unit g: coefficient multiplying g(t) at the end node.
    let mut left_load = 0.0;
    let mut right_load = 0.0;
    match left {
        BoundaryCondition::Dirichlet { .. } => fixed[0] = true,
        BoundaryCondition::Robin { sigma, .. } => {
            let l = op.lower[0];
            op.diag[0] += 2.0 * h * sigma * l;
            op.upper[0] += l;
            left_load = -2.0 * h * l;
        }
    }
    op.lower[0] = 0.0;
    match right {
        BoundaryCondition::Dirichlet { .. } => fixed[n - 1] = true,
        BoundaryCondition::Robin { sigma, .. } => {
            let u = op.upper[n - 1];
            op.diag[n - 1] -= 2.0 * h * sigma * u;
            op.lower[n - 1] += u;
            right_load = 2.0 * h * u;
        }
    }
    op.upper[n - 1] = 0.0;

    // Source loads: linear hat weights on the bracketing nodes.
    let loads: Vec<(usize, f64, f64, Vec<f64>)> = scenario
        .sources
        .iter()
        .map(|src| {
            let pos = (src.location.x() - a) / h;
            let m = (pos.floor() as usize).min(n - 2);
            let th = pos - m as f64;
            (m, (1.0 - th) / h, th / h, src.intensity.sample(&grid))
        })
        .collect();
    for src in &scenario.sources {
        if let crate::model::Intensity::Sampled { q } = &src.intensity {
            grid.check_series(q)?;
        }
    }
    let forcing: Vec<f64> = match &scenario.forcing {
        Some(f) => nodes.iter().map(|&x| resample(f, coeffs.a, coeffs.b, x)).collect(),
        None => vec![0.0; n],
    };

    // Right-hand side F(t_k) for free nodes; boundary values for fixed ones.
    let load_at = |k: usize, out: &mut [f64]| {
        out.copy_from_slice(&forcing);
        for (m, w0, w1, q) in &loads {
            out[*m] += w0 * q[k];
            out[*m + 1] += w1 * q[k];
        }
        if !fixed[0] {
            out[0] += left_load * left.value(k);
        }
        if !fixed[n - 1] {
            out[n - 1] += right_load * right.value(k);
        }
    };
    // Linear interpolation of the load between samples for half steps.
    let load_mid = |k: usize, out: &mut [f64], tmp: &mut [f64]| {
        load_at(k, out);
        load_at(k + 1, tmp);
        for (o, t) in out.iter_mut().zip(tmp.iter()) {
            *o = 0.5 * (*o + *t);
        }
    };

    let mut u: Vec<f64> = match &scenario.initial {
        Some(u0) => nodes.iter().map(|&x| resample(u0, coeffs.a, coeffs.b, x)).collect(),
        None => vec![0.0; n],
    };
    if fixed[0] {
        u[0] = left.value(0);
    }
    if fixed[n - 1] {
        u[n - 1] = right.value(0);
    }

    let stride = options.snapshot_stride.max(1);
    let mut field = vec![u.clone()];
    let mut snapshot_steps = vec![0];
    let mut traces: Vec<Vec<f64>> = scenario.sensors.iter().map(|_| Vec::with_capacity(grid.len())).collect();
    let record = |u: &[f64], traces: &mut Vec<Vec<f64>>| {
        for (t, s) in traces.iter_mut().zip(&scenario.sensors) {
            t.push(interpolate(&nodes, u, s.x()));
        }
    };
    record(&u, &mut traces);

    let tau = grid.step;
    let mut rhs = vec![0.0; n];
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut au = vec![0.0; n];
    for k in 0..grid.steps {
        if options.smoothing_start && k < 2 {
            // Two backward-Euler half steps.
            for half in 0..2 {
                if half == 0 {
                    load_mid(k, &mut f1, &mut f0);
                } else {
                    load_at(k + 1, &mut f1);
                }
                for i in 0..n {
                    rhs[i] = u[i] + 0.5 * tau * f1[i];
                }
                set_fixed(&mut rhs, &fixed, left, right, k + 1);
                op.solve_shifted(0.5 * tau, &fixed, &mut rhs, &mut scratch);
                u.copy_from_slice(&rhs);
            }
        } else {
            load_at(k, &mut f0);
            load_at(k + 1, &mut f1);
            op.apply(&u, &mut au);
            for i in 0..n {
                rhs[i] = u[i] + 0.5 * tau * (au[i] + f0[i] + f1[i]);
            }
            set_fixed(&mut rhs, &fixed, left, right, k + 1);
            op.solve_shifted(0.5 * tau, &fixed, &mut rhs, &mut scratch);
            u.copy_from_slice(&rhs);
        }
        record(&u, &mut traces);
        if (k + 1) % stride == 0 || k + 1 == grid.steps {
            field.push(u.clone());
            snapshot_steps.push(k + 1);
        }
    }
    Ok(CnSolution { nodes, snapshot_steps, field, traces, grid })
}

fn set_fixed(rhs: &mut [f64], fixed: &[bool], left: &BoundaryCondition, right: &BoundaryCondition, k: usize) {
    let n = rhs.len();
    if fixed[0] {
        rhs[0] = left.value(k);
    }
    if fixed[n - 1] {
        rhs[n - 1] = right.value(k);
    }
}

/// Trace of a single sensor, for callers that only need one location.
pub fn trace_at(solution: &CnSolution, sensor_index: usize) -> Option<&[f64]> {
    solution.traces.get(sensor_index).map(|t| t.as_slice())
}

/// Linear interpolation of a stored snapshot at `x`.
pub fn field_at(solution: &CnSolution, snapshot: usize, x: &Point) -> f64 {
    interpolate(&solution.nodes, &solution.field[snapshot], x.x())
}
