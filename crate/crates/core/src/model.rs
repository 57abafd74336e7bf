//! Domains, coefficient fields, point sources, sensors and scenarios.
//!
//! Everything here is immutable after construction. Scenario invariants are
//! not enforced at construction time; [`validate_scenario`] reports every
//! violated invariant as data so callers can print all of them at once.

use crate::quad::adaptive_simpson;
use crate::{Error, Result};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Relative tolerance used to decide that two sensor–source distances tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A point in ℝⁿ, `n ∈ {1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        let mut c = [0.0; 3];
        c[..dim].copy_from_slice(coords);
        Ok(Self { coords: c, dim })
    }

    pub const fn on_line(x: f64) -> Self {
        Self { coords: [x, 0.0, 0.0], dim: 1 }
    }

    pub const fn planar(x: f64, y: f64) -> Self {
        Self { coords: [x, y, 0.0], dim: 2 }
    }

    pub const fn spatial(x: f64, y: f64, z: f64) -> Self {
        Self { coords: [x, y, z], dim: 3 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// First coordinate; the position for 1D points.
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    /// Euclidean distance. Both points must share a dimension.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for k in 0..self.dim {
            let d = self.coords[k] - other.coords[k];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Point) -> Point {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Point) -> Point {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Point {
        let mut p = *self;
        p.coords.iter_mut().for_each(|c| *c *= k);
        p
    }

    pub fn dot(&self, other: &Point) -> f64 {
        (0..self.dim).map(|k| self.coords[k] * other.coords[k]).sum()
    }

    fn zip(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Point {
        let mut p = *self;
        for k in 0..3 {
            p.coords[k] = f(self.coords[k], other.coords[k]);
        }
        p
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(&v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

/// Uniform time grid `t_k = k·τ`, `k = 0..=N`, horizon `T = N·τ`.
///
/// Series attached to a grid carry `N + 1` samples, the first at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TimeGrid {
    pub step: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(step: f64, steps: usize) -> Result<Self> {
        let g = Self { step, steps };
        g.check()?;
        Ok(g)
    }

    /// Grid with step `step` covering `[0, horizon]` (rounded to whole steps).
    pub fn covering(step: f64, horizon: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::NonPositive { name: "time step", value: step });
        }
        Self::new(step, (horizon / step).round() as usize)
    }

    fn check(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::NonPositive { name: "time step", value: self.step });
        }
        if self.steps < 2 {
            return Err(Error::InsufficientData { what: "time steps", needed: 2, found: self.steps });
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.steps as f64
    }

    /// Number of samples, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Checks a series length against the grid.
    pub fn check_series(&self, series: &[f64]) -> Result<()> {
        if series.len() != self.len() {
            return Err(Error::SeriesLength { expected: self.len(), found: series.len() });
        }
        Ok(())
    }
}

/// Boundary operator at one end of an interval.
///
/// `g` is sampled on the scenario time grid; an empty series means `g ≡ 0`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum BoundaryCondition {
    /// `u = g`.
    Dirichlet {
        #[cfg_attr(feature = "serde", serde(default))]
        g: Vec<f64>,
    },
    /// `u_x + σ u = g` (σ = 0 gives a Neumann condition).
    Robin {
        sigma: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        g: Vec<f64>,
    },
}

impl BoundaryCondition {
    pub fn homogeneous_dirichlet() -> Self {
        BoundaryCondition::Dirichlet { g: Vec::new() }
    }

    pub fn neumann() -> Self {
        BoundaryCondition::Robin { sigma: 0.0, g: Vec::new() }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            BoundaryCondition::Dirichlet { g } | BoundaryCondition::Robin { g, .. } => g,
        }
    }

    /// Boundary datum at sample `k`.
    pub fn value(&self, k: usize) -> f64 {
        self.data().get(k).copied().unwrap_or(0.0)
    }
}

/// Spatial domain of the model.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum SpatialDomain {
    /// Bounded interval `(a, b)` with boundary operators at both ends.
    Interval { a: f64, b: f64, left: BoundaryCondition, right: BoundaryCondition },
    /// ℝⁿ with `L = -D Δ + λ₀`; `diffusivity` is only meaningful for `n = 1`.
    FreeSpace {
        dim: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        reaction: f64,
        #[cfg_attr(feature = "serde", serde(default = "unit"))]
        diffusivity: f64,
    },
}

#[cfg(feature = "serde")]
fn unit() -> f64 {
    1.0
}

impl SpatialDomain {
    pub fn dim(&self) -> usize {
        match self {
            SpatialDomain::Interval { .. } => 1,
            SpatialDomain::FreeSpace { dim, .. } => *dim,
        }
    }
}

/// Sampled variable coefficients of `L₀u = a₂u'' - a₁u' - a₀u` on `[a, b]`.
///
/// Samples sit on a uniform grid and are interpolated by cubic Hermite
/// polynomials with second-order finite-difference slopes, so `a₂'` is
/// available everywhere and quadratics are reproduced exactly.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CoefficientField1D {
    pub a: f64,
    pub b: f64,
    pub a2: Vec<f64>,
    pub a1: Vec<f64>,
    pub a0: Vec<f64>,
}

impl CoefficientField1D {
    pub fn new(a: f64, b: f64, a2: Vec<f64>, a1: Vec<f64>, a0: Vec<f64>) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::OutOfRange { what: "interval end b", value: b, min: a, max: f64::INFINITY });
        }
        if a2.len() < 2 {
            return Err(Error::InsufficientData { what: "coefficient samples", needed: 2, found: a2.len() });
        }
        for s in [&a1, &a0] {
            if s.len() != a2.len() {
                return Err(Error::DimensionMismatch { expected: a2.len(), found: s.len() });
            }
        }
        Ok(Self { a, b, a2, a1, a0 })
    }

    /// Constant coefficients sampled at `points` nodes.
    pub fn constant(a: f64, b: f64, points: usize, a2: f64, a1: f64, a0: f64) -> Result<Self> {
        let n = points.max(2);
        Self::new(a, b, alloc::vec![a2; n], alloc::vec![a1; n], alloc::vec![a0; n])
    }

    /// Samples the given functions on `points` uniform nodes.
    pub fn from_fn(
        a: f64,
        b: f64,
        points: usize,
        a2: impl Fn(f64) -> f64,
        a1: impl Fn(f64) -> f64,
        a0: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let n = points.max(2);
        let h = (b - a) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|m| a + h * m as f64).collect();
        Self::new(
            a,
            b,
            xs.iter().map(|&x| a2(x)).collect(),
            xs.iter().map(|&x| a1(x)).collect(),
            xs.iter().map(|&x| a0(x)).collect(),
        )
    }

    pub fn points(&self) -> usize {
        self.a2.len()
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.points() - 1) as f64
    }

    pub fn node(&self, m: usize) -> f64 {
        self.a + self.spacing() * m as f64
    }

    /// `(M₁, M₂)`: smallest and largest sample of `a₂`.
    pub fn ellipticity_bounds(&self) -> (f64, f64) {
        self.a2.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn is_constant_a2(&self) -> bool {
        let (lo, hi) = self.ellipticity_bounds();
        hi - lo <= 1e-14 * hi.abs()
    }

    pub fn a2_at(&self, x: f64) -> f64 {
        hermite(&self.a2, self.a, self.spacing(), x).0
    }

    pub fn a2_prime_at(&self, x: f64) -> f64 {
        hermite(&self.a2, self.a, self.spacing(), x).1
    }

    pub fn a1_at(&self, x: f64) -> f64 {
        hermite(&self.a1, self.a, self.spacing(), x).0
    }

    pub fn a0_at(&self, x: f64) -> f64 {
        hermite(&self.a0, self.a, self.spacing(), x).0
    }

    /// Slowness `r = 1/√a₂`.
    pub fn r(&self, x: f64) -> f64 {
        1.0 / self.a2_at(x).sqrt()
    }

    /// `r₁ = -(a₂ r' r - a₁ r²)/2`, which simplifies to `(a₂' + 2a₁)/(4a₂)`.
    pub fn r1(&self, x: f64) -> f64 {
        let (a2, da2) = hermite(&self.a2, self.a, self.spacing(), x);
        (da2 + 2.0 * self.a1_at(x)) / (4.0 * a2)
    }

    /// Signed `∫_{from}^{to} r dξ`.
    pub fn integral_r(&self, from: f64, to: f64) -> f64 {
        adaptive_simpson(|x| self.r(x), from, to, 1e-13)
    }

    /// Signed `∫_{from}^{to} r₁ dξ`.
    pub fn integral_r1(&self, from: f64, to: f64) -> f64 {
        adaptive_simpson(|x| self.r1(x), from, to, 1e-10)
    }
}

/// Cubic Hermite interpolation of uniform samples; returns value and slope.
fn hermite(f: &[f64], a: f64, h: f64, x: f64) -> (f64, f64) {
    let n = f.len();
    let slope = |m: usize| -> f64 {
        if n == 2 {
            (f[1] - f[0]) / h
        } else if m == 0 {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        } else if m == n - 1 {
            (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
        } else {
            (f[m + 1] - f[m - 1]) / (2.0 * h)
        }
    };
    let pos = (x - a) / h;
    let m = (pos.floor().max(0.0) as usize).min(n - 2);
    let s = pos - m as f64;
    let (f0, f1) = (f[m], f[m + 1]);
    let (d0, d1) = (slope(m) * h, slope(m + 1) * h);
    let s2 = s * s;
    let s3 = s2 * s;
    let value =
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1;
    let deriv = ((6.0 * s2 - 6.0 * s) * f0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * f1
        + (3.0 * s2 - 2.0 * s) * d1)
        / h;
    (value, deriv)
}

/// Drift field `ā(x)` of the multidimensional operator `-Δ + ā·∇ + a₀`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum DriftFieldND {
    Zero {
        dim: usize,
    },
    Constant {
        value: Point,
    },
    /// `ā(x) = offset + M x`, `matrix` row-major `n × n`.
    Affine {
        offset: Point,
        matrix: Vec<Vec<f64>>,
    },
}

impl DriftFieldND {
    pub fn dim(&self) -> usize {
        match self {
            DriftFieldND::Zero { dim } => *dim,
            DriftFieldND::Constant { value } => value.dim(),
            DriftFieldND::Affine { offset, .. } => offset.dim(),
        }
    }

    pub fn eval(&self, x: &Point) -> Point {
        match self {
            DriftFieldND::Zero { .. } => x.scale(0.0),
            DriftFieldND::Constant { value } => *value,
            DriftFieldND::Affine { offset, matrix } => {
                let mut out = [0.0; 3];
                for (i, row) in matrix.iter().enumerate().take(offset.dim()) {
                    out[i] = offset.coords()[i] + row.iter().zip(x.coords()).map(|(m, v)| m * v).sum::<f64>();
                }
                Point::new(&out[..offset.dim()]).expect("dimension checked")
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DriftFieldND::Zero { .. } => true,
            DriftFieldND::Constant { value } => value.coords().iter().all(|c| *c == 0.0),
            DriftFieldND::Affine { offset, matrix } => {
                offset.coords().iter().all(|c| *c == 0.0) && matrix.iter().flatten().all(|c| *c == 0.0)
            }
        }
    }
}

/// Time profile of a source intensity.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum Intensity {
    Constant {
        q: f64,
    },
    /// Samples on the scenario time grid, linear in between.
    Sampled {
        q: Vec<f64>,
    },
}

impl Intensity {
    pub fn at_sample(&self, k: usize) -> f64 {
        match self {
            Intensity::Constant { q } => *q,
            Intensity::Sampled { q } => q.get(k).copied().unwrap_or(0.0),
        }
    }

    /// Samples on `grid`.
    pub fn sample(&self, grid: &TimeGrid) -> Vec<f64> {
        (0..grid.len()).map(|k| self.at_sample(k)).collect()
    }
}

/// A point source `q(t) δ(x - x_i)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PointSource {
    pub location: Point,
    pub intensity: Intensity,
}

impl PointSource {
    pub fn constant(location: Point, q: f64) -> Self {
        Self { location, intensity: Intensity::Constant { q } }
    }

    pub fn sampled(location: Point, q: Vec<f64>) -> Self {
        Self { location, intensity: Intensity::Sampled { q } }
    }
}

/// Measured series `ψ_j(t_k)` at sensor location `b_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorRecord {
    pub location: Point,
    pub samples: Vec<f64>,
    pub grid: TimeGrid,
}

impl SensorRecord {
    pub fn new(location: Point, samples: Vec<f64>, grid: TimeGrid) -> Result<Self> {
        grid.check()?;
        grid.check_series(&samples)?;
        Ok(Self { location, samples, grid })
    }
}

/// Coefficients matching the domain's dimension.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "kind", content = "field", rename_all = "snake_case")
)]
pub enum Coefficients {
    /// Free-space problems with constant coefficients carried by the domain.
    Homogeneous,
    #[cfg_attr(feature = "serde", serde(rename = "field_1d"))]
    Field1D(CoefficientField1D),
    Drift(DriftFieldND),
}

/// Additive measurement noise used when synthesizing data.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Complete description of a forward problem and its sensors.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Scenario {
    pub domain: SpatialDomain,
    pub coefficients: Coefficients,
    pub sources: Vec<PointSource>,
    pub sensors: Vec<Point>,
    pub grid: TimeGrid,
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise: NoiseSpec,
    /// Initial field `u₀` on the coefficient grid (interval domains only).
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub initial: Option<Vec<f64>>,
    /// Time-independent background forcing `f₀(x)` on the coefficient grid.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub forcing: Option<Vec<f64>>,
}

/// One violated scenario invariant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Lists every violated invariant of `s`; empty iff the scenario is valid.
///
/// The list is sorted, so the output does not depend on the order in which
/// checks run.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let dim = s.domain.dim();

    if !(s.grid.step > 0.0) || !s.grid.step.is_finite() {
        out.push(Violation::new("grid.step", "time step must be positive"));
    }
    if s.grid.steps < 2 {
        out.push(Violation::new("grid.steps", "need at least 2 steps"));
    }
    let samples = s.grid.steps + 1;

    let inside = |p: &Point| -> bool {
        match &s.domain {
            SpatialDomain::Interval { a, b, .. } => p.x() > *a && p.x() < *b,
            SpatialDomain::FreeSpace { .. } => p.coords().iter().all(|c| c.is_finite()),
        }
    };

    match &s.domain {
        SpatialDomain::Interval { a, b, left, right } => {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                out.push(Violation::new("domain", "interval needs finite a < b"));
            }
            for (name, bc) in [("domain.left", left), ("domain.right", right)] {
                let g = bc.data();
                if !g.is_empty() && g.len() != samples {
                    out.push(Violation::new(
                        format!("{name}.g"),
                        format!("boundary series has {} samples, grid has {samples}", g.len()),
                    ));
                }
                if let BoundaryCondition::Robin { sigma, .. } = bc {
                    if !sigma.is_finite() {
                        out.push(Violation::new(format!("{name}.sigma"), "sigma must be finite"));
                    }
                }
            }
        }
        SpatialDomain::FreeSpace { dim, reaction, diffusivity } => {
            if !(1..=3).contains(dim) {
                out.push(Violation::new("domain.dim", "dimension must be 1, 2 or 3"));
            }
            if !(*reaction >= 0.0) {
                out.push(Violation::new("domain.reaction", "reaction must be nonnegative"));
            }
            if !(*diffusivity > 0.0) {
                out.push(Violation::new("domain.diffusivity", "diffusivity must be positive"));
            }
        }
    }

    match (&s.coefficients, &s.domain) {
        (Coefficients::Field1D(c), SpatialDomain::Interval { a, b, .. }) => {
            check_field(c, &mut out);
            if (c.a - a).abs() > 1e-12 * (b - a) || (c.b - b).abs() > 1e-12 * (b - a) {
                out.push(Violation::new("coefficients", "coefficient grid must span the interval"));
            }
            for (name, f) in [("initial", &s.initial), ("forcing", &s.forcing)] {
                if let Some(v) = f {
                    if v.len() != c.points() {
                        out.push(Violation::new(name, "must be sampled on the coefficient grid"));
                    }
                }
            }
        }
        (Coefficients::Field1D(_), SpatialDomain::FreeSpace { .. }) => {
            out.push(Violation::new(
                "coefficients",
                "variable coefficients need a bounded interval; free space uses constant coefficients",
            ));
        }
        (Coefficients::Drift(d), SpatialDomain::FreeSpace { dim, .. }) => {
            if d.dim() != *dim {
                out.push(Violation::new("coefficients", "drift dimension differs from the domain"));
            }
        }
        (Coefficients::Drift(_), SpatialDomain::Interval { .. }) => {
            out.push(Violation::new("coefficients", "interval domains take a 1D coefficient field"));
        }
        (Coefficients::Homogeneous, SpatialDomain::Interval { .. }) => {
            out.push(Violation::new("coefficients", "interval domains need a 1D coefficient field"));
        }
        (Coefficients::Homogeneous, SpatialDomain::FreeSpace { .. }) => {}
    }
    if matches!(s.domain, SpatialDomain::FreeSpace { .. }) && (s.initial.is_some() || s.forcing.is_some()) {
        out.push(Violation::new("initial", "background fields are supported on intervals only"));
    }

    for (i, src) in s.sources.iter().enumerate() {
        if src.location.dim() != dim {
            out.push(Violation::new(format!("sources[{i}].location"), "dimension differs from the domain"));
        } else if !inside(&src.location) {
            out.push(Violation::new(format!("sources[{i}].location"), "must lie strictly inside the domain"));
        }
        if let Intensity::Sampled { q } = &src.intensity {
            if q.len() != samples {
                out.push(Violation::new(
                    format!("sources[{i}].intensity"),
                    format!("series has {} samples, grid has {samples}", q.len()),
                ));
            }
        }
    }
    for (j, b) in s.sensors.iter().enumerate() {
        if b.dim() != dim {
            out.push(Violation::new(format!("sensors[{j}]"), "dimension differs from the domain"));
            continue;
        }
        match &s.domain {
            SpatialDomain::Interval { a, b: bb, .. } => {
                if !(b.x() >= *a && b.x() <= *bb) {
                    out.push(Violation::new(format!("sensors[{j}]"), "must lie in the closed interval"));
                }
            }
            SpatialDomain::FreeSpace { .. } => {
                if !inside(b) {
                    out.push(Violation::new(format!("sensors[{j}]"), "coordinates must be finite"));
                }
            }
        }
        for (k, other) in s.sensors.iter().enumerate().skip(j + 1) {
            if other.dim() == b.dim() && other.distance(b) == 0.0 {
                out.push(Violation::new("sensors", format!("sensors {j} and {k} coincide")));
            }
        }
        for (i, src) in s.sources.iter().enumerate() {
            if src.location.dim() == b.dim() && src.location.distance(b) == 0.0 {
                out.push(Violation::new(format!("sensors[{j}]"), format!("coincides with source {i}")));
            }
        }
    }
    if !(s.noise.sigma >= 0.0) {
        out.push(Violation::new("noise.sigma", "must be nonnegative"));
    }

    out.sort();
    out.dedup();
    out
}

fn check_field(c: &CoefficientField1D, out: &mut Vec<Violation>) {
    if !(c.a < c.b) {
        out.push(Violation::new("coefficients.grid", "needs a < b"));
    }
    if c.a2.len() < 2 {
        out.push(Violation::new("coefficients.a2", "need at least 2 samples"));
    }
    if c.a1.len() != c.a2.len() || c.a0.len() != c.a2.len() {
        out.push(Violation::new("coefficients", "a2, a1 and a0 need equal sample counts"));
    }
    let (m1, _) = c.ellipticity_bounds();
    if !(m1 > 0.0) {
        out.push(Violation::new("coefficients.a2", "ellipticity M₁>0 violated"));
    }
    for (name, v) in [("coefficients.a2", &c.a2), ("coefficients.a1", &c.a1), ("coefficients.a0", &c.a0)] {
        if v.iter().any(|x| !x.is_finite()) {
            out.push(Violation::new(name, "samples must be finite"));
        }
    }
}

/// Sensor–source distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct Distances {
    /// `r[i][j] = |x_i - b_j|`.
    pub r: Vec<Vec<f64>>,
    /// `δ_j = min_i r_ij`.
    pub delta: Vec<f64>,
    /// For each sensor, every source attaining `δ_j` (relative tie tolerance [`TIE_TOLERANCE`]).
    pub nearest: Vec<Vec<usize>>,
}

pub fn sensor_source_distances(sources: &[Point], sensors: &[Point]) -> Result<Distances> {
    if sources.is_empty() {
        return Err(Error::Empty("sources"));
    }
    if sensors.is_empty() {
        return Err(Error::Empty("sensors"));
    }
    let dim = sources[0].dim();
    for p in sources.iter().chain(sensors) {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
    }
    let r: Vec<Vec<f64>> = sources.iter().map(|x| sensors.iter().map(|b| x.distance(b)).collect()).collect();
    let mut delta = Vec::with_capacity(sensors.len());
    let mut nearest = Vec::with_capacity(sensors.len());
    for j in 0..sensors.len() {
        let d = r.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min);
        let tol = TIE_TOLERANCE * d.max(f64::MIN_POSITIVE);
        nearest.push((0..sources.len()).filter(|&i| r[i][j] - d <= tol).collect());
        delta.push(d);
    }
    Ok(Distances { r, delta, nearest })
}

impl core::fmt::Display for Point {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}
