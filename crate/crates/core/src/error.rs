use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A scalar argument that must be strictly positive was not.
    NonPositive { name: &'static str, value: f64 },
    /// Spatial dimension outside the supported set.
    InvalidDimension(usize),
    /// Two inputs disagree in dimension or length.
    DimensionMismatch { expected: usize, found: usize },
    /// The kernel is singular at zero distance.
    SingularKernel,
    /// An input collection was empty.
    Empty(&'static str),
    /// A point or value lies outside the admissible range.
    OutOfRange { what: &'static str, value: f64, min: f64, max: f64 },
    /// The diffusion coefficient is not bounded away from zero.
    NotElliptic { min: f64 },
    /// The time grid cannot support the asymptotic regime.
    LambdaWindowEmpty { lambda_min: f64, lambda_max: f64 },
    /// Too few usable points for a fit or a solve.
    InsufficientData { what: &'static str, needed: usize, found: usize },
    /// The ratio of two transforms changes sign across the window.
    InconsistentRatio,
    /// No transform parameter produced a travel distance inside the sensor pair.
    NotBracketed,
    /// Integrated kernel mass vanishes on the horizon; deconvolution is singular.
    VanishingKernelMass,
    /// Sensors violate condition (D); the offending subset is attached.
    DegenerateGeometry { witness: Vec<usize> },
    /// A linear system is numerically rank deficient.
    RankDeficient { condition: f64 },
    /// Distances are inconsistent with a single source point.
    InconsistentDistances { residual: f64 },
    /// The prefactor ratio is too close to one to separate two distances.
    IndistinguishablePair { rho: f64 },
    /// A ratio denominator is below its own error bound.
    BelowErrorBound { value: f64, bound: f64 },
    /// A sensor sits on a source, where the kernel is singular.
    SensorAtSource,
    /// A sampled series does not match the time grid.
    SeriesLength { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositive { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            Error::InvalidDimension(n) => write!(f, "unsupported spatial dimension {n}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::SingularKernel => f.write_str("kernel is singular at zero distance"),
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::OutOfRange { what, value, min, max } => {
                write!(f, "{what} = {value} outside [{min}, {max}]")
            }
            Error::NotElliptic { min } => {
                write!(f, "diffusion coefficient not elliptic (minimum {min})")
            }
            Error::LambdaWindowEmpty { lambda_min, lambda_max } => write!(
                f,
                "lambda window empty: lambda_min = {lambda_min} >= lambda_max = {lambda_max}; \
                 refine the time step or lengthen the horizon"
            ),
            Error::InsufficientData { what, needed, found } => {
                write!(f, "{what}: need at least {needed}, found {found}")
            }
            Error::InconsistentRatio => f.write_str("transform ratio changes sign across the lambda window"),
            Error::NotBracketed => f.write_str("source is not bracketed by the sensor pair"),
            Error::VanishingKernelMass => f.write_str("kernel mass vanishes on the horizon; system is singular"),
            Error::DegenerateGeometry { witness } => {
                write!(f, "condition (D) violated by sensors {witness:?}")
            }
            Error::RankDeficient { condition } => {
                write!(f, "rank-deficient system (condition number {condition:e})")
            }
            Error::InconsistentDistances { residual } => {
                write!(f, "distance estimates inconsistent (residual {residual:e})")
            }
            Error::IndistinguishablePair { rho } => {
                write!(f, "prefactor ratio {rho} too close to 1")
            }
            Error::BelowErrorBound { value, bound } => {
                write!(f, "denominator {value:e} below its error bound {bound:e}")
            }
            Error::SensorAtSource => f.write_str("sensor coincides with a source"),
            Error::SeriesLength { expected, found } => {
                write!(f, "series has {found} samples, time grid has {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
