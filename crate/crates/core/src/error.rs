use thiserror::Error;

/// Errors raised by geometry, domain, sampling, bound, and oracle operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not on the manifold: {0}")]
    OffManifold(String),
    #[error("tangent vector is not unit length (|v| = {0})")]
    NotUnit(f64),
    #[error("antipodal points: unique geodesic undefined")]
    AntipodalPoints,
    #[error("triangle inequality violated by sides ({0}, {1}, {2})")]
    TriangleInequality(f64, f64, f64),
    #[error("no comparison triangle: perimeter {perimeter} >= 2*D_kappa = {limit}")]
    PerimeterTooLarge { perimeter: f64, limit: f64 },
    #[error("degenerate triangle: two vertices coincide")]
    DegenerateTriangle,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("domain/space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("point lies outside the domain")]
    OutsideDomain,
    #[error("polytope is unbounded (objective {0} unbounded above)")]
    Unbounded(String),
    #[error("domain has empty interior: {0}")]
    EmptyInterior(String),
    #[error("ball radius {radius} exceeds the convexity limit {limit} for kappa = {kappa}")]
    RadiusTooLarge { radius: f64, limit: f64, kappa: f64 },
    #[error("rejection acceptance rate fell below {limit:e}; use hit-and-run or a tighter domain")]
    LowAcceptance { limit: f64 },
    #[error("invalid needle: {0}")]
    InvalidNeedle(String),
    #[error("cut family {family} is not available for this space")]
    UnsupportedFamily { family: String },
    #[error("grid too coarse: only {cells} cells inside the domain (need >= {min})")]
    GridTooCoarse { cells: usize, min: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
