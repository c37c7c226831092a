use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported root system: series {series} with rank {rank}")]
    UnsupportedSeries { series: String, rank: usize },
    #[error("invalid Cartan matrix: {0}")]
    InvalidCartan(String),
    #[error("Cartan matrix is not of finite type: {0}")]
    NotFiniteType(String),
    #[error("weight {0} is not dominant: entries must be nonnegative")]
    NotDominant(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("polytope is not full-dimensional: {0}")]
    Degenerate(String),
    #[error("halfspace system is unbounded")]
    Unbounded,
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(String),
    #[error("polytope vertex {vertex} is not in the open positive chamber (factor {factor} evaluates to {value})")]
    NotPositive {
        vertex: String,
        factor: usize,
        value: String,
    },
    #[error("lift height R = {r} too small: f({vertex}) = {value} exceeds R - 1")]
    LiftTooLow {
        vertex: String,
        value: String,
        r: String,
    },
    #[error("dilation k = {k} is not a multiple of the sampling period {period}")]
    BadDilation { k: u64, period: u64 },
    #[error("lattice lift needs integral gradients; piece {0} has a fractional gradient")]
    FractionalGradient(usize),
    #[error("interpolated {series} disagrees with the enumerated value at k = {k}")]
    InterpolationMismatch { series: &'static str, k: u64 },
    #[error("not enough samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("point {0} is not in the interior of the polytope")]
    NotInterior(String),
    #[error("invalid symplectic potential: {0}")]
    InvalidPotential(String),
    #[error("non-finite integrand value at {0}")]
    NonFinite(String),
    #[error("invalid quadrature parameters: {0}")]
    InvalidQuadrature(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
