use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function has a pole at non-positive integer argument {0}")]
    PoleAtNonpositiveInteger(f64),
    #[error("hypergeometric parameter c = {c} is a non-positive integer and the series does not terminate")]
    ParameterDegenerate { c: f64 },
    #[error("series failed to converge after {iterations} terms (last term {last_term:e})")]
    NoConvergence { iterations: usize, last_term: f64 },
    #[error("point lies on the diagonal r = r' = {0}, which is excluded")]
    DiagonalPoint(f64),
    #[error("base integral out of validity: l = {ell}, l' = {ellp}, n = {n}")]
    BaseOutOfValidity { ell: u32, ellp: u32, n: i32 },
    #[error("2F1({a}, {b}; {c}; 1) diverges (c - a - b = {excess})")]
    HypergeometricDivergesAtUnity { a: f64, b: f64, c: f64, excess: f64 },
    #[error("Mehrem formula requires an even order sum, got {0} + {1} + {2}")]
    OddSumUnsupported(u32, u32, u32),
    #[error("orders ({0}, {1}, {2}) violate the triangle rule")]
    NonTriangularOrders(u32, u32, u32),
    #[error("closed form exceeded {limit} terms")]
    TermLimitExceeded { limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integral diverges: {0}")]
    DivergenceDetected(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
