use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("photon number {0} is outside the supported truncation {{0, 1}}")]
    UnsupportedPhotonNumber(usize),

    #[error("atom dimension {0} is not supported (expected 2 or 3)")]
    UnsupportedAtomDim(usize),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureNonConvergence { tolerance: f64, estimate: f64 },

    #[error("closed-form correlators only apply to the ideal lossless state: {0}")]
    NotIdeal(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("S*({param}) is not monotone over the sweep interval: {detail}")]
    NotMonotone { param: &'static str, detail: String },

    #[error("optimizer failed to converge from all {starts} starts (best S = {best})")]
    OptimizerNonConvergence { starts: usize, best: f64 },
}
