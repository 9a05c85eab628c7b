use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid of {nodes} nodes cannot resolve order {order} (need at least {})", 2 * order + 2)]
    InsufficientSamples { nodes: usize, order: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("point {z} lies outside the validity annulus ({inner}, {outer})")]
    OutOfDomain { z: Complex64, inner: f64, outer: f64 },

    #[error("annuli ({0}, {1}) and ({2}, {3}) do not overlap")]
    DisjointAnnuli(f64, f64, f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("positivity lost at degree {degree}: |alpha| = {modulus}")]
    PositivityLoss { degree: usize, modulus: f64 },

    #[error("truncation order {order} too small for degree {degree}")]
    Truncation { order: usize, degree: usize },

    #[error("exponent overflow while building the scattering function")]
    Overflow,

    #[error("point {0} is within tolerance of a region boundary")]
    AmbiguousRegion(Complex64),

    #[error("point {0} lies on a branch cut")]
    CutAmbiguity(Complex64),

    #[error("one-sided limits for theta_{index} disagree by {discrepancy:e}")]
    BranchConfiguration { index: usize, discrepancy: f64 },

    #[error("missing weight metadata: {0}")]
    MissingMetadata(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("point {0} lies inside an excluded disk around a singularity")]
    NearSingularity(Complex64),

    #[error("not enough data points: {0}")]
    TooFewPoints(String),
}

pub type Result<T> = std::result::Result<T, Error>;
