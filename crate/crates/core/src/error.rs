use thiserror::Error;

use crate::bellparams::ConstraintReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:.3e})"
    )]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("matrix is not an order-3 observable: cube {cube:.3e}, unitarity {unitarity:.3e}, square-vs-dagger {square:.3e}")]
    NotOrder3 {
        cube: f64,
        unitarity: f64,
        square: f64,
    },

    #[error("dimension {0} is not a positive multiple of 3")]
    NotMultipleOfThree(usize),

    #[error("kappa must have unit modulus, got |kappa| = {0}")]
    KappaNotUnit(f64),

    #[error("constraint c2 violated: {what} vanishes")]
    C2Violated { what: &'static str },

    #[error("constraint c1 violated: kappa candidates {first} and {second} disagree")]
    C1Violated {
        first: num_complex::Complex64,
        second: num_complex::Complex64,
    },

    #[error(
        "theta_beta = {0} lies outside the open interval (0, pi/6); the endpoints are excluded"
    )]
    ThetaOutOfRange(f64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sum-of-squares hypothesis alpha beta* + gamma delta* = 0 violated: |.| = {0:.3e}")]
    CrossTermsNonzero(f64),

    #[error("state has norm {0}, expected 1")]
    StateNotNormalized(f64),

    #[error("Bell value has imaginary part {0:.3e}")]
    ComplexBellValue(f64),

    #[error("degenerate kappa: (kappa^2 - 1/kappa) = {0:.3e} vanishes, observables are not incompatible")]
    DegenerateKappa(f64),

    #[error("first observable must be the clock matrix Z (deviation {0:.3e})")]
    NotClock(f64),

    #[error("self-testing constraints not satisfied: {}", .0.failures().join(", "))]
    ConstraintsViolated(Box<ConstraintReport>),

    #[error("algebra closure did not stabilise within {0} rounds")]
    ClosureNotStable(usize),

    #[error("invalid outcome label {0}, expected 0, 1 or 2")]
    BadLabel(u8),

    #[error("invalid vertex sign {0}, expected -1, 0 or 1")]
    BadSign(i8),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
