use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("eigen-solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("complex spectrum: discriminant {discriminant:e} < 0")]
    ComplexSpectrum { discriminant: f64 },
    #[error("degenerate spectral frame: {0}")]
    DegenerateFrame(&'static str),
    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),
    #[error("total probability {0} is not positive")]
    EmptyState(f64),
    #[error("tested count {tested} exceeds population {population}")]
    InvalidPopulation { population: u64, tested: u64 },
    #[error("component {index} = {value:e} is below the floor")]
    BelowFloor { index: usize, value: f64 },
    #[error("square-root flow diverged from the master equation by {0:e}")]
    Divergence(f64),
    #[error("density matrix has zero trace")]
    ZeroTrace,
    #[error("density trace is {0}, expected 1")]
    NotNormalized(f64),
    #[error("eigenvalue {0:e} is significantly negative")]
    NegativeEigenvalue(f64),
    #[error("frame is not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("hamiltonian is not hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid outcome {0}")]
    InvalidOutcome(u8),
    #[error("{0} must be time-independent")]
    NotConstant(&'static str),
    #[error("state is in the wrong basis for {0}")]
    WrongBasis(&'static str),
    #[error("generator form does not support {0}")]
    UnsupportedForm(&'static str),
    #[error("invalid rate table: {0}")]
    InvalidTable(&'static str),
}
