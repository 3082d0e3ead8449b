use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("spin index {0} out of range (expected 1..=3)")]
    SpinIndex(usize),
    #[error("empty target set")]
    EmptyTargets,
    #[error("negative duration {0} s")]
    NegativeDuration(f64),
    #[error("negative amplitude {0} Hz")]
    NegativeAmplitude(f64),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("kappa = {0} outside [0, 2]")]
    KappaOutOfRange(f64),
    #[error("coupling J = {0} Hz must be positive")]
    NonPositiveCoupling(f64),
    #[error("no rf amplitude configured for the {0} channel")]
    MissingAmplitude(&'static str),
    #[error("weak pulses must be DANTE-discretized before offset refocusing")]
    WeakPulsePresent,
    #[error("DANTE segment count {0} is not a positive multiple of 4")]
    DanteSegments(usize),
    #[error("program does not contain exactly one weak pulse (found {0})")]
    WeakPulseCount(usize),
    #[error("offset difference must be nonzero")]
    ZeroOffsetDifference,
    #[error("selective pulse emulation supports spins 1 and 3 with 90 or 180 degree flips")]
    UnsupportedSelective,
    #[error("invalid scan range: {0}")]
    ScanRange(String),
    #[error("invalid settings: {0}")]
    Settings(String),
}
