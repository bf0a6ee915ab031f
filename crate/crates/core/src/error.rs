use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field has zero flux; the Landau reduction is unavailable")]
    ZeroFlux,

    #[error("field has negative flux {flux}; orient the lattice so that B_c > 0")]
    NegativeFlux { flux: f64 },

    #[error("Fourier data is not Hermitian at mode {mode:?} (mismatch {mismatch:e})")]
    NonHermitianData { mode: (i32, i32), mismatch: f64 },

    #[error("coupling order violated: eps1 = {eps1} must be below eps0 = {eps0}")]
    CouplingOrder { eps0: f64, eps1: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("quadrature under-resolved: doubling nodes changed {what} by {change:e} (tol {tol:e})")]
    QuadratureUnderResolved { what: String, change: f64, tol: f64 },

    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("truncation too small: couplings out to |n-k| = {range} carry {tail:e} beyond the window 2N = {window}")]
    TruncationTooSmall { range: usize, window: usize, tail: f64 },

    #[error("small denominator {denominator:e} between levels {level_a} and {level_b} (threshold {threshold:e})")]
    SmallDenominator {
        denominator: f64,
        threshold: f64,
        level_a: usize,
        level_b: usize,
    },

    #[error("reduction did not converge after {iterations} iterations (gamma = {gamma:e}, tol {tol:e})")]
    NoConvergence {
        iterations: usize,
        gamma: f64,
        tol: f64,
    },

    #[error("p-covariance violated at p = {p}: entries differ by {deviation:e}")]
    CovarianceViolation { p: f64, deviation: f64 },

    #[error("ambiguous band matching for level {level} at xi = {xi}")]
    BandCrossing { level: usize, xi: f64 },

    #[error("lambda_m reconstruction conflict at p = {p}: spread {spread:e} exceeds {tol:e}")]
    BinConflict { p: f64, spread: f64, tol: f64 },

    #[error("level {level} lies outside the protected window 0..={window}")]
    LevelOutsideWindow { level: usize, window: usize },

    #[error("eigenfunction tail too large: {which} tail carries {fraction:e} of the norm")]
    TailTooLarge { which: &'static str, fraction: f64 },

    #[error("fiber xi = {xi}: {source}")]
    AtFiber { xi: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_fiber(self, xi: f64) -> Self {
        match self {
            e @ Error::AtFiber { .. } => e,
            e => Error::AtFiber {
                xi,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, looking through fiber context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFiber { source, .. } => source.root(),
            e => e,
        }
    }

    /// Whether the error stems from the input description rather than from
    /// a numerical step.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidArgument(_)
                | Error::ZeroFlux
                | Error::NegativeFlux { .. }
                | Error::NonHermitianData { .. }
                | Error::CouplingOrder { .. }
                | Error::Parse { .. }
                | Error::LevelOutsideWindow { .. }
                | Error::Io(_)
        )
    }
}
