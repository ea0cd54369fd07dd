use thiserror::Error;

/// Errors raised by the solvers and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("expression is not finite at x = {x}")]
    Domain { x: f64 },

    #[error("period mismatch: {left} vs {right}")]
    PeriodMismatch { left: f64, right: f64 },

    #[error("function lies inside the neutral band everywhere; sign pattern undefined")]
    AllNeutral,

    #[error("needs at least {needed} sign changes, found {found}")]
    InsufficientSignChanges { found: usize, needed: usize },

    #[error("no neighborhood of {point} keeps the function within {level} of {target}")]
    NoStableNeighborhood { point: f64, target: f64, level: f64 },

    #[error("shift {value} exceeds trust radius {radius}")]
    TrustRegionExceeded { value: f64, radius: f64 },

    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("function is not orthogonal to the system (max residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("system fails the Chebyshev test: a combination has {sign_changes} sign changes, allowed at most {allowed}")]
    NotChebyshev { sign_changes: usize, allowed: usize },

    #[error("basis functions are linearly dependent (min Gram eigenvalue {min_eigenvalue:e})")]
    DependentBasis { min_eigenvalue: f64 },

    #[error("no convergence: best residual {best_residual:e} ({detail})")]
    ConvergenceFailure { best_residual: f64, detail: String },

    #[error("potential values must be positive, got k1 = {k1}, k2 = {k2}")]
    NonPositiveK { k1: f64, k2: f64 },

    #[error("tangent equation has no sign bracket for k1 = {k1}, k2 = {k2}")]
    BracketFailure { k1: f64, k2: f64 },

    #[error("monodromy differential is degenerate (smallest singular value {sigma:e})")]
    DegenerateJacobian { sigma: f64 },

    #[error("curve does not close up (gap {gap:e})")]
    CurveNotClosed { gap: f64 },

    #[error("curve passes through the origin near x = {x}")]
    OriginHit { x: f64 },

    #[error("derivative {value:e} below 1e-8 near x = {x}")]
    DerivativeUnderflow { x: f64, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by inputs that violate a solver precondition.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::ConvergenceFailure { .. } | Error::Io(_) | Error::DegenerateJacobian { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
