use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension d = {0}")]
    InvalidDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {arg} outside the domain of {function}")]
    Domain { function: &'static str, arg: f64 },
    #[error("quadrature did not converge: value {value}, error estimate {abs_error}")]
    Quadrature { value: f64, abs_error: f64 },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator violates -Pi^- <= Q <= Pi^+ (eigenvalue {0})")]
    ConstraintViolation(f64),
    #[error("potential is not Hermitian: c(-n) != conj(c(n)) for n = {0:?}")]
    NonHermitianPotential(Vec<i64>),
    #[error("potential mode {0:?} lies outside the plane-wave basis")]
    ModeOutsideBasis(Vec<i64>),
    #[error("cutoff insufficient: {0}")]
    CutoffInsufficient(String),
    #[error("budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("degenerate denominator: {0}")]
    Degenerate(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}
