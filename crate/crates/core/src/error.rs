use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature error: {0}")]
    Quadrature(String),
    #[error("tolerance error: {0}")]
    Tolerance(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("outside analyticity strip: {0}")]
    Strip(String),
    #[error("boundary error: {0}")]
    Boundary(String),
    #[error("moment is infinite: {0}")]
    MomentInfinite(String),
    #[error("smoothness error: {0}")]
    Smoothness(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("outside radius of convergence: {0}")]
    Radius(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("gate error: {0}")]
    Gate(String),
    #[error("root bracket error: {0}")]
    RootBracket(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("existence error: {0}")]
    Existence(String),
    #[error("horizon error: {0}")]
    Horizon(String),
    #[error("Cramer precondition failed: {0}")]
    CramerPrecondition(String),
    #[error("saddle condition violated: {0}")]
    ConditionH(String),
    #[error("case error: {0}")]
    Case(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    Param(String),
}

impl Error {
    /// Numerical failures (as opposed to domain or gate rejections).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::Tolerance(_)
                | Error::Convergence(_)
                | Error::Truncation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
