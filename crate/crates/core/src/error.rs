use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("{what} did not converge ({rows}x{cols})")]
    KernelFailure {
        what: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("singular or degenerate pencil: {0}")]
    DegeneratePencil(String),
    #[error("singular matrix equation: {0}")]
    SingularEquation(String),
    #[error("matrix is not stable: {0}")]
    NotStable(String),
    #[error("evaluation at or near a pole: s = {0}")]
    Pole(String),
    #[error("zero function")]
    ZeroFunction,
    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),
    #[error("improper composition: feedthrough {0} is an eigenvalue of the outer realization")]
    ImproperComposition(String),
    #[error("pole on the imaginary axis")]
    AxisPole,
    #[error("ill-conditioned factorization: zero at distance {0:e} from the imaginary axis")]
    IllConditionedFactorization(f64),
    #[error("factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("invalid summand: {0}")]
    InvalidSummand(String),
    #[error("moment of order {order} does not exist (co-degree {codegree})")]
    MomentExistence { order: usize, codegree: usize },
    #[error("infinite error bound: truncation order {m} below c = {c}")]
    InfiniteBound { m: usize, c: usize },
    #[error("unsupported density: {0}")]
    UnsupportedDensity(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("filter step {t} failed: {source}")]
    Step { t: usize, source: Box<Error> },
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Dimension(_)
                | Error::UnsupportedDensity(_)
                | Error::MomentExistence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
