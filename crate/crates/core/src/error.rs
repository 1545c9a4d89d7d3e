use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("series failed to converge after {terms} terms (last term {last_term:e})")]
    Nonconvergence { terms: usize, last_term: f64 },
    #[error("singular time t = {t}: |sin(t B0)| = {sin_abs:e} is below the guard")]
    SingularTime { t: f64, sin_abs: f64 },
    #[error("quadrature resolution too low: {0}")]
    Quadrature(String),
    #[error("mode window too small: {0}")]
    WindowTooSmall(String),
    #[error("weight exponent gamma = {gamma} exceeds kappa = {kappa}")]
    GammaOutOfRange { gamma: f64, kappa: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
