use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("divergent value: {0}")]
    Divergence(String),
    #[error("nonzero x-mean in row {row} (y index): mean {mean:e}, max |field| {max:e}")]
    NonZeroMean { row: usize, mean: f64, max: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("bathymetry discontinuous at x = {x}: jump {jump:e}")]
    Discontinuity { x: f64, jump: f64 },
    #[error("bathymetry segment {0} is not linear in x")]
    NonLinearSegment(usize),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solution blew up at t = {time}")]
    Blowup { time: f64 },
    #[error("i/o: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// True for failures caused by invalid input rather than numerics or i/o.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Contract(_)
                | Error::Discontinuity { .. }
                | Error::NonLinearSegment(_)
                | Error::Grid(_)
                | Error::Config(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
