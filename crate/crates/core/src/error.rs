use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("states live on different grids or dimensions")]
    SpecMismatch,
    #[error("bin index {index} out of range for {len} bins")]
    BinOutOfRange { index: usize, len: usize },
    #[error("post-selection probability {0:e} is below 1e-30; weak value undefined")]
    NullPostSelection(f64),
    #[error("all weak values vanish; cannot reconstruct")]
    DegenerateProfile,
    #[error("grid of {n} points exceeds the oracle cap of {cap}")]
    GridTooLarge { n: usize, cap: usize },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("need at least {need} usable bins, found {found}")]
    TooFewBins { need: usize, found: usize },
    #[error("bin {0} recorded no detections")]
    EmptyBin(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
