use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid dimensions, parameters, grids or topology/lattice mismatches.
    #[error("configuration error: {0}")]
    Config(String),

    /// A statistic is undefined for the given sample (empty, all-zero, negative).
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few usable points for a regression.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// All samples share one value so no histogram range exists.
    #[error("degenerate distribution: all {count} samples equal {value}")]
    DegenerateDistribution { count: usize, value: f64 },

    /// A site left the representable range during evolution.
    #[error("numeric overflow at t={time}, site {site}: value {value}")]
    Overflow { time: u64, site: usize, value: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

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
