use std::path::PathBuf;

/// Errors produced by the series, digit and verification routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid base {0}: base must be at least 2")]
    InvalidBase(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("precision exponent {exponent} outside 1..={cap}")]
    ExponentOutOfRange { exponent: u32, cap: u32 },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u64, base: u64 },
    #[error("residue {residue} not in [0, {p}^{exponent})")]
    ResidueOutOfRange { residue: String, p: u64, exponent: u32 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no (j, k) pair with valuation at least 2 found for p = {p}, u = {u}")]
    WitnessSearchFailed { p: u64, u: u64 },
    #[error("malformed series: {0}")]
    MalformedSeries(String),
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
