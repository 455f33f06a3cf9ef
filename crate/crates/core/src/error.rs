use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("load vector is empty")]
    EmptyLoads,

    #[error("policy `{policy}` placed ball {step} into bin {chosen}, outside the offered pair ({bin_a}, {bin_b})")]
    IllegalChoice {
        policy: String,
        step: u64,
        bin_a: usize,
        bin_b: usize,
        chosen: usize,
    },

    #[error("n = {n} exceeds the enumeration guard of {limit} bins")]
    EnumerationGuard { n: usize, limit: usize },

    #[error("reachable state enumeration exceeded {limit} states")]
    StateLimit { limit: usize },

    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),

    #[error("trace holds {have} balls but the phase layout needs {need}")]
    TraceTooShort { have: u64, need: u64 },

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("no rows to emit")]
    NoRows,

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
