use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient {name} = {value} outside [-1, 1]")]
    CoefficientOutOfRange { name: &'static str, value: f64 },

    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("unphysical state: outcome probability {probability} at angles ({alpha}, {beta}) rad")]
    UnphysicalState {
        probability: f64,
        alpha: f64,
        beta: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("brute-force local bound limited to {max} settings per side, got {got}")]
    BruteForceTooLarge { got: usize, max: usize },

    #[error("observed Bell value {observed} exceeds the no-signaling maximum {ns_max}")]
    AboveNoSignalingMax { observed: f64, ns_max: f64 },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("linear program solver failed: {0}")]
    LpNumerical(String),

    #[error("incomplete count data, missing terms: {}", missing.join(", "))]
    IncompleteCounts { missing: Vec<String> },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
