use thiserror::Error;

/// Errors shared by every module of the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("field contains a non-finite sample")]
    NonFiniteField,

    #[error("invalid symbol: {0}")]
    Symbol(String),

    #[error("multiplier is non-finite at xi = {xi}")]
    NonFiniteMultiplier { xi: f64 },

    #[error("negative step tau = {tau} rejected for dissipative symbol `{symbol}`")]
    NegativeTau { tau: f64, symbol: String },

    #[error("negative step dt = {dt} rejected for the nonlinear substep")]
    NegativeDt { dt: f64 },

    #[error(
        "blow-up guard tripped at step {step}: H^{sigma} norm {norm:.6e} exceeds limit {limit:.6e}"
    )]
    BlowupDetected {
        step: usize,
        sigma: f64,
        norm: f64,
        limit: f64,
    },

    #[error("unreliable fit: only {admitted} admitted points (need at least 3)")]
    FitUnreliable { admitted: usize },

    #[error("inequality check hit LHS > 0 with RHS = 0; numerical setup is broken")]
    ImpossibleRatio,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
