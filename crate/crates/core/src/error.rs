use thiserror::Error;

/// Errors raised while configuring or running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("inertia matrix is degenerate (|det M| = {det:e})")]
    DegenerateInertia { det: f64 },

    #[error("simulation diverged at t = {t} s (|state| exceeded {limit:e})")]
    Diverged { t: f64, limit: f64 },
}

impl SimError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Errors raised by the trace statistics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("series is empty")]
    EmptySeries,
}

/// Errors raised while reading or writing trace files.
#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("malformed trace: {0}")]
    Malformed(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
