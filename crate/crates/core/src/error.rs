use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wraps `self` with a description of the job that produced it.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Job {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite amplitude after real-time step at t = {time}")]
    NumericOverflow { time: f64 },

    #[error("norm collapsed to {norm:e} during imaginary-time step (time step too large?)")]
    NormUnderflow { norm: f64 },

    #[error("ground state did not converge after {iterations} steps (last energy change {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("no sign change of Ip(a) - target found for a in [{lo:e}, {hi:e}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("ionization potential is not monotone decreasing in the softening parameter near a = {a}")]
    NonMonotone { a: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no exponential-decay plateau found: {0}")]
    NoPlateau(String),

    #[error("fitted decay rate {gamma:e} is below the rate floor (no measurable decay)")]
    BelowRateFloor { gamma: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("adaptive quadrature stalled with estimated error {error:e}")]
    QuadratureStalled { error: f64 },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("output files come from different configurations ({0} vs {1})")]
    ConfigMismatch(String, String),

    #[error("{context}: {source}")]
    Job {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
