pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Construction-time rejection of bad parameters or malformed inputs.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A pairwise distance is zero (or below the evaluation floor) on an
    /// unregularized code path.
    #[error("coincident particles {i} and {j}: pair distance {dist:e} below floor {floor:e}")]
    Coincident {
        i: usize,
        j: usize,
        dist: f64,
        floor: f64,
    },

    /// Evaluation outside an operation's domain (non-positive radius, wrong
    /// dimension, and similar).
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition stated by the operation's contract does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Non-finite state produced while integrating; carries the offending step.
    #[error("numeric failure at step {step} (t = {time}): {what}")]
    Numeric { step: usize, time: f64, what: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
