use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left:?} vs {right:?} ({context})")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
        context: &'static str,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("class index {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },

    #[error("infinite divergence: p[{index}] = {p} > 0 but q[{index}] = 0")]
    InfiniteDivergence { index: usize, p: f64 },

    #[error("backward called before forward")]
    BackwardBeforeForward,

    #[error("malformed CIFAR-100 data at byte offset {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("could not place {classes} separated centers after {attempts} attempts; try a smaller spread")]
    CenterPlacement { classes: usize, attempts: usize },

    #[error("non-finite training loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
