use crate::geometry::Functional;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input: empty cloud, nonpositive depth, mismatched dimensions...
    #[error("domain error: {0}")]
    Domain(String),

    /// An exact routine was asked to run above its size limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A budgeted search ran out of candidates without a certificate.
    #[error("search inconclusive after {evaluated} candidates")]
    Inconclusive {
        evaluated: usize,
        best: Option<(Functional, f64)>,
    },

    #[error("not finitely dentable: derivation at scale 2^-{k} stalled at stage {stage}")]
    NotFinitelyDentable { k: u32, stage: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
