use thiserror::Error;

use crate::model::Block;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The information matrix is singular; `block` names the vanishing block
    /// when the singularity comes from a zero diagonal value.
    #[error("singular information matrix{}", block.map(|b| format!(" ({b} block vanishes)")).unwrap_or_default())]
    Singular { block: Option<Block> },

    /// The request would enumerate more pairs than the configured cap allows.
    #[error("capacity exceeded: K = {k} is above the enumeration cap {cap}")]
    Capacity { k: usize, cap: usize },

    /// The optimizer produced a design that fails the equivalence-theorem
    /// bound. This indicates a bug, not bad input.
    #[error("certification failed for K = {k}: max v(d)/p = {kw_max} (normalized profile {profile:?})")]
    Certification { k: usize, kw_max: f64, profile: Vec<f64> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
