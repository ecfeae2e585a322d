use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A cache mutation violated its precondition (node kind, node, task).
    CacheConstraint { node: String, task: usize },
    /// Lookup with an id outside the scenario dimensions.
    UnknownId { what: &'static str, id: usize },
    /// Geometry query outside its domain (e.g. slant distance below altitude).
    Domain(&'static str),
    /// A link with zero rate was asked to carry data.
    InfeasibleLink,
    /// Vector length does not match the expected dimension.
    Shape { expected: usize, got: usize },
    /// Configuration failed validation.
    Config(String),
    /// Training produced a non-finite loss or parameter.
    TrainingDiverged(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::CacheConstraint { node, task } => {
                write!(f, "cache constraint violated at node {node}, task {task}")
            }
            SimError::UnknownId { what, id } => write!(f, "unknown {what} id {id}"),
            SimError::Domain(msg) => write!(f, "domain error: {msg}"),
            SimError::InfeasibleLink => write!(f, "zero-rate link cannot carry data"),
            SimError::Shape { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            SimError::Config(msg) => write!(f, "invalid config: {msg}"),
            SimError::TrainingDiverged(msg) => write!(f, "training diverged: {msg}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for SimError {}
