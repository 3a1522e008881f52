//! Shared error type for cone, lattice, and scenario operations.

use crate::linalg::Vector;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cone has neither rays nor facets")]
    EmptyRepresentation,

    #[error("ray and facet representations describe different cones; witness {witness}")]
    InconsistentDualPair { witness: Vector },

    #[error("cone contains the line through {direction}")]
    ConeContainsLine { direction: Vector },

    #[error("linear map is not injective")]
    RankDeficientMap,

    #[error("a curve with fiber degree zero pairs negatively with the class: {curve} gives {value}")]
    VerticalObstruction { curve: Vector, value: crate::linalg::Rational },

    #[error("no fiber shift makes the class nef on factor {factor}: section values are unbounded below")]
    NoFiniteShift { factor: String },

    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid lattice data: {0}")]
    InvalidLattice(String),

    #[error("{what} exceeded cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("interior functional is stabilized by the nontrivial group element {element}; perturb the functional")]
    XiStabilized { element: String },

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
