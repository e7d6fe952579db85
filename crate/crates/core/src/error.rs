use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsmError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("mesh size {h} does not divide extent {extent} along {axis}")]
    NonConformingMesh { axis: char, extent: f64, h: f64 },

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("net boundary flux {net:.3e} violates compatibility (scale {scale:.3e})")]
    IncompatibleFlux { net: f64, scale: f64 },

    #[error("solver stopped after {iterations} iterations with relative residual {residual:.3e}")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("point source at ({0}, {1}) lies on the Dirichlet boundary")]
    SourceOnBoundary(f64, f64),

    #[error("point ({0}, {1}) lies on or outside the unit circle")]
    PointOnBoundary(f64, f64),

    #[error("point ({0}, {1}) is within one cell of the boundary")]
    PointTooCloseToBoundary(f64, f64),

    #[error("point ({0}, {1}) is outside the domain")]
    PointOutsideDomain(f64, f64),

    #[error("series truncated with tail {tail:.3e} above tolerance")]
    TruncationNotConverged { tail: f64 },

    #[error("boundary segment {segment} has {nodes} nodes, at least 3 are needed")]
    SegmentTooShort { segment: usize, nodes: usize },

    #[error("boundary data live on different meshes")]
    MeshMismatch,

    #[error("operation requires a rectangle measured on a pair of opposite sides")]
    WrongDomain,

    #[error("unknown example {0}, expected 1..=5")]
    UnknownExample(u32),

    #[error("probing provider not applicable: {0}")]
    UnsupportedProvider(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, DsmError>;
