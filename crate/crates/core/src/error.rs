use thiserror::Error;

use crate::trainer::TrainTrace;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed files, inconsistent shapes, invalid parameters.
    User,
    /// The requested workload does not fit the architecture or search space.
    Infeasible,
    /// A library invariant did not hold.
    Internal,
}

#[derive(Debug, Error)]
pub enum GoaError {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not unitary: ||U^H U - I||_F = {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "routing violation in column {column}: rows {upper_row} and {lower_row} both use wavelength {wavelength}"
    )]
    RoutingViolation {
        column: usize,
        upper_row: usize,
        lower_row: usize,
        wavelength: usize,
    },

    #[error("row {row} uses wavelength {wavelength} but only {available} channels exist")]
    WavelengthOutOfRange {
        row: usize,
        wavelength: usize,
        available: usize,
    },

    #[error("placement inconsistency: {0}")]
    Placement(String),

    #[error("invalid architecture: {0}")]
    InvalidArch(String),

    #[error("invalid layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },

    #[error("cluster of layer {layer} needs {width} module columns but the grid has {columns}")]
    InfeasibleCluster {
        layer: usize,
        width: usize,
        columns: usize,
    },

    #[error("{rows}x{cols} matrix does not fit a {size}-port interleaved array")]
    ExceedsArray { rows: usize, cols: usize, size: usize },

    #[error("search space contains no feasible architecture")]
    EmptyFeasibleRegion,

    #[error("device parameter table has no entry for {0}")]
    MissingDevice(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize, trace: Box<TrainTrace> },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl GoaError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            GoaError::InfeasibleCluster { .. }
            | GoaError::ExceedsArray { .. }
            | GoaError::EmptyFeasibleRegion => ErrorKind::Infeasible,
            GoaError::Internal(_) => ErrorKind::Internal,
            _ => ErrorKind::User,
        }
    }
}

pub type Result<T, E = GoaError> = std::result::Result<T, E>;
