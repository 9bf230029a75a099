//! Modeling toolkit for hybrid optical accelerators built from small MZI
//! meshes joined by microring resonators.

pub mod approx;
pub mod cost;
pub mod error;
pub mod exec;
pub mod mapper;
pub mod photonic;
pub mod search;
pub mod trainer;
pub mod workload;

pub use error::{ErrorKind, GoaError, Result};
