//! MZI elements, interleaved meshes, and the MRR-joined module grid.

pub mod decompose;
pub mod goa;
pub mod mesh;
pub mod mzi;

pub use decompose::{decompose_unitary, haar_unitary, random_orthogonal, unitarity_deviation};
pub use goa::{accumulate_column, check_placement, simulate_goa, GoaArch, ModuleGrid, ModuleSlot, Route};
pub use mesh::{mesh_forward, mesh_mzi_count, reconstruct, ComplexSignalVector, MeshProgram, MziPlacement};
pub use mzi::{mzi_transfer, MziSetting, C64};
