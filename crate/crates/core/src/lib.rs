//! Mixed and weak Galerkin solvers for `eps^2 Δ²u − Δu = f` with clamped
//! boundary conditions on triangulations of the plane.

pub mod error;
pub mod fespace;
pub mod mesh;
pub mod poly;
pub mod schemes;
pub mod verify;
pub mod weakops;

pub use error::{Error, Result};
pub use mesh::SimplicialMesh;
