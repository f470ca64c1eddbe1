//! Local shape spaces, DoF-dual bases and global numbering.

mod config;
mod fields;
mod global;
mod local;

pub use config::{Family, SpaceConfig};
pub use fields::{FieldSet, Sampled};
pub use global::{CoefficientField, GlobalDofMap, GlobalMaps, SpaceTag};
pub use local::{
    divergence_local, CellGeometry, LocalFace, LocalTensorBasis, LocalVectorBasis, SigmaDof, VDof, MAX_CONDITION,
};
