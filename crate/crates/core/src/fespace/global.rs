//! Global numbering of the discrete spaces.
//!
//! Face-based spaces (`Σ^div`, `V^div`) number all face DoFs first, face by
//! face, followed by cell interiors. The weak Galerkin space numbers the cell
//! unknowns `u_0` first and then `(u_b, u_g)` on interior faces; boundary
//! faces carry the homogeneous boundary data and have no unknowns.

use super::config::SpaceConfig;
use crate::mesh::SimplicialMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceTag {
    /// `H(div)`-conforming tensors.
    SigmaDiv,
    /// `(u_0, u_b, u_g)`.
    WeakGalerkin,
    /// Discontinuous `V_{k-1,m-1}`.
    VBroken,
    /// Discontinuous `P_{m-2}`.
    PolyBroken,
    /// `H(div)`-conforming vectors.
    VDiv,
}

/// Cell-local to global DoF map. `None` marks a constrained (zero) DoF.
#[derive(Clone, Debug)]
pub struct GlobalDofMap {
    pub tag: SpaceTag,
    pub ndofs: usize,
    pub cell_dofs: Vec<Vec<Option<usize>>>,
}

impl GlobalDofMap {
    fn face_based(mesh: &SimplicialMesh, tag: SpaceTag, per_face: usize, per_cell: usize) -> Self {
        let nf = mesh.num_faces();
        let cell_dofs = (0..mesh.num_cells())
            .map(|c| {
                let mut d = Vec::with_capacity(3 * per_face + per_cell);
                for &(f, _) in &mesh.cell_faces[c] {
                    d.extend((0..per_face).map(|i| Some(f * per_face + i)));
                }
                d.extend((0..per_cell).map(|i| Some(nf * per_face + c * per_cell + i)));
                d
            })
            .collect();
        Self {
            tag,
            ndofs: nf * per_face + mesh.num_cells() * per_cell,
            cell_dofs,
        }
    }

    fn broken(mesh: &SimplicialMesh, tag: SpaceTag, per_cell: usize) -> Self {
        let cell_dofs = (0..mesh.num_cells())
            .map(|c| (0..per_cell).map(|i| Some(c * per_cell + i)).collect())
            .collect();
        Self {
            tag,
            ndofs: mesh.num_cells() * per_cell,
            cell_dofs,
        }
    }

    /// Local order: `u_0`, then for each local face `u_b` followed by `u_g`.
    fn weak_galerkin(mesh: &SimplicialMesh, cfg: SpaceConfig) -> Self {
        let n0 = cfg.u0_dim();
        let per_face = cfg.ub_dim() + cfg.ug_dim();
        let nc = mesh.num_cells();
        let mut face_slot = vec![None; mesh.num_faces()];
        let mut next = 0;
        for (f, face) in mesh.faces.iter().enumerate() {
            if !face.boundary {
                face_slot[f] = Some(next);
                next += 1;
            }
        }
        let cell_dofs = (0..nc)
            .map(|c| {
                let mut d: Vec<Option<usize>> = (0..n0).map(|i| Some(c * n0 + i)).collect();
                for &(f, _) in &mesh.cell_faces[c] {
                    match face_slot[f] {
                        Some(s) => d.extend((0..per_face).map(|i| Some(nc * n0 + s * per_face + i))),
                        None => d.extend(std::iter::repeat_n(None, per_face)),
                    }
                }
                d
            })
            .collect();
        Self {
            tag: SpaceTag::WeakGalerkin,
            ndofs: nc * n0 + next * per_face,
            cell_dofs,
        }
    }

    pub fn local_len(&self, cell: usize) -> usize {
        self.cell_dofs[cell].len()
    }
}

/// All maps used by the schemes for one mesh and configuration.
#[derive(Clone, Debug)]
pub struct GlobalMaps {
    pub cfg: SpaceConfig,
    pub sigma_div: GlobalDofMap,
    pub wg: GlobalDofMap,
    pub v_broken: GlobalDofMap,
    pub poly: GlobalDofMap,
    pub v_div: GlobalDofMap,
}

impl GlobalMaps {
    pub fn new(mesh: &SimplicialMesh, cfg: SpaceConfig) -> Self {
        Self {
            cfg,
            sigma_div: GlobalDofMap::face_based(
                mesh,
                SpaceTag::SigmaDiv,
                cfg.sigma_face_dofs(),
                cfg.sigma_interior_dofs(),
            ),
            wg: GlobalDofMap::weak_galerkin(mesh, cfg),
            v_broken: GlobalDofMap::broken(mesh, SpaceTag::VBroken, cfg.v_dim()),
            poly: GlobalDofMap::broken(mesh, SpaceTag::PolyBroken, cfg.u0_dim()),
            v_div: GlobalDofMap::face_based(mesh, SpaceTag::VDiv, cfg.v_face_dofs(), cfg.v_interior_dofs()),
        }
    }

    pub fn get(&self, tag: SpaceTag) -> &GlobalDofMap {
        match tag {
            SpaceTag::SigmaDiv => &self.sigma_div,
            SpaceTag::WeakGalerkin => &self.wg,
            SpaceTag::VBroken => &self.v_broken,
            SpaceTag::PolyBroken => &self.poly,
            SpaceTag::VDiv => &self.v_div,
        }
    }
}

/// Global coefficient vector of one space.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub tag: SpaceTag,
    pub values: Vec<f64>,
}

impl CoefficientField {
    pub fn zeros(map: &GlobalDofMap) -> Self {
        Self {
            tag: map.tag,
            values: vec![0.0; map.ndofs],
        }
    }

    /// Local coefficients on `cell`; constrained DoFs read as zero.
    pub fn local(&self, map: &GlobalDofMap, cell: usize) -> Vec<f64> {
        debug_assert_eq!(self.tag, map.tag);
        map.cell_dofs[cell]
            .iter()
            .map(|d| d.map_or(0.0, |i| self.values[i]))
            .collect()
    }
}
