//! Garment mesh: triangle panels with per-vertex UVs and stitched vertex pairs.

use serde::{Deserialize, Serialize};

/// One mesh vertex: 3D position in meters, 2D pattern-space UV in meters,
/// and the id of the panel the vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshVertex {
    pub position: [f64; 3],
    pub uv: [f64; 2],
    pub panel_id: u32,
}

/// A garment as a set of triangle panels plus stitched vertex pairs.
///
/// Faces never span panels and every stitch endpoint must lie on a panel
/// boundary; `validate::validate_mesh` checks those invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarmentMesh {
    pub vertices: Vec<MeshVertex>,
    /// Triangle faces as vertex indices.
    pub faces: Vec<[u32; 3]>,
    /// Unordered stitched vertex pairs, stored with the smaller index first.
    pub stitches: Vec<[u32; 2]>,
}

impl GarmentMesh {
    pub fn new(vertices: Vec<MeshVertex>, faces: Vec<[u32; 3]>, stitches: Vec<[u32; 2]>) -> Self {
        let stitches = stitches
            .into_iter()
            .map(|[a, b]| if a <= b { [a, b] } else { [b, a] })
            .collect();
        GarmentMesh {
            vertices,
            faces,
            stitches,
        }
    }

    /// Distinct panel ids in ascending order.
    pub fn panel_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.vertices.iter().map(|v| v.panel_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Faces whose first vertex belongs to `panel_id`. On a valid mesh all
    /// three vertices agree, so this is the panel's face set.
    pub fn panel_faces(&self, panel_id: u32) -> Vec<[u32; 3]> {
        self.faces
            .iter()
            .copied()
            .filter(|f| {
                self.vertices
                    .get(f[0] as usize)
                    .map(|v| v.panel_id == panel_id)
                    .unwrap_or(false)
            })
            .collect()
    }

    /// Per-vertex flag: true when the vertex lies on a panel boundary.
    ///
    /// A vertex is a boundary vertex when it touches a mesh edge used by
    /// exactly one face, or when it has no incident face at all.
    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let n = self.vertices.len();
        let mut edge_use: std::collections::BTreeMap<(u32, u32), u32> =
            std::collections::BTreeMap::new();
        let mut has_face = vec![false; n];
        for f in &self.faces {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                if (a as usize) < n {
                    has_face[a as usize] = true;
                }
                let key = if a <= b { (a, b) } else { (b, a) };
                *edge_use.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary = vec![false; n];
        for ((a, b), count) in edge_use {
            if count == 1 {
                if (a as usize) < n {
                    boundary[a as usize] = true;
                }
                if (b as usize) < n {
                    boundary[b as usize] = true;
                }
            }
        }
        for i in 0..n {
            if !has_face[i] {
                boundary[i] = true;
            }
        }
        boundary
    }

    /// True when vertices of each panel are contiguous in the vertex list
    /// (panels never interleave). The OBJ writer requires this layout.
    pub fn panels_contiguous(&self) -> bool {
        let mut seen: Vec<u32> = Vec::new();
        for v in &self.vertices {
            match seen.last() {
                Some(&last) if last == v.panel_id => {}
                _ => {
                    if seen.contains(&v.panel_id) {
                        return false;
                    }
                    seen.push(v.panel_id);
                }
            }
        }
        true
    }
}
