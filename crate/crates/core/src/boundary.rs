//! Resampled panel-boundary points.

use serde::{Deserialize, Serialize};

/// One resampled boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Global id, sequential across panels in panel order.
    pub id: usize,
    /// Panel the point belongs to (garmage panel index).
    pub panel_id: u32,
    /// Cyclic index along the panel's boundary loop, `0..panel_count`.
    pub loop_arc_index: u32,
    /// 3D position, meters (sampled from the geometry image).
    pub pos3: [f64; 3],
    /// Panel-local UV, meters.
    pub uv: [f64; 2],
    /// Continuous pixel coordinates in the panel's image.
    pub px: [f64; 2],
    /// Unit 3D tangent of the boundary loop (central difference).
    pub tangent3: [f64; 3],
    /// Unit 2D tangent of the boundary loop in UV.
    pub tangent_uv: [f64; 2],
    /// Normalized arc-length position along the loop, in `[0, 1)`.
    pub arc_param: f64,
}

/// All boundary points of a garment, grouped implicitly by panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPointSet {
    /// Points sorted by (panel_id, loop_arc_index); ids equal positions.
    pub points: Vec<BoundaryPoint>,
    /// Number of points per panel, indexed by panel id.
    pub panel_counts: Vec<usize>,
}

impl BoundaryPointSet {
    /// Points of one panel in loop order.
    pub fn panel_points(&self, panel_id: u32) -> &[BoundaryPoint] {
        let mut start = 0usize;
        for (pid, &cnt) in self.panel_counts.iter().enumerate() {
            if pid as u32 == panel_id {
                return &self.points[start..start + cnt];
            }
            start += cnt;
        }
        &[]
    }

    /// Cyclic arc-index separation between two points on the same panel.
    pub fn cyclic_separation(&self, a: &BoundaryPoint, b: &BoundaryPoint) -> u32 {
        debug_assert_eq!(a.panel_id, b.panel_id);
        let n = self.panel_counts[a.panel_id as usize] as i64;
        let d = (a.loop_arc_index as i64 - b.loop_arc_index as i64).rem_euclid(n);
        d.min(n - d) as u32
    }

    /// Median consecutive 3D spacing along the loops (robust nearest-neighbor
    /// spacing estimate used for the default classifier bandwidth).
    pub fn median_consecutive_spacing(&self) -> f64 {
        let mut gaps: Vec<f64> = Vec::with_capacity(self.points.len());
        let mut start = 0usize;
        for &cnt in &self.panel_counts {
            for k in 0..cnt {
                let a = &self.points[start + k];
                let b = &self.points[start + (k + 1) % cnt];
                gaps.push(crate::geom::dist3(a.pos3, b.pos3));
            }
            start += cnt;
        }
        if gaps.is_empty() {
            return 0.0;
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        gaps[gaps.len() / 2]
    }
}
