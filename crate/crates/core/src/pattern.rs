//! Vectorized sewing pattern: per-panel segment loops plus segment-level
//! stitches with fractional parameter ranges.

use serde::{Deserialize, Serialize};

/// One straight segment of a panel's boundary loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSegment {
    /// Start point, panel-local UV meters.
    pub from: [f64; 2],
    /// End point, panel-local UV meters.
    pub to: [f64; 2],
    /// Cyclic span of boundary-point indices the segment was fitted from
    /// (inclusive start, inclusive end). Absent on loaded patterns.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source_span: Option<[u32; 2]>,
}

/// A panel as a closed counter-clockwise loop of segments. Segment `i` ends
/// where segment `i + 1` (cyclically) begins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorPanel {
    pub panel_id: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub segments: Vec<PatternSegment>,
}

/// One side of a segment stitch: a parameter range on one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StitchSideRef {
    pub panel: u32,
    /// Segment index within the panel's loop.
    pub segment: usize,
    /// Parameter range along the segment, `0 <= t0 <= t1 <= 1`.
    pub t0: f64,
    pub t1: f64,
}

/// A stitch joining parameter ranges on two segments.
///
/// With `reversed == false`, `a.t0` is sewn to `b.t0` and `a.t1` to `b.t1`;
/// with `reversed == true`, `a.t0` is sewn to `b.t1` and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentStitch {
    pub a: StitchSideRef,
    pub b: StitchSideRef,
    pub reversed: bool,
}

/// A complete vectorized pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SewingPatternDoc {
    pub panels: Vec<VectorPanel>,
    pub stitches: Vec<SegmentStitch>,
}

impl VectorPanel {
    /// UV position at parameter `t` along segment `seg`.
    pub fn point_at(&self, seg: usize, t: f64) -> [f64; 2] {
        let s = &self.segments[seg];
        crate::geom::lerp2(s.from, s.to, t)
    }

    /// Loop vertices in order (the `from` point of each segment).
    pub fn loop_vertices(&self) -> Vec<[f64; 2]> {
        self.segments.iter().map(|s| s.from).collect()
    }

    /// Total chord length of the loop.
    pub fn perimeter(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| crate::geom::dist2(s.from, s.to))
            .sum()
    }
}

impl SewingPatternDoc {
    pub fn panel(&self, panel_id: u32) -> Option<&VectorPanel> {
        self.panels.iter().find(|p| p.panel_id == panel_id)
    }
}
