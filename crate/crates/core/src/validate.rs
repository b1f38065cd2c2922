//! Structural validation for the three asset kinds.
//!
//! Validation is pure: it never mutates its input and returns a report
//! listing every violated invariant with a location and a human-readable
//! detail string. An empty report means the asset is valid.

use crate::garmage::Garmage;
use crate::geom::{cross2, sub2};
use crate::mesh::GarmentMesh;
use crate::pattern::SewingPatternDoc;
use serde::Serialize;

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Short machine-checkable rule name, e.g. `face-spans-panels`.
    pub rule: String,
    /// Where the violation was found, e.g. `face 12` or `panel 3`.
    pub location: String,
    pub detail: String,
}

/// Result of validating one asset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, rule: &str, location: String, detail: String) {
        self.violations.push(Violation {
            rule: rule.to_string(),
            location,
            detail,
        });
    }
}

/// Any validatable asset.
pub enum AssetRef<'a> {
    Mesh(&'a GarmentMesh),
    Garmage(&'a Garmage),
    Pattern(&'a SewingPatternDoc),
}

/// Dispatching entry point over the three asset kinds.
pub fn validate(asset: AssetRef<'_>) -> ValidationReport {
    match asset {
        AssetRef::Mesh(m) => validate_mesh(m),
        AssetRef::Garmage(g) => validate_garmage(g),
        AssetRef::Pattern(p) => validate_pattern(p),
    }
}

/// Checks mesh invariants: index validity, faces staying inside one panel,
/// stitch pairs being distinct boundary vertices.
pub fn validate_mesh(mesh: &GarmentMesh) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = mesh.vertices.len();

    for (fi, f) in mesh.faces.iter().enumerate() {
        let mut ok = true;
        for &vi in f {
            if vi as usize >= n {
                report.push(
                    "face-bad-index",
                    format!("face {fi}"),
                    format!("vertex index {vi} out of range ({n} vertices)"),
                );
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let pids = [
            mesh.vertices[f[0] as usize].panel_id,
            mesh.vertices[f[1] as usize].panel_id,
            mesh.vertices[f[2] as usize].panel_id,
        ];
        if pids[0] != pids[1] || pids[0] != pids[2] {
            report.push(
                "face-spans-panels",
                format!("face {fi}"),
                format!("vertices belong to panels {:?}", pids),
            );
        }
    }

    let boundary = mesh.boundary_vertex_flags();
    for (si, s) in mesh.stitches.iter().enumerate() {
        let mut ok = true;
        for &vi in s {
            if vi as usize >= n {
                report.push(
                    "stitch-bad-index",
                    format!("stitch {si}"),
                    format!("vertex index {vi} out of range ({n} vertices)"),
                );
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        if s[0] == s[1] {
            report.push(
                "stitch-self-pair",
                format!("stitch {si}"),
                format!("both endpoints are vertex {}", s[0]),
            );
            continue;
        }
        for &vi in s {
            if !boundary[vi as usize] {
                report.push(
                    "stitch-interior-endpoint",
                    format!("stitch {si}"),
                    format!("vertex {vi} is not on a panel boundary"),
                );
            }
        }
    }

    report
}

/// Checks garmage invariants: at least one panel, uniform resolution,
/// binary alpha, normalized channels under alpha, positive scales, and a
/// single 4-connected alpha region without holes.
pub fn validate_garmage(g: &Garmage) -> ValidationReport {
    let mut report = ValidationReport::default();
    if g.panels.is_empty() {
        report.push(
            "garmage-empty",
            "garmage".to_string(),
            "no panels".to_string(),
        );
        return report;
    }
    let (h0, w0) = (g.panels[0].image.height, g.panels[0].image.width);
    for (pi, panel) in g.panels.iter().enumerate() {
        let img = &panel.image;
        if img.height != h0 || img.width != w0 {
            report.push(
                "garmage-mixed-resolution",
                format!("panel {pi}"),
                format!(
                    "image is {}x{}, panel 0 is {}x{}",
                    img.height, img.width, h0, w0
                ),
            );
        }
        if img.data.len() != img.height * img.width * 4 {
            report.push(
                "garmage-bad-buffer",
                format!("panel {pi}"),
                format!(
                    "buffer has {} floats, expected {}",
                    img.data.len(),
                    img.height * img.width * 4
                ),
            );
            continue;
        }
        for k in 0..3 {
            if !(panel.frame.scale_geo[k] > 0.0) {
                report.push(
                    "frame-nonpositive-scale",
                    format!("panel {pi}"),
                    format!("scale_geo[{k}] = {}", panel.frame.scale_geo[k]),
                );
            }
        }
        for k in 0..2 {
            if !(panel.frame.scale_uv[k] > 0.0) {
                report.push(
                    "frame-nonpositive-scale",
                    format!("panel {pi}"),
                    format!("scale_uv[{k}] = {}", panel.frame.scale_uv[k]),
                );
            }
        }

        let mut alpha_bad = 0usize;
        let mut range_bad = 0usize;
        let mut first_range_bad: Option<(usize, usize, usize, f32)> = None;
        for y in 0..img.height {
            for x in 0..img.width {
                let a = img.get(y, x, 3);
                if a != 0.0 && a != 1.0 {
                    alpha_bad += 1;
                }
                if a >= 0.5 {
                    for c in 0..3 {
                        let v = img.get(y, x, c);
                        if !(-1.0..=1.0).contains(&v) || !v.is_finite() {
                            range_bad += 1;
                            if first_range_bad.is_none() {
                                first_range_bad = Some((y, x, c, v));
                            }
                        }
                    }
                }
            }
        }
        if alpha_bad > 0 {
            report.push(
                "alpha-not-binary",
                format!("panel {pi}"),
                format!("{alpha_bad} pixels with alpha outside {{0, 1}}"),
            );
        }
        if range_bad > 0 {
            let (y, x, c, v) = first_range_bad.unwrap();
            report.push(
                "channel-out-of-range",
                format!("panel {pi}"),
                format!(
                    "{range_bad} covered channel values outside [-1, 1]; first at (y={y}, x={x}, c={c}) = {v}"
                ),
            );
        }

        match alpha_region_shape(img) {
            AlphaShape::Empty => report.push(
                "alpha-empty",
                format!("panel {pi}"),
                "no covered pixels".to_string(),
            ),
            AlphaShape::MultiComponent(k) => report.push(
                "alpha-multi-component",
                format!("panel {pi}"),
                format!("{k} 4-connected components (expected 1)"),
            ),
            AlphaShape::HasHole => report.push(
                "alpha-has-hole",
                format!("panel {pi}"),
                "covered region has an interior hole".to_string(),
            ),
            AlphaShape::SingleSolid => {}
        }
    }
    report
}

enum AlphaShape {
    Empty,
    SingleSolid,
    MultiComponent(usize),
    HasHole,
}

/// Classifies the alpha region: one solid 4-connected component, several
/// components, or one component with a hole.
fn alpha_region_shape(img: &crate::garmage::GeometryImage) -> AlphaShape {
    let (h, w) = (img.height, img.width);
    let mut label = vec![0u8; h * w]; // 0 unvisited, 1 fg visited, 2 bg visited
    let mut components = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for y in 0..h {
        for x in 0..w {
            if img.alpha(y, x) && label[y * w + x] == 0 {
                components += 1;
                if components > 1 {
                    break;
                }
                stack.push((y, x));
                label[y * w + x] = 1;
                while let Some((cy, cx)) = stack.pop() {
                    let neighbors = [
                        (cy.wrapping_sub(1), cx),
                        (cy + 1, cx),
                        (cy, cx.wrapping_sub(1)),
                        (cy, cx + 1),
                    ];
                    for (ny, nx) in neighbors {
                        if ny < h && nx < w && img.alpha(ny, nx) && label[ny * w + nx] == 0 {
                            label[ny * w + nx] = 1;
                            stack.push((ny, nx));
                        }
                    }
                }
            }
        }
    }
    if components == 0 {
        return AlphaShape::Empty;
    }
    if components > 1 {
        // count the rest for the report
        let mut label2 = vec![false; h * w];
        let mut count = 0usize;
        for y in 0..h {
            for x in 0..w {
                if img.alpha(y, x) && !label2[y * w + x] {
                    count += 1;
                    stack.push((y, x));
                    label2[y * w + x] = true;
                    while let Some((cy, cx)) = stack.pop() {
                        let neighbors = [
                            (cy.wrapping_sub(1), cx),
                            (cy + 1, cx),
                            (cy, cx.wrapping_sub(1)),
                            (cy, cx + 1),
                        ];
                        for (ny, nx) in neighbors {
                            if ny < h && nx < w && img.alpha(ny, nx) && !label2[ny * w + nx] {
                                label2[ny * w + nx] = true;
                                stack.push((ny, nx));
                            }
                        }
                    }
                }
            }
        }
        return AlphaShape::MultiComponent(count);
    }

    // flood the background from the border; any unreached empty pixel is a hole
    for y in 0..h {
        for x in 0..w {
            let on_border = y == 0 || x == 0 || y == h - 1 || x == w - 1;
            if on_border && !img.alpha(y, x) && label[y * w + x] == 0 {
                stack.push((y, x));
                label[y * w + x] = 2;
                while let Some((cy, cx)) = stack.pop() {
                    let neighbors = [
                        (cy.wrapping_sub(1), cx),
                        (cy + 1, cx),
                        (cy, cx.wrapping_sub(1)),
                        (cy, cx + 1),
                    ];
                    for (ny, nx) in neighbors {
                        if ny < h && nx < w && !img.alpha(ny, nx) && label[ny * w + nx] == 0 {
                            label[ny * w + nx] = 2;
                            stack.push((ny, nx));
                        }
                    }
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            if !img.alpha(y, x) && label[y * w + x] == 0 {
                return AlphaShape::HasHole;
            }
        }
    }
    AlphaShape::SingleSolid
}

/// Checks pattern invariants: closed simple counter-clockwise loops, valid
/// stitch references, and parameter ranges inside `[0, 1]`.
pub fn validate_pattern(doc: &SewingPatternDoc) -> ValidationReport {
    let mut report = ValidationReport::default();
    const EPS: f64 = 1e-9;

    for panel in &doc.panels {
        let loc = format!("panel {}", panel.panel_id);
        let segs = &panel.segments;
        if segs.len() < 3 {
            report.push(
                "loop-too-short",
                loc.clone(),
                format!("{} segments (need at least 3)", segs.len()),
            );
            continue;
        }
        for (i, s) in segs.iter().enumerate() {
            let next = &segs[(i + 1) % segs.len()];
            if crate::geom::dist2(s.to, next.from) > EPS {
                report.push(
                    "loop-not-closed",
                    loc.clone(),
                    format!(
                        "segment {} ends at {:?} but segment {} starts at {:?}",
                        i,
                        s.to,
                        (i + 1) % segs.len(),
                        next.from
                    ),
                );
            }
        }
        let verts = panel.loop_vertices();
        if crate::geom::signed_area2(&verts) <= 0.0 {
            report.push(
                "loop-not-ccw",
                loc.clone(),
                format!("signed area {}", crate::geom::signed_area2(&verts)),
            );
        }
        // pairwise intersection of non-adjacent segments
        let n = segs.len();
        'outer: for i in 0..n {
            for j in i + 1..n {
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                if segments_properly_intersect(
                    segs[i].from,
                    segs[i].to,
                    segs[j].from,
                    segs[j].to,
                ) {
                    report.push(
                        "loop-self-intersects",
                        loc.clone(),
                        format!("segments {i} and {j} cross"),
                    );
                    break 'outer;
                }
            }
        }
    }

    for (si, st) in doc.stitches.iter().enumerate() {
        for (side_name, side) in [("a", &st.a), ("b", &st.b)] {
            let loc = format!("stitch {si} side {side_name}");
            match doc.panel(side.panel) {
                None => report.push(
                    "stitch-bad-panel",
                    loc,
                    format!("panel {} does not exist", side.panel),
                ),
                Some(panel) => {
                    if side.segment >= panel.segments.len() {
                        report.push(
                            "stitch-bad-segment",
                            loc,
                            format!(
                                "segment {} out of range ({} segments)",
                                side.segment,
                                panel.segments.len()
                            ),
                        );
                    } else if !(0.0..=1.0).contains(&side.t0)
                        || !(0.0..=1.0).contains(&side.t1)
                        || side.t0 > side.t1
                    {
                        report.push(
                            "stitch-bad-params",
                            loc,
                            format!("t0 = {}, t1 = {}", side.t0, side.t1),
                        );
                    }
                }
            }
        }
    }
    report
}

/// True when open segments ab and cd cross at interior points.
fn segments_properly_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = cross2(sub2(b, a), sub2(c, a));
    let d2 = cross2(sub2(b, a), sub2(d, a));
    let d3 = cross2(sub2(d, c), sub2(a, c));
    let d4 = cross2(sub2(d, c), sub2(b, c));
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::garmage::{GarmagePanel, GeometryImage, PanelFrame};
    use crate::mesh::MeshVertex;
    use crate::pattern::{PatternSegment, VectorPanel};

    fn frame() -> PanelFrame {
        PanelFrame {
            center_geo: [0.0; 3],
            scale_geo: [1.0; 3],
            scale_uv: [1.0, 1.0],
        }
    }

    fn block_image(h: usize, w: usize, y0: usize, x0: usize, hh: usize, ww: usize) -> GeometryImage {
        let mut img = GeometryImage::zeros(h, w);
        for y in y0..y0 + hh {
            for x in x0..x0 + ww {
                img.set(y, x, 3, 1.0);
            }
        }
        img
    }

    #[test]
    fn face_spanning_panels_is_reported() {
        let vertices = vec![
            MeshVertex {
                position: [0.0; 3],
                uv: [0.0, 0.0],
                panel_id: 0,
            },
            MeshVertex {
                position: [1.0, 0.0, 0.0],
                uv: [1.0, 0.0],
                panel_id: 0,
            },
            MeshVertex {
                position: [0.0, 1.0, 0.0],
                uv: [0.0, 1.0],
                panel_id: 1,
            },
        ];
        let mesh = GarmentMesh::new(vertices, vec![[0, 1, 2]], vec![]);
        let report = validate_mesh(&mesh);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "face-spans-panels" && v.location == "face 0"));
    }

    #[test]
    fn stitch_on_interior_vertex_is_reported() {
        // 3x3 grid from mesh tests: vertex 4 is interior
        let mut vertices = Vec::new();
        for y in 0..3 {
            for x in 0..3 {
                vertices.push(MeshVertex {
                    position: [x as f64, y as f64, 0.0],
                    uv: [x as f64, y as f64],
                    panel_id: 0,
                });
            }
        }
        let mut faces = Vec::new();
        for y in 0..2u32 {
            for x in 0..2u32 {
                let i = y * 3 + x;
                faces.push([i, i + 1, i + 3]);
                faces.push([i + 1, i + 4, i + 3]);
            }
        }
        let mesh = GarmentMesh::new(vertices, faces, vec![[4, 0]]);
        let report = validate_mesh(&mesh);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "stitch-interior-endpoint"));
    }

    #[test]
    fn two_alpha_components_are_reported() {
        let mut img = block_image(16, 16, 2, 2, 4, 4);
        for y in 10..14 {
            for x in 10..14 {
                img.set(y, x, 3, 1.0);
            }
        }
        let g = Garmage {
            panels: vec![GarmagePanel {
                image: img,
                frame: frame(),
                label: None,
            }],
        };
        let report = validate_garmage(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "alpha-multi-component"));
    }

    #[test]
    fn alpha_hole_is_reported() {
        let mut img = block_image(16, 16, 2, 2, 8, 8);
        img.set(5, 5, 3, 0.0);
        let g = Garmage {
            panels: vec![GarmagePanel {
                image: img,
                frame: frame(),
                label: None,
            }],
        };
        let report = validate_garmage(&g);
        assert!(report.violations.iter().any(|v| v.rule == "alpha-has-hole"));
    }

    #[test]
    fn channel_range_violation_is_reported() {
        let mut img = block_image(16, 16, 2, 2, 4, 4);
        img.set(3, 3, 0, 1.7);
        let g = Garmage {
            panels: vec![GarmagePanel {
                image: img,
                frame: frame(),
                label: None,
            }],
        };
        let report = validate_garmage(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "channel-out-of-range" && v.location == "panel 0"));
    }

    fn square_panel() -> VectorPanel {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let segments = (0..4)
            .map(|i| PatternSegment {
                from: pts[i],
                to: pts[(i + 1) % 4],
                source_span: None,
            })
            .collect();
        VectorPanel {
            panel_id: 0,
            label: None,
            segments,
        }
    }

    #[test]
    fn valid_pattern_passes() {
        let doc = SewingPatternDoc {
            panels: vec![square_panel()],
            stitches: vec![],
        };
        assert!(validate_pattern(&doc).is_valid());
    }

    #[test]
    fn open_loop_is_reported() {
        let mut panel = square_panel();
        panel.segments[2].to = [0.5, 1.5];
        let doc = SewingPatternDoc {
            panels: vec![panel],
            stitches: vec![],
        };
        let report = validate_pattern(&doc);
        assert!(report.violations.iter().any(|v| v.rule == "loop-not-closed"));
    }

    #[test]
    fn cw_loop_is_reported() {
        let panel = square_panel();
        let mut rev_segments: Vec<PatternSegment> = panel
            .segments
            .iter()
            .rev()
            .map(|s| PatternSegment {
                from: s.to,
                to: s.from,
                source_span: None,
            })
            .collect();
        rev_segments.rotate_left(1);
        let doc = SewingPatternDoc {
            panels: vec![VectorPanel {
                panel_id: 0,
                label: None,
                segments: rev_segments,
            }],
            stitches: vec![],
        };
        let report = validate_pattern(&doc);
        assert!(report.violations.iter().any(|v| v.rule == "loop-not-ccw"));
    }

    #[test]
    fn bad_stitch_segment_is_reported() {
        let doc = SewingPatternDoc {
            panels: vec![square_panel()],
            stitches: vec![crate::pattern::SegmentStitch {
                a: crate::pattern::StitchSideRef {
                    panel: 0,
                    segment: 7,
                    t0: 0.0,
                    t1: 1.0,
                },
                b: crate::pattern::StitchSideRef {
                    panel: 0,
                    segment: 0,
                    t0: 0.0,
                    t1: 1.0,
                },
                reversed: false,
            }],
        };
        let report = validate_pattern(&doc);
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "stitch-bad-segment"));
    }

    #[test]
    fn validation_is_pure() {
        let doc = SewingPatternDoc {
            panels: vec![square_panel()],
            stitches: vec![],
        };
        let before = doc.clone();
        let r1 = validate_pattern(&doc);
        let r2 = validate_pattern(&doc);
        assert_eq!(doc, before);
        assert_eq!(r1, r2);
    }
}
