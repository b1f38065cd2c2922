//! Per-panel geometry-image codec.
//!
//! Encoding rasterizes each panel's UV-space triangles into a fixed-size
//! four-channel float image (normalized 3D position + binary coverage) and
//! summarizes the panel's placement in an 8-number frame. Decoding turns
//! every covered pixel back into a mesh vertex and every fully covered
//! 2x2 pixel quad into two triangles.
//!
//! All interpolation and normalization runs in f64 and is rounded to f32
//! only when writing channels, so an encode -> decode -> encode round trip
//! reproduces the image and frame bit for bit.

use crate::garmage::{Garmage, GarmagePanel, GeometryImage, PanelFrame, PanelMapping};
use crate::mesh::{GarmentMesh, MeshVertex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Knobs shared by the encoder, decoder, and contour resampler.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct CodecConfig {
    /// Image height and width in pixels.
    pub resolution: usize,
    /// Empty border kept around the rasterized panel, in pixels.
    pub uv_margin_px: usize,
    /// Rounds of geometry-channel dilation outside the coverage region.
    pub dilation_px: usize,
    /// Floor applied to frame scales; also gates degenerate UV boxes.
    pub epsilon_scale: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            resolution: 256,
            uv_margin_px: 2,
            dilation_px: 1,
            epsilon_scale: 1e-6,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("panel {panel_id}: UV bounding box area {area:.3e} is below the degeneracy floor")]
    DegenerateUV { panel_id: u32, area: f64 },
    #[error("panel {panel_id}: no triangles to rasterize")]
    EmptyPanel { panel_id: u32 },
    #[error("panel {panel_id}: no pixel centers fall inside the panel")]
    NoCoverage { panel_id: u32 },
    #[error("mesh has no panels")]
    EmptyGarment,
}

/// Neighbor precedence used when dilating geometry channels into the empty
/// border: 4-neighbors first, then diagonals, each in (dy, dx) order.
const DILATION_NEIGHBORS: [(i64, i64); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (1, 1),
];

/// Rasterizes one panel of the mesh into a geometry image plus frame.
pub fn encode_panel(
    mesh: &GarmentMesh,
    panel_id: u32,
    config: &CodecConfig,
) -> Result<GarmagePanel, CodecError> {
    let vert_ids: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&i| mesh.vertices[i].panel_id == panel_id)
        .collect();
    let faces = mesh.panel_faces(panel_id);
    if vert_ids.is_empty() || faces.is_empty() {
        return Err(CodecError::EmptyPanel { panel_id });
    }

    // Panel bounding boxes in UV and 3D.
    let mut uv_min = [f64::INFINITY; 2];
    let mut uv_max = [f64::NEG_INFINITY; 2];
    let mut p_min = [f64::INFINITY; 3];
    let mut p_max = [f64::NEG_INFINITY; 3];
    for &i in &vert_ids {
        let v = &mesh.vertices[i];
        for k in 0..2 {
            uv_min[k] = uv_min[k].min(v.uv[k]);
            uv_max[k] = uv_max[k].max(v.uv[k]);
        }
        for k in 0..3 {
            p_min[k] = p_min[k].min(v.position[k]);
            p_max[k] = p_max[k].max(v.position[k]);
        }
    }
    let ext = [uv_max[0] - uv_min[0], uv_max[1] - uv_min[1]];
    if ext[0] * ext[1] < config.epsilon_scale * config.epsilon_scale {
        return Err(CodecError::DegenerateUV {
            panel_id,
            area: ext[0] * ext[1],
        });
    }

    let frame = PanelFrame {
        center_geo: [
            ((p_min[0] + p_max[0]) / 2.0) as f32,
            ((p_min[1] + p_max[1]) / 2.0) as f32,
            ((p_min[2] + p_max[2]) / 2.0) as f32,
        ],
        scale_geo: [
            (((p_max[0] - p_min[0]) / 2.0).max(config.epsilon_scale)) as f32,
            (((p_max[1] - p_min[1]) / 2.0).max(config.epsilon_scale)) as f32,
            (((p_max[2] - p_min[2]) / 2.0).max(config.epsilon_scale)) as f32,
        ],
        scale_uv: [
            (ext[0].max(config.epsilon_scale)) as f32,
            (ext[1].max(config.epsilon_scale)) as f32,
        ],
    };
    // Normalize and map with the f32-rounded frame values: the decoder only
    // sees those, so using them here keeps round trips exact.
    let center = [
        frame.center_geo[0] as f64,
        frame.center_geo[1] as f64,
        frame.center_geo[2] as f64,
    ];
    let scale = [
        frame.scale_geo[0] as f64,
        frame.scale_geo[1] as f64,
        frame.scale_geo[2] as f64,
    ];
    let res = config.resolution;
    let mapping = PanelMapping::from_frame(&frame, res, res, config.uv_margin_px);

    let mut image = GeometryImage::zeros(res, res);
    // UV relative to the bounding-box minimum, per global vertex index.
    let shifted_uv = |i: u32| -> [f64; 2] {
        let v = &mesh.vertices[i as usize];
        [v.uv[0] - uv_min[0], v.uv[1] - uv_min[1]]
    };

    for f in &faces {
        let a = mapping.uv_to_px(shifted_uv(f[0]));
        let b = mapping.uv_to_px(shifted_uv(f[1]));
        let c = mapping.uv_to_px(shifted_uv(f[2]));
        let den = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if den.abs() < 1e-14 {
            continue;
        }
        let lo_x = a[0].min(b[0]).min(c[0]);
        let hi_x = a[0].max(b[0]).max(c[0]);
        let lo_y = a[1].min(b[1]).min(c[1]);
        let hi_y = a[1].max(b[1]).max(c[1]);
        let x0 = ((lo_x - 0.5).floor() as i64 - 1).max(0) as usize;
        let x1 = ((hi_x - 0.5).ceil() as i64 + 1).min(res as i64 - 1) as usize;
        let y0 = ((lo_y - 0.5).floor() as i64 - 1).max(0) as usize;
        let y1 = ((hi_y - 0.5).ceil() as i64 + 1).min(res as i64 - 1) as usize;
        if x0 > x1 || y0 > y1 {
            continue;
        }

        let pa = mesh.vertices[f[0] as usize].position;
        let pb = mesh.vertices[f[1] as usize].position;
        let pc = mesh.vertices[f[2] as usize].position;
        const TOL: f64 = -1e-12;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let p = [x as f64 + 0.5, y as f64 + 0.5];
                let l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0])) / den;
                let l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0])) / den;
                let l2 = ((a[0] - p[0]) * (b[1] - p[1]) - (a[1] - p[1]) * (b[0] - p[0])) / den;
                if l0 < TOL || l1 < TOL || l2 < TOL {
                    continue;
                }
                // Later faces overwrite earlier ones, which makes coverage
                // of shared edges deterministic.
                for k in 0..3 {
                    let pos = l0 * pa[k] + l1 * pb[k] + l2 * pc[k];
                    let n = ((pos - center[k]) / scale[k]).clamp(-1.0, 1.0);
                    image.set(y, x, k, n as f32);
                }
                image.set(y, x, 3, 1.0);
            }
        }
    }

    if image.alpha_pixel_count() == 0 {
        return Err(CodecError::NoCoverage { panel_id });
    }
    dilate_channels(&mut image, config.dilation_px);

    Ok(GarmagePanel {
        image,
        frame,
        label: None,
    })
}

/// Copies geometry channels of covered/already-dilated pixels into adjacent
/// empty pixels for `rounds` rounds. Coverage (alpha) is left untouched;
/// each round reads only the previous round's state, and the first filled
/// neighbor in `DILATION_NEIGHBORS` order wins.
fn dilate_channels(image: &mut GeometryImage, rounds: usize) {
    let (h, w) = (image.height, image.width);
    let mut filled: Vec<bool> = (0..h * w).map(|i| image.data[i * 4 + 3] >= 0.5).collect();
    for _ in 0..rounds {
        let prev_data = image.data.clone();
        let prev_filled = filled.clone();
        for y in 0..h {
            for x in 0..w {
                if prev_filled[y * w + x] {
                    continue;
                }
                for (dy, dx) in DILATION_NEIGHBORS {
                    let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                    if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                        continue;
                    }
                    let ni = ny as usize * w + nx as usize;
                    if prev_filled[ni] {
                        for c in 0..3 {
                            image.data[(y * w + x) * 4 + c] = prev_data[ni * 4 + c];
                        }
                        filled[y * w + x] = true;
                        break;
                    }
                }
            }
        }
    }
}

/// True for pixels that carry usable geometry: covered pixels plus the
/// dilated ring around them (empty pixels whose channels were filled in).
pub fn geometry_valid_mask(image: &GeometryImage) -> Vec<bool> {
    let (h, w) = (image.height, image.width);
    let mut mask = vec![false; h * w];
    for y in 0..h {
        for x in 0..w {
            if image.alpha(y, x) {
                mask[y * w + x] = true;
                continue;
            }
            let nonzero = (0..3).any(|c| image.get(y, x, c) != 0.0);
            if nonzero {
                mask[y * w + x] = true;
            }
        }
    }
    mask
}

/// Samples the denormalized 3D position at continuous pixel coordinates
/// `px` by bilinear interpolation over the valid pixels around it, with the
/// weights renormalized to the valid subset. Returns None when no valid
/// pixel is in range.
pub fn sample_position(
    panel: &GarmagePanel,
    valid: &[bool],
    px: [f64; 2],
) -> Option<[f64; 3]> {
    let img = &panel.image;
    let (h, w) = (img.height as i64, img.width as i64);
    let fx = px[0] - 0.5;
    let fy = px[1] - 0.5;
    let x0 = fx.floor() as i64;
    let y0 = fy.floor() as i64;
    let tx = fx - x0 as f64;
    let ty = fy - y0 as f64;
    let mut wsum = 0.0;
    let mut acc = [0.0f64; 3];
    for (dy, dx, wgt) in [
        (0, 0, (1.0 - tx) * (1.0 - ty)),
        (0, 1, tx * (1.0 - ty)),
        (1, 0, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ] {
        let (y, x) = (y0 + dy, x0 + dx);
        if y < 0 || x < 0 || y >= h || x >= w {
            continue;
        }
        let (yu, xu) = (y as usize, x as usize);
        if !valid[yu * img.width + xu] {
            continue;
        }
        wsum += wgt;
        for c in 0..3 {
            acc[c] += wgt * img.get(yu, xu, c) as f64;
        }
    }
    if wsum < 1e-12 {
        return None;
    }
    let mut out = [0.0f64; 3];
    for c in 0..3 {
        let n = acc[c] / wsum;
        out[c] = panel.frame.center_geo[c] as f64 + n * panel.frame.scale_geo[c] as f64;
    }
    Some(out)
}

/// Reconstructs one panel: a vertex per covered pixel, two triangles per
/// fully covered 2x2 pixel quad. Vertex UV is panel-local (origin at the UV
/// bounding-box minimum).
pub fn decode_panel(
    panel: &GarmagePanel,
    panel_id: u32,
    config: &CodecConfig,
) -> (Vec<MeshVertex>, Vec<[u32; 3]>) {
    let img = &panel.image;
    let (h, w) = (img.height, img.width);
    let mapping = PanelMapping::from_frame(&panel.frame, w, h, config.uv_margin_px);
    let center = panel.frame.center_geo;
    let scale = panel.frame.scale_geo;

    let mut vertex_at = vec![u32::MAX; h * w];
    let mut vertices = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !img.alpha(y, x) {
                continue;
            }
            vertex_at[y * w + x] = vertices.len() as u32;
            let uv = mapping.px_to_uv([x as f64 + 0.5, y as f64 + 0.5]);
            let mut pos = [0.0f64; 3];
            for c in 0..3 {
                pos[c] = center[c] as f64 + img.get(y, x, c) as f64 * scale[c] as f64;
            }
            vertices.push(MeshVertex {
                position: pos,
                uv,
                panel_id,
            });
        }
    }

    let mut faces = Vec::new();
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            let p00 = vertex_at[y * w + x];
            let p10 = vertex_at[y * w + x + 1];
            let p01 = vertex_at[(y + 1) * w + x];
            let p11 = vertex_at[(y + 1) * w + x + 1];
            if p00 != u32::MAX && p10 != u32::MAX && p01 != u32::MAX && p11 != u32::MAX {
                faces.push([p00, p10, p01]);
                faces.push([p10, p11, p01]);
            }
        }
    }
    (vertices, faces)
}

/// Encodes every panel of the mesh, ordered by ascending panel id.
pub fn encode_garment(mesh: &GarmentMesh, config: &CodecConfig) -> Result<Garmage, CodecError> {
    let ids = mesh.panel_ids();
    if ids.is_empty() {
        return Err(CodecError::EmptyGarment);
    }
    let panels: Result<Vec<GarmagePanel>, CodecError> = ids
        .par_iter()
        .map(|&pid| encode_panel(mesh, pid, config))
        .collect();
    Ok(Garmage { panels: panels? })
}

/// Decodes every panel and concatenates them into one mesh. Decoded panel
/// ids are positional (0..panel_count); the result carries no stitches.
pub fn decode_garment(garmage: &Garmage, config: &CodecConfig) -> GarmentMesh {
    let parts: Vec<(Vec<MeshVertex>, Vec<[u32; 3]>)> = garmage
        .panels
        .par_iter()
        .enumerate()
        .map(|(pid, panel)| decode_panel(panel, pid as u32, config))
        .collect();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (vs, fs) in parts {
        let off = vertices.len() as u32;
        vertices.extend(vs);
        faces.extend(fs.into_iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }
    GarmentMesh::new(vertices, faces, Vec::new())
}
