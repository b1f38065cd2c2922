//! OBJ mesh format with one object group per panel and a JSON sidecar for
//! stitch pairs.
//!
//! Vertices (`v`, meters) and pattern-space coordinates (`vt`, meters) are
//! written 1:1; every face corner references the same index for both
//! (`f i/i j/j k/k`). Panels appear as `o panel_<k>` groups in ascending
//! order, each holding its own vertices and faces. Floats use the shortest
//! decimal form that parses back to the identical value, so a load of a
//! save is exact. Stitches live next to the mesh in `<stem>.stitches.json`
//! as a plain array of `{"a": i, "b": j}` vertex index pairs.

use super::IoError;
use crate::mesh::{GarmentMesh, MeshVertex};
use crate::validate::{self, AssetRef};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Sidecar file holding the stitch pairs for an OBJ mesh.
pub fn sidecar_path(obj_path: &Path) -> PathBuf {
    obj_path.with_extension("stitches.json")
}

#[derive(Serialize, Deserialize)]
struct StitchPairDto {
    a: u32,
    b: u32,
}

pub fn save_obj(mesh: &GarmentMesh, path: &Path) -> Result<(), IoError> {
    if !mesh.panels_contiguous() {
        return Err(IoError::Validation {
            detail: "mesh vertices are not grouped contiguously by panel".to_string(),
        });
    }
    let violations = validate::validate(AssetRef::Mesh(mesh));
    if let Some(v) = violations.violations.first() {
        return Err(IoError::Validation {
            detail: format!("{} at {}: {}", v.rule, v.location, v.detail),
        });
    }

    let mut out = String::new();
    let mut face_of_panel: Vec<Vec<&[u32; 3]>> = Vec::new();
    let panel_ids = mesh.panel_ids();
    for &pid in &panel_ids {
        face_of_panel.push(mesh.faces.iter().filter(|f| {
            mesh.vertices[f[0] as usize].panel_id == pid
        }).collect());
    }

    for (gi, &pid) in panel_ids.iter().enumerate() {
        writeln!(out, "o panel_{pid}").unwrap();
        for v in mesh.vertices.iter().filter(|v| v.panel_id == pid) {
            writeln!(out, "v {} {} {}", v.position[0], v.position[1], v.position[2]).unwrap();
        }
        for v in mesh.vertices.iter().filter(|v| v.panel_id == pid) {
            writeln!(out, "vt {} {}", v.uv[0], v.uv[1]).unwrap();
        }
        for f in &face_of_panel[gi] {
            let [a, b, c] = [f[0] + 1, f[1] + 1, f[2] + 1];
            writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}").unwrap();
        }
    }
    std::fs::write(path, out)?;

    let pairs: Vec<StitchPairDto> = mesh
        .stitches
        .iter()
        .map(|&[a, b]| StitchPairDto { a, b })
        .collect();
    let mut json = serde_json::to_string_pretty(&pairs)?;
    json.push('\n');
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn load_obj(path: &Path) -> Result<GarmentMesh, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut vertices: Vec<MeshVertex> = Vec::new();
    let mut uvs: Vec<[f64; 2]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut current_panel: Option<u32> = None;
    let mut panel_ordinal: u32 = 0;

    let parse_f64 = |s: &str, line: usize| -> Result<f64, IoError> {
        s.parse::<f64>().map_err(|e| IoError::Parse {
            line,
            detail: format!("bad number {s:?}: {e}"),
        })
    };

    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let tag = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match tag {
            "o" => {
                current_panel = Some(panel_ordinal);
                panel_ordinal += 1;
            }
            "v" => {
                if rest.len() != 3 {
                    return Err(IoError::Parse {
                        line,
                        detail: format!("vertex needs 3 coordinates, got {}", rest.len()),
                    });
                }
                let panel_id = current_panel.ok_or(IoError::Parse {
                    line,
                    detail: "vertex before the first panel group".to_string(),
                })?;
                vertices.push(MeshVertex {
                    position: [
                        parse_f64(rest[0], line)?,
                        parse_f64(rest[1], line)?,
                        parse_f64(rest[2], line)?,
                    ],
                    uv: [0.0, 0.0],
                    panel_id,
                });
            }
            "vt" => {
                if rest.len() != 2 {
                    return Err(IoError::Parse {
                        line,
                        detail: format!("uv needs 2 coordinates, got {}", rest.len()),
                    });
                }
                uvs.push([parse_f64(rest[0], line)?, parse_f64(rest[1], line)?]);
            }
            "f" => {
                if current_panel.is_none() {
                    return Err(IoError::MissingPanelGroup { line });
                }
                if rest.len() != 3 {
                    return Err(IoError::Parse {
                        line,
                        detail: format!("face needs 3 corners, got {}", rest.len()),
                    });
                }
                let mut idx = [0u32; 3];
                for (k, corner) in rest.iter().enumerate() {
                    let (vi, ti) = corner.split_once('/').ok_or(IoError::NonPairedUV { line })?;
                    if vi != ti {
                        return Err(IoError::NonPairedUV { line });
                    }
                    let i: usize = vi.parse().map_err(|e| IoError::Parse {
                        line,
                        detail: format!("bad face index {vi:?}: {e}"),
                    })?;
                    if i == 0 || i > vertices.len() {
                        return Err(IoError::Parse {
                            line,
                            detail: format!(
                                "face index {i} out of range (have {} vertices)",
                                vertices.len()
                            ),
                        });
                    }
                    idx[k] = (i - 1) as u32;
                }
                let face_panel = vertices[idx[0] as usize].panel_id;
                if idx
                    .iter()
                    .any(|&i| vertices[i as usize].panel_id != face_panel)
                    || Some(face_panel) != current_panel
                {
                    return Err(IoError::MissingPanelGroup { line });
                }
                faces.push(idx);
            }
            _ => {} // ignore other OBJ directives
        }
    }

    if uvs.len() != vertices.len() {
        return Err(IoError::NonPairedUV { line: 0 });
    }
    for (v, uv) in vertices.iter_mut().zip(uvs) {
        v.uv = uv;
    }

    let side = sidecar_path(path);
    let stitches: Vec<[u32; 2]> = if side.exists() {
        let pairs: Vec<StitchPairDto> = serde_json::from_str(&std::fs::read_to_string(&side)?)?;
        for p in &pairs {
            for idx in [p.a, p.b] {
                if idx as usize >= vertices.len() {
                    return Err(IoError::BadStitchIndex {
                        index: idx as usize,
                        vertices: vertices.len(),
                    });
                }
            }
        }
        pairs.into_iter().map(|p| [p.a, p.b]).collect()
    } else {
        Vec::new()
    };

    let mesh = GarmentMesh::new(vertices, faces, stitches);
    let violations = validate::validate(AssetRef::Mesh(&mesh));
    if let Some(v) = violations.violations.first() {
        return Err(IoError::Validation {
            detail: format!("{} at {}: {}", v.rule, v.location, v.detail),
        });
    }
    Ok(mesh)
}
