//! File formats: OBJ with a stitch sidecar, the GMG binary container for
//! geometry images, the vector pattern JSON document, and the point-stitch
//! JSON report.

pub mod gmg;
pub mod obj;
pub mod pattern_json;
pub mod point_stitches;

pub use gmg::{load_gmg, save_gmg};
pub use obj::{load_obj, save_obj, sidecar_path};
pub use pattern_json::{load_pattern, save_pattern};
pub use point_stitches::{load_point_stitches, save_point_stitches, PointStitchDoc};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad magic: expected \"GMG1\", found {found:?}")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported format version {found}")]
    VersionUnsupported { found: u32 },
    #[error("truncated file: need {expected} bytes, have {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("line {line}: face outside a panel group or spanning panel groups")]
    MissingPanelGroup { line: usize },
    #[error("line {line}: face must pair each vertex with its own UV index (v/v)")]
    NonPairedUV { line: usize },
    #[error("stitch references vertex {index} but the mesh has {vertices} vertices")]
    BadStitchIndex { index: usize, vertices: usize },
    #[error("schema violation at {path}: {detail}")]
    SchemaViolation { path: String, detail: String },
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("invalid content: {detail}")]
    Validation { detail: String },
}

/// Rounds to 9 significant decimal digits, the precision stored in JSON
/// documents.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        format!("{:.8e}", x).parse().unwrap()
    } else {
        x
    }
}
