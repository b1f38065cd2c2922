//! JSON report of matched boundary-point pairs.
//!
//! Schema: `{"version": 1, "total_points": N, "pairs": [{"a": i, "b": j,
//! "confidence": c}, ...]}` with indices into the boundary point set and
//! confidences stored to 9 significant digits.

use super::{round9, IoError};
use crate::matcher::PointMatch;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStitchDoc {
    pub version: u32,
    pub total_points: usize,
    pub pairs: Vec<PointMatch>,
}

const VERSION: u32 = 1;

impl PointStitchDoc {
    pub fn new(total_points: usize, pairs: &[PointMatch]) -> PointStitchDoc {
        PointStitchDoc {
            version: VERSION,
            total_points,
            pairs: pairs
                .iter()
                .map(|m| PointMatch {
                    a: m.a,
                    b: m.b,
                    confidence: round9(m.confidence),
                })
                .collect(),
        }
    }
}

pub fn save_point_stitches(doc: &PointStitchDoc, path: &Path) -> Result<(), IoError> {
    let rounded = PointStitchDoc::new(doc.total_points, &doc.pairs);
    let mut text = serde_json::to_string_pretty(&rounded)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_point_stitches(path: &Path) -> Result<PointStitchDoc, IoError> {
    let doc: PointStitchDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if doc.version != VERSION {
        return Err(IoError::VersionUnsupported { found: doc.version });
    }
    for m in &doc.pairs {
        for idx in [m.a, m.b] {
            if idx >= doc.total_points {
                return Err(IoError::BadStitchIndex {
                    index: idx,
                    vertices: doc.total_points,
                });
            }
        }
    }
    Ok(doc)
}
