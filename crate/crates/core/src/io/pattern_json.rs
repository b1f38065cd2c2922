//! JSON document for vectorized sewing patterns.
//!
//! Schema:
//! ```json
//! {
//!   "version": 1,
//!   "panels": [
//!     {"id": 0, "label": null, "loop": [{"from": [u, v], "to": [u, v]}, ...]}
//!   ],
//!   "stitches": [
//!     {"a": {"panel": 0, "segment": 2, "t0": 0.0, "t1": 1.0},
//!      "b": {"panel": 1, "segment": 0, "t0": 0.0, "t1": 1.0},
//!      "reversed": false}
//!   ]
//! }
//! ```
//! Coordinates and parameters are stored with 9 significant digits. Loading
//! walks the JSON by hand so schema errors report the exact path, then runs
//! content validation on the rebuilt document.

use super::{round9, IoError};
use crate::pattern::{PatternSegment, SegmentStitch, SewingPatternDoc, StitchSideRef, VectorPanel};
use crate::validate::{self, AssetRef};
use serde_json::{json, Value};
use std::path::Path;

const VERSION: u64 = 1;

pub fn save_pattern(doc: &SewingPatternDoc, path: &Path) -> Result<(), IoError> {
    let panels: Vec<Value> = doc
        .panels
        .iter()
        .map(|p| {
            let segs: Vec<Value> = p
                .segments
                .iter()
                .map(|s| {
                    json!({
                        "from": [round9(s.from[0]), round9(s.from[1])],
                        "to": [round9(s.to[0]), round9(s.to[1])],
                    })
                })
                .collect();
            json!({ "id": p.panel_id, "label": p.label, "loop": segs })
        })
        .collect();
    let stitches: Vec<Value> = doc
        .stitches
        .iter()
        .map(|st| {
            let side = |s: &StitchSideRef| {
                json!({
                    "panel": s.panel,
                    "segment": s.segment,
                    "t0": round9(s.t0),
                    "t1": round9(s.t1),
                })
            };
            json!({ "a": side(&st.a), "b": side(&st.b), "reversed": st.reversed })
        })
        .collect();
    let root = json!({ "version": VERSION, "panels": panels, "stitches": stitches });
    let mut text = serde_json::to_string_pretty(&root)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn bad(path: impl Into<String>, detail: impl Into<String>) -> IoError {
    IoError::SchemaViolation {
        path: path.into(),
        detail: detail.into(),
    }
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, IoError> {
    v.get(key)
        .ok_or_else(|| bad(format!("{path}/{key}"), "missing field"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, IoError> {
    v.as_f64().ok_or_else(|| bad(path.to_string(), "expected a number"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64, IoError> {
    v.as_u64()
        .ok_or_else(|| bad(path.to_string(), "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| bad(path.to_string(), "expected an array"))
}

fn as_uv(v: &Value, path: &str) -> Result<[f64; 2], IoError> {
    let arr = as_array(v, path)?;
    if arr.len() != 2 {
        return Err(bad(path.to_string(), "expected exactly 2 numbers"));
    }
    Ok([
        as_f64(&arr[0], &format!("{path}/0"))?,
        as_f64(&arr[1], &format!("{path}/1"))?,
    ])
}

fn parse_side(v: &Value, path: &str) -> Result<StitchSideRef, IoError> {
    Ok(StitchSideRef {
        panel: as_u64(get(v, "panel", path)?, &format!("{path}/panel"))? as u32,
        segment: as_u64(get(v, "segment", path)?, &format!("{path}/segment"))? as usize,
        t0: as_f64(get(v, "t0", path)?, &format!("{path}/t0"))?,
        t1: as_f64(get(v, "t1", path)?, &format!("{path}/t1"))?,
    })
}

pub fn load_pattern(path: &Path) -> Result<SewingPatternDoc, IoError> {
    let root: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if !root.is_object() {
        return Err(bad("".to_string(), "root must be an object"));
    }
    let version = as_u64(get(&root, "version", "")?, "/version")?;
    if version != VERSION {
        return Err(bad("/version", format!("unsupported version {version}")));
    }

    let mut panels = Vec::new();
    for (pi, pv) in as_array(get(&root, "panels", "")?, "/panels")?.iter().enumerate() {
        let pp = format!("/panels/{pi}");
        let id = as_u64(get(pv, "id", &pp)?, &format!("{pp}/id"))? as u32;
        let label = match get(pv, "label", &pp)? {
            Value::Null => None,
            Value::String(s) => Some(s.clone()),
            _ => return Err(bad(format!("{pp}/label"), "expected a string or null")),
        };
        let mut segments = Vec::new();
        for (si, sv) in as_array(get(pv, "loop", &pp)?, &format!("{pp}/loop"))?
            .iter()
            .enumerate()
        {
            let sp = format!("{pp}/loop/{si}");
            segments.push(PatternSegment {
                from: as_uv(get(sv, "from", &sp)?, &format!("{sp}/from"))?,
                to: as_uv(get(sv, "to", &sp)?, &format!("{sp}/to"))?,
                source_span: None,
            });
        }
        panels.push(VectorPanel {
            panel_id: id,
            label,
            segments,
        });
    }

    let mut stitches = Vec::new();
    for (si, sv) in as_array(get(&root, "stitches", "")?, "/stitches")?
        .iter()
        .enumerate()
    {
        let sp = format!("/stitches/{si}");
        let reversed = get(sv, "reversed", &sp)?
            .as_bool()
            .ok_or_else(|| bad(format!("{sp}/reversed"), "expected a boolean"))?;
        stitches.push(SegmentStitch {
            a: parse_side(get(sv, "a", &sp)?, &format!("{sp}/a"))?,
            b: parse_side(get(sv, "b", &sp)?, &format!("{sp}/b"))?,
            reversed,
        });
    }

    let doc = SewingPatternDoc { panels, stitches };
    let violations = validate::validate(AssetRef::Pattern(&doc));
    if let Some(v) = violations.violations.first() {
        return Err(IoError::Validation {
            detail: format!("{} at {}: {}", v.rule, v.location, v.detail),
        });
    }
    Ok(doc)
}
