//! Binary container for geometry-image garments.
//!
//! Layout (all integers and floats little-endian):
//!   magic "GMG1" (4 bytes), format version u32, panel count u32, then per
//!   panel: height u32, width u32, frame center 3xf32, frame scale 3xf32,
//!   frame UV scale 2xf32, label length u16 + UTF-8 bytes (zero length
//!   means no label), then height*width*4 f32 samples, row-major with the
//!   four channels interleaved per pixel.
//!
//! Round trips are bit-exact.

use super::IoError;
use crate::garmage::{Garmage, GarmagePanel, GeometryImage, PanelFrame};
use std::path::Path;

const MAGIC: [u8; 4] = *b"GMG1";
const VERSION: u32 = 1;

pub fn save_gmg(garment: &Garmage, path: &Path) -> Result<(), IoError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(garment.panels.len() as u32).to_le_bytes());
    for panel in &garment.panels {
        let img = &panel.image;
        buf.extend_from_slice(&(img.height as u32).to_le_bytes());
        buf.extend_from_slice(&(img.width as u32).to_le_bytes());
        for v in panel.frame.to_array() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let label = panel.label.as_deref().unwrap_or("");
        if label.len() > u16::MAX as usize {
            return Err(IoError::Validation {
                detail: format!("panel label is {} bytes, limit {}", label.len(), u16::MAX),
            });
        }
        buf.extend_from_slice(&(label.len() as u16).to_le_bytes());
        buf.extend_from_slice(label.as_bytes());
        if img.data.len() != img.height * img.width * 4 {
            return Err(IoError::Validation {
                detail: format!(
                    "panel image buffer has {} samples, expected {}",
                    img.data.len(),
                    img.height * img.width * 4
                ),
            });
        }
        for v in &img.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IoError> {
        if self.pos + n > self.data.len() {
            return Err(IoError::TruncatedFile {
                expected: self.pos + n,
                found: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u16(&mut self) -> Result<u16, IoError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, IoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32, IoError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_gmg(path: &Path) -> Result<Garmage, IoError> {
    let data = std::fs::read(path)?;
    let mut cur = Cursor {
        data: &data,
        pos: 0,
    };

    let magic: [u8; 4] = cur.take(4)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(IoError::BadMagic { found: magic });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(IoError::VersionUnsupported { found: version });
    }
    let count = cur.u32()? as usize;

    let mut panels = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let height = cur.u32()? as usize;
        let width = cur.u32()? as usize;
        let mut frame = [0.0f32; 8];
        for v in frame.iter_mut() {
            *v = cur.f32()?;
        }
        let label_len = cur.u16()? as usize;
        let label_bytes = cur.take(label_len)?;
        let label = if label_len == 0 {
            None
        } else {
            Some(
                std::str::from_utf8(label_bytes)
                    .map_err(|e| IoError::Validation {
                        detail: format!("panel label is not UTF-8: {e}"),
                    })?
                    .to_string(),
            )
        };
        let samples = height
            .checked_mul(width)
            .and_then(|p| p.checked_mul(4))
            .ok_or(IoError::Validation {
                detail: "panel dimensions overflow".to_string(),
            })?;
        let bytes = cur.take(samples * 4)?;
        let data: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        panels.push(GarmagePanel {
            image: GeometryImage {
                height,
                width,
                data,
            },
            frame: PanelFrame::from_array(frame),
            label,
        });
    }
    Ok(Garmage { panels })
}
