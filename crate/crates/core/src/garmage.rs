//! Geometry-image garment representation.
//!
//! Each panel is stored as an H x W x 4 float raster: channels 0-2 hold the
//! 3D position normalized by the panel's bounding box into `[-1, 1]`,
//! channel 3 is a binary alpha indicating pixels covered by the panel in UV
//! space. The accompanying frame holds exactly eight numbers — 3D center,
//! 3D half-extent scale, and the 2D UV bounding-box extents — which is all
//! that is needed to denormalize positions and reconstruct panel-local UVs.

use serde::{Deserialize, Serialize};

/// H x W x 4 raster of 32-bit floats, channel-interleaved, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryImage {
    pub height: usize,
    pub width: usize,
    /// Length `height * width * 4`; channels 0-2 = normalized position,
    /// channel 3 = alpha in {0.0, 1.0}.
    pub data: Vec<f32>,
}

impl GeometryImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        GeometryImage {
            height,
            width,
            data: vec![0.0; height * width * 4],
        }
    }

    #[inline]
    pub fn idx(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * 4 + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[self.idx(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        let i = self.idx(y, x, c);
        self.data[i] = v;
    }

    #[inline]
    pub fn alpha(&self, y: usize, x: usize) -> bool {
        self.get(y, x, 3) >= 0.5
    }

    pub fn alpha_pixel_count(&self) -> usize {
        let mut n = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.alpha(y, x) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Per-panel frame: exactly eight numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelFrame {
    /// 3D bounding-box center, meters.
    pub center_geo: [f32; 3],
    /// 3D bounding-box half-extents, meters (each component > 0).
    pub scale_geo: [f32; 3],
    /// UV bounding-box extents, meters (each component > 0).
    pub scale_uv: [f32; 2],
}

impl PanelFrame {
    /// Flattens the frame to its canonical 8-number form.
    pub fn to_array(&self) -> [f32; 8] {
        [
            self.center_geo[0],
            self.center_geo[1],
            self.center_geo[2],
            self.scale_geo[0],
            self.scale_geo[1],
            self.scale_geo[2],
            self.scale_uv[0],
            self.scale_uv[1],
        ]
    }

    pub fn from_array(a: [f32; 8]) -> Self {
        PanelFrame {
            center_geo: [a[0], a[1], a[2]],
            scale_geo: [a[3], a[4], a[5]],
            scale_uv: [a[6], a[7]],
        }
    }
}

/// One panel: raster + frame + optional label.
#[derive(Debug, Clone, PartialEq)]
pub struct GarmagePanel {
    pub image: GeometryImage,
    pub frame: PanelFrame,
    pub label: Option<String>,
}

/// Ordered set of panels; panel index is the panel id.
#[derive(Debug, Clone, PartialEq)]
pub struct Garmage {
    pub panels: Vec<GarmagePanel>,
}

impl Garmage {
    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Stacks all frames into an N x 8 matrix (row per panel).
    pub fn frame_matrix(&self) -> Vec<[f32; 8]> {
        self.panels.iter().map(|p| p.frame.to_array()).collect()
    }
}

/// Affine map between panel-local UV (meters) and continuous pixel
/// coordinates, shared by the encoder, decoder, and contour resampler.
///
/// The map is corner-anchored and aspect-preserving: the UV bounding box of
/// extents `scale_uv` is scaled uniformly so that its longer axis spans the
/// pixel **centers** `margin + 0.5 .. (W-1-margin) + 0.5`, and the bounding
/// box minimum of *both* axes sits exactly on the center of pixel `margin`.
/// Anchoring the minimum edges on pixel centers puts rasterized pixels (and
/// therefore decoded vertices) exactly on those panel edges, which keeps
/// seams between adjacent panels tight after decoding.
///
/// Pixel `x` covers the continuous span `[x, x+1)`; its center is `x + 0.5`.
/// UV v grows with the pixel row index (row 0 is the bottom of the panel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelMapping {
    /// Pixels per UV meter (same for both axes).
    pub px_per_m: f64,
    /// UV extents being mapped.
    pub extent: [f64; 2],
    pub width: usize,
    pub height: usize,
    /// Empty border, pixels.
    pub margin_px: usize,
}

impl PanelMapping {
    /// Builds the map for a panel of UV extents `extent` rasterized into a
    /// `width` x `height` image with `margin_px` empty border pixels.
    pub fn new(extent: [f64; 2], width: usize, height: usize, margin_px: usize) -> Self {
        let usable_x = (width as f64) - 1.0 - 2.0 * margin_px as f64;
        let usable_y = (height as f64) - 1.0 - 2.0 * margin_px as f64;
        let sx = usable_x / extent[0].max(1e-12);
        let sy = usable_y / extent[1].max(1e-12);
        PanelMapping {
            px_per_m: sx.min(sy),
            extent,
            width,
            height,
            margin_px,
        }
    }

    pub fn from_frame(frame: &PanelFrame, width: usize, height: usize, margin_px: usize) -> Self {
        Self::new(
            [frame.scale_uv[0] as f64, frame.scale_uv[1] as f64],
            width,
            height,
            margin_px,
        )
    }

    /// UV pitch of one pixel, meters.
    #[inline]
    pub fn pitch(&self) -> f64 {
        1.0 / self.px_per_m
    }

    /// Panel-local UV (origin at the UV bounding-box minimum) to continuous
    /// pixel coordinates.
    #[inline]
    pub fn uv_to_px(&self, uv: [f64; 2]) -> [f64; 2] {
        let anchor = self.margin_px as f64 + 0.5;
        [
            anchor + uv[0] * self.px_per_m,
            anchor + uv[1] * self.px_per_m,
        ]
    }

    /// Continuous pixel coordinates to panel-local UV.
    #[inline]
    pub fn px_to_uv(&self, px: [f64; 2]) -> [f64; 2] {
        let anchor = self.margin_px as f64 + 0.5;
        [
            (px[0] - anchor) / self.px_per_m,
            (px[1] - anchor) / self.px_per_m,
        ]
    }
}
