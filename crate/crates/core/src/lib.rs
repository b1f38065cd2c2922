//! Garment representation toolkit.
//!
//! A garment is modeled two ways and this crate converts between them:
//!
//! * a **garment mesh** — triangle panels with per-vertex 3D position and
//!   2D pattern-space UV, plus explicit stitched vertex pairs;
//! * a **garmage** — an ordered set of per-panel *geometry images*
//!   (H x W x 4 float rasters holding normalized 3D position + alpha)
//!   together with an 8-number frame per panel (3D center, 3D scale,
//!   2D UV scale).
//!
//! On top of the codec the crate provides the full assembly pipeline:
//! boundary contour extraction and arc-length resampling, point-level
//! seam matching (heuristic classifier, affinity matrix, Sinkhorn
//! normalization, Hungarian assignment), pattern vectorization into
//! segment loops with segment-level stitches, and a constraint-based
//! seam relaxation that closes stitched gaps. File formats (OBJ with a
//! stitch sidecar, a binary garmage container, pattern JSON) and a
//! synthetic garment generator used as a test oracle round it out.

pub mod assembler;
pub mod boundary;
pub mod codec;
pub mod contour;
pub mod garmage;
pub mod geom;
pub mod io;
pub mod matcher;
pub mod mesh;
pub mod pattern;
pub mod synth;
pub mod validate;
pub mod vectorizer;

pub use boundary::{BoundaryPoint, BoundaryPointSet};
pub use codec::{decode_garment, decode_panel, encode_garment, encode_panel, CodecConfig};
pub use garmage::{Garmage, GarmagePanel, GeometryImage, PanelFrame};
pub use mesh::{GarmentMesh, MeshVertex};
pub use pattern::{PatternSegment, SegmentStitch, SewingPatternDoc, StitchSideRef, VectorPanel};
