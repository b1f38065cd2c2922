//! Synthetic garments with exact seam ground truth, used as test oracles
//! and demo inputs.
//!
//! Every template builds per-panel vertex grids on an analytic surface,
//! flattens them isometrically (cylinders unroll to rectangles, cones to
//! annulus sectors), shifts each panel's UV so its minimum is zero, and
//! records each seam as a pair of corresponding panel-local UV polylines
//! (equal polyline parameters mean the same material point). Optional
//! noise adds per-vertex UV jitter and a per-panel rigid 3D motion; the
//! motions are returned so tests can undo or inspect them.

use crate::boundary::BoundaryPointSet;
use crate::garmage::PanelMapping;
use crate::geom::{self, RigidTransform};
use crate::matcher::PointMatch;
use crate::mesh::{GarmentMesh, MeshVertex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct NoiseParams {
    /// Standard deviation of per-vertex UV jitter, in pixels of a
    /// 256-resolution encoding of the panel (converted to meters via the
    /// panel's larger UV extent).
    pub sigma_uv_px: f64,
    /// Scale of the per-panel rigid 3D perturbation, meters. Translations
    /// use 0.4 of it per axis; the rotation angle uses 0.3 of it divided
    /// by the panel's bounding-box diagonal.
    pub sigma_3d: f64,
}

/// The available garment templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    TubeSkirt,
    TwoPanelSleeve,
    FourPanelSkirt,
}

impl Template {
    pub const ALL: [Template; 3] = [
        Template::TubeSkirt,
        Template::TwoPanelSleeve,
        Template::FourPanelSkirt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::TubeSkirt => "tube_skirt",
            Template::TwoPanelSleeve => "two_panel_sleeve",
            Template::FourPanelSkirt => "four_panel_skirt",
        }
    }
}

/// Parameters shared by all templates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateParams {
    /// Base radius, meters.
    pub radius: f64,
    /// Height, meters.
    pub height: f64,
    /// Vertex rows per panel; columns follow the panel's aspect ratio.
    pub density: usize,
    pub noise: NoiseParams,
    pub seed: u64,
    /// Rigid gap opened along every seam (two-panel sleeve only).
    pub separation: f64,
}

impl Default for TemplateParams {
    fn default() -> Self {
        TemplateParams {
            radius: 0.3,
            height: 1.0,
            density: 32,
            noise: NoiseParams::default(),
            seed: 0,
            separation: 0.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("bad template parameters: {0}")]
    BadParams(String),
}

/// One seam: corresponding UV polylines on two panels. Polyline parameters
/// correspond one-to-one (t on `uv_a` touches t on `uv_b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeamSpec {
    pub panel_a: u32,
    pub panel_b: u32,
    pub uv_a: Vec<[f64; 2]>,
    pub uv_b: Vec<[f64; 2]>,
    /// Exact ground-truth vertex pairs (global mesh indices), one per grid
    /// row along the seam, sides aligned at equal arc parameters.
    pub verts: Vec<[u32; 2]>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub mesh: GarmentMesh,
    pub seams: Vec<SeamSpec>,
    /// Rigid motion applied to each panel (identity without 3D noise).
    pub transforms: Vec<RigidTransform>,
}

/// Grid of one panel: `nu` columns by `nv` rows.
struct PanelGrid {
    nu: usize,
    nv: usize,
    positions: Vec<[f64; 3]>,
    uvs: Vec<[f64; 2]>,
}

impl PanelGrid {
    fn build(
        nu: usize,
        nv: usize,
        f: impl Fn(usize, usize) -> ([f64; 3], [f64; 2]),
    ) -> PanelGrid {
        let mut positions = Vec::with_capacity(nu * nv);
        let mut uvs = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in 0..nu {
                let (p, uv) = f(i, j);
                positions.push(p);
                uvs.push(uv);
            }
        }
        let mut g = PanelGrid {
            nu,
            nv,
            positions,
            uvs,
        };
        g.shift_uv_min_to_zero();
        g
    }

    fn shift_uv_min_to_zero(&mut self) {
        let mut min = [f64::INFINITY; 2];
        for uv in &self.uvs {
            min[0] = min[0].min(uv[0]);
            min[1] = min[1].min(uv[1]);
        }
        for uv in self.uvs.iter_mut() {
            uv[0] -= min[0];
            uv[1] -= min[1];
        }
    }

    fn uv_extent(&self) -> [f64; 2] {
        let mut max = [0.0f64; 2];
        for uv in &self.uvs {
            max[0] = max[0].max(uv[0]);
            max[1] = max[1].max(uv[1]);
        }
        max
    }

    fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for p in &self.positions {
            c = geom::add3(c, *p);
        }
        geom::scale3(c, 1.0 / self.positions.len() as f64)
    }

    fn bbox_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        geom::dist3(lo, hi)
    }
}

/// Applies noise and assembles panels into one mesh. `seam_cols[k]` gives
/// the grid column index of seam `k` on each side; the seam runs over all
/// grid rows of that column, row j on side a pairing with row j on side b.
fn assemble(
    grids: Vec<PanelGrid>,
    mut seams: Vec<SeamSpec>,
    seam_cols: Vec<[usize; 2]>,
    noise: &NoiseParams,
    seed: u64,
) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut transforms = Vec::new();
    let mut bases = Vec::new();
    let mut shapes = Vec::new();

    for (panel_id, mut grid) in grids.into_iter().enumerate() {
        if noise.sigma_uv_px > 0.0 {
            let ext = grid.uv_extent();
            let sigma = noise.sigma_uv_px * ext[0].max(ext[1]) / 251.0;
            let dist = Normal::new(0.0, sigma).unwrap();
            for uv in grid.uvs.iter_mut() {
                uv[0] += dist.sample(&mut rng);
                uv[1] += dist.sample(&mut rng);
            }
        }
        let transform = if noise.sigma_3d > 0.0 {
            let t_dist = Normal::new(0.0, 0.4 * noise.sigma_3d).unwrap();
            let t = [
                t_dist.sample(&mut rng),
                t_dist.sample(&mut rng),
                t_dist.sample(&mut rng),
            ];
            let axis: [f64; 3] = UnitSphere.sample(&mut rng);
            let diag = grid.bbox_diagonal().max(1e-9);
            let a_dist = Normal::new(0.0, 0.3 * noise.sigma_3d / diag).unwrap();
            let angle = a_dist.sample(&mut rng);
            let c = grid.centroid();
            // Rotate about the panel centroid, then translate.
            let rot = RigidTransform::from_axis_angle(axis, angle, [0.0; 3]);
            let full_t = geom::add3(geom::sub3(c, rot.apply(c)), t);
            RigidTransform {
                rotation: rot.rotation,
                translation: full_t,
            }
        } else {
            RigidTransform::identity()
        };
        for p in grid.positions.iter_mut() {
            *p = transform.apply(*p);
        }
        transforms.push(transform);

        let base = vertices.len() as u32;
        bases.push(base);
        shapes.push((grid.nu as u32, grid.nv as u32));
        for (p, uv) in grid.positions.iter().zip(&grid.uvs) {
            vertices.push(MeshVertex {
                position: *p,
                uv: *uv,
                panel_id: panel_id as u32,
            });
        }
        let nu = grid.nu as u32;
        for j in 0..grid.nv as u32 - 1 {
            for i in 0..nu - 1 {
                let p = base + j * nu + i;
                faces.push([p, p + 1, p + nu]);
                faces.push([p + 1, p + nu + 1, p + nu]);
            }
        }
    }

    for (seam, cols) in seams.iter_mut().zip(&seam_cols) {
        let (nu_a, nv_a) = shapes[seam.panel_a as usize];
        let (nu_b, nv_b) = shapes[seam.panel_b as usize];
        debug_assert_eq!(nv_a, nv_b);
        seam.verts = (0..nv_a)
            .map(|j| {
                [
                    bases[seam.panel_a as usize] + j * nu_a + cols[0] as u32,
                    bases[seam.panel_b as usize] + j * nu_b + cols[1] as u32,
                ]
            })
            .collect();
    }

    SynthOutput {
        mesh: GarmentMesh::new(vertices, faces, Vec::new()),
        seams,
        transforms,
    }
}

fn column_count(density: usize, width: f64, height: f64) -> usize {
    ((density as f64 * width / height).round() as usize).max(2)
}

/// Validates parameters and builds the requested template.
pub fn generate(template: Template, params: &TemplateParams) -> Result<SynthOutput, SynthError> {
    if params.density < 4 {
        return Err(SynthError::BadParams(format!(
            "density {} is below the minimum of 4",
            params.density
        )));
    }
    if !(params.radius > 0.0) || !(params.height > 0.0) {
        return Err(SynthError::BadParams(format!(
            "radius {} and height {} must be positive",
            params.radius, params.height
        )));
    }
    if params.separation < 0.0 {
        return Err(SynthError::BadParams(format!(
            "separation {} must be non-negative",
            params.separation
        )));
    }
    if params.noise.sigma_uv_px < 0.0 || params.noise.sigma_3d < 0.0 {
        return Err(SynthError::BadParams(
            "noise deviations must be non-negative".into(),
        ));
    }
    let (r, h, d, n, s) = (
        params.radius,
        params.height,
        params.density,
        &params.noise,
        params.seed,
    );
    Ok(match template {
        Template::TubeSkirt => tube_skirt(r, h, d, n, s),
        Template::TwoPanelSleeve => two_panel_sleeve(r, h, d, n, s, params.separation),
        Template::FourPanelSkirt => four_panel_skirt(r, h, d, n, s),
    })
}

/// A skirt of two half-cylinder panels with two vertical seams at angles
/// 0 and pi. `density` is the number of vertex rows per panel.
pub fn tube_skirt(
    r: f64,
    h: f64,
    density: usize,
    noise: &NoiseParams,
    seed: u64,
) -> SynthOutput {
    let nv = density.max(2);
    let nu = column_count(density, PI * r, h);
    let half = |phi0: f64| {
        PanelGrid::build(nu, nv, move |i, j| {
            let phi = phi0 + i as f64 / (nu - 1) as f64 * PI;
            let z = j as f64 / (nv - 1) as f64 * h;
            (
                [r * phi.cos(), r * phi.sin(), z],
                [r * (phi - phi0), z],
            )
        })
    };
    let grids = vec![half(0.0), half(PI)];
    let w = PI * r;
    let seams = vec![
        // phi = 0: front column u=0 touches back column u=w.
        SeamSpec {
            panel_a: 0,
            panel_b: 1,
            uv_a: vec![[0.0, 0.0], [0.0, h]],
            uv_b: vec![[w, 0.0], [w, h]],
            verts: Vec::new(),
        },
        // phi = pi: front column u=w touches back column u=0.
        SeamSpec {
            panel_a: 0,
            panel_b: 1,
            uv_a: vec![[w, 0.0], [w, h]],
            uv_b: vec![[0.0, 0.0], [0.0, h]],
            verts: Vec::new(),
        },
    ];
    assemble(grids, seams, vec![[0, nu - 1], [nu - 1, 0]], noise, seed)
}

/// A tapered sleeve of two half-cone panels (base radius `r`, top radius
/// `r/2`, height `h`) unrolled isometrically into annulus sectors.
/// `separation` translates the second panel away from the first along -y,
/// opening both seams by exactly that distance.
pub fn two_panel_sleeve(
    r: f64,
    h: f64,
    density: usize,
    noise: &NoiseParams,
    seed: u64,
    separation: f64,
) -> SynthOutput {
    let (r0, r1) = (r, r / 2.0);
    let tan_a = (r0 - r1) / h;
    let sin_a = tan_a / (1.0 + tan_a * tan_a).sqrt();
    let rho = |z: f64| (r0 - tan_a * z) / sin_a;
    let nv = density.max(2);
    let nu = column_count(density, PI * 0.5 * (r0 + r1), h);

    let half = |phi0: f64, shift: [f64; 3]| {
        PanelGrid::build(nu, nv, move |i, j| {
            let phi = i as f64 / (nu - 1) as f64 * PI;
            let z = j as f64 / (nv - 1) as f64 * h;
            let r = r0 - tan_a * z;
            let psi = phi * sin_a;
            let p = [
                r * (phi0 + phi).cos() + shift[0],
                r * (phi0 + phi).sin() + shift[1],
                z + shift[2],
            ];
            // Unrolled cone: radial coordinate rho, angle psi; oriented so
            // height grows with z at psi = 0.
            let uv = [rho(z) * psi.sin(), -rho(z) * psi.cos()];
            (p, uv)
        })
    };
    let grids = vec![
        half(0.0, [0.0; 3]),
        half(PI, [0.0, -separation, 0.0]),
    ];

    // Seam polylines: radial sector edges, straight in UV. Recompute the
    // panel-local shift the grids applied (identical for both halves).
    let uv_raw = |phi: f64, z: f64| [rho(z) * (phi * sin_a).sin(), -rho(z) * (phi * sin_a).cos()];
    let corners = [uv_raw(0.0, 0.0), uv_raw(0.0, h), uv_raw(PI, 0.0), uv_raw(PI, h)];
    let mut min = [f64::INFINITY; 2];
    for c in &corners {
        min[0] = min[0].min(c[0]);
        min[1] = min[1].min(c[1]);
    }
    let local = |phi: f64, z: f64| {
        let uv = uv_raw(phi, z);
        [uv[0] - min[0], uv[1] - min[1]]
    };
    let seams = vec![
        SeamSpec {
            panel_a: 0,
            panel_b: 1,
            uv_a: vec![local(0.0, 0.0), local(0.0, h)],
            uv_b: vec![local(PI, 0.0), local(PI, h)],
            verts: Vec::new(),
        },
        SeamSpec {
            panel_a: 0,
            panel_b: 1,
            uv_a: vec![local(PI, 0.0), local(PI, h)],
            uv_b: vec![local(0.0, 0.0), local(0.0, h)],
            verts: Vec::new(),
        },
    ];
    assemble(grids, seams, vec![[0, nu - 1], [nu - 1, 0]], noise, seed)
}

/// A skirt of four quarter-cylinder panels (radius 0.3 m, height 0.75 m)
/// with four vertical seams.
pub fn four_panel_skirt(
    r: f64,
    h: f64,
    density: usize,
    noise: &NoiseParams,
    seed: u64,
) -> SynthOutput {
    let nv = density.max(2);
    let nu = column_count(density, PI * r / 2.0, h);
    let quarter = |phi0: f64| {
        PanelGrid::build(nu, nv, move |i, j| {
            let phi = phi0 + i as f64 / (nu - 1) as f64 * PI / 2.0;
            let z = j as f64 / (nv - 1) as f64 * h;
            (
                [r * phi.cos(), r * phi.sin(), z],
                [r * (phi - phi0), z],
            )
        })
    };
    let grids = (0..4).map(|k| quarter(k as f64 * PI / 2.0)).collect();
    let w = PI * r / 2.0;
    let seams = (0..4u32)
        .map(|k| SeamSpec {
            panel_a: k,
            panel_b: (k + 1) % 4,
            uv_a: vec![[w, 0.0], [w, h]],
            uv_b: vec![[0.0, 0.0], [0.0, h]],
            verts: Vec::new(),
        })
        .collect();
    assemble(grids, seams, vec![[nu - 1, 0]; 4], noise, seed)
}

/// Projects a point onto a polyline: returns (distance, arc-length
/// parameter in [0, 1]).
fn project_polyline(p: [f64; 2], poly: &[[f64; 2]]) -> (f64, f64) {
    if poly.len() < 2 {
        return (f64::INFINITY, 0.0);
    }
    let mut cum = vec![0.0f64];
    for w in poly.windows(2) {
        cum.push(cum.last().unwrap() + geom::dist2(w[0], w[1]));
    }
    let total = *cum.last().unwrap();
    let mut best = (f64::INFINITY, 0.0);
    for (k, w) in poly.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let ab = geom::sub2(b, a);
        let len2 = geom::dot2(ab, ab);
        let t = if len2 > 1e-30 {
            (geom::dot2(geom::sub2(p, a), ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = geom::lerp2(a, b, t);
        let d = geom::dist2(p, q);
        if d < best.0 {
            let s = cum[k] + t * (cum[k + 1] - cum[k]);
            best = (d, if total > 1e-30 { s / total } else { 0.0 });
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MatchEval {
    /// Boundary points lying on any seam side.
    pub gt_points: usize,
    pub predicted_pairs: usize,
    pub correct_pairs: usize,
    /// correct / predicted (1 when nothing was predicted).
    pub precision: f64,
    /// GT points covered by a correct pair / all GT points.
    pub recall: f64,
    /// Mean pixel distance between each predicted partner and the exact
    /// partner location mapped through the partner panel's pixel mapping,
    /// over correct pairs (both directions).
    pub mean_px_dist: f64,
}

/// Scores predicted point matches against seam ground truth.
///
/// A boundary point belongs to a seam side when its UV distance to the
/// side's polyline is at most 0.6 of its panel's mean point spacing. A
/// predicted pair is correct when its endpoints lie on the two sides of
/// one seam with polyline parameters within 1.05 of the ground-truth
/// parameter spacing: the two sides are resampled independently, so even
/// the geometrically ideal pairing carries up to half a sample step of
/// parameter quantization per side.
pub fn evaluate_matches(
    points: &BoundaryPointSet,
    pairs: &[PointMatch],
    seams: &[SeamSpec],
    mappings: &[PanelMapping],
) -> MatchEval {
    let n_panels = points.panel_counts.len();
    let mut mean_spacing = vec![0.0f64; n_panels];
    for pid in 0..n_panels {
        let pts = points.panel_points(pid as u32);
        if pts.is_empty() {
            continue;
        }
        let mut total = 0.0;
        for (k, p) in pts.iter().enumerate() {
            total += geom::dist2(p.uv, pts[(k + 1) % pts.len()].uv);
        }
        mean_spacing[pid] = total / pts.len() as f64;
    }

    // Per seam and side: point id -> polyline parameter.
    struct SeamHits {
        a: std::collections::BTreeMap<usize, f64>,
        b: std::collections::BTreeMap<usize, f64>,
        t_tol: f64,
    }
    let mut hits: Vec<SeamHits> = Vec::with_capacity(seams.len());
    for seam in seams {
        let collect = |panel: u32, poly: &[[f64; 2]]| {
            let tol = 0.6 * mean_spacing[panel as usize];
            let mut m = std::collections::BTreeMap::new();
            for p in points.panel_points(panel) {
                let (d, t) = project_polyline(p.uv, poly);
                if d <= tol {
                    m.insert(p.id, t);
                }
            }
            m
        };
        let a = collect(seam.panel_a, &seam.uv_a);
        let b = collect(seam.panel_b, &seam.uv_b);
        let spacing = |m: &std::collections::BTreeMap<usize, f64>| {
            let mut ts: Vec<f64> = m.values().copied().collect();
            ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if ts.len() < 2 {
                return 1.0;
            }
            let mut gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.sort_by(|x, y| x.partial_cmp(y).unwrap());
            gaps[gaps.len() / 2]
        };
        let t_tol = 1.05 * spacing(&a).max(spacing(&b));
        hits.push(SeamHits { a, b, t_tol });
    }

    let mut gt: std::collections::BTreeSet<usize> = Default::default();
    for h in &hits {
        gt.extend(h.a.keys());
        gt.extend(h.b.keys());
    }

    let mut correct = 0usize;
    let mut covered: std::collections::BTreeSet<usize> = Default::default();
    let mut px_sum = 0.0f64;
    let mut px_n = 0usize;
    for m in pairs {
        let mut ok = false;
        for (seam, h) in seams.iter().zip(&hits) {
            // Try (a on side a, b on side b) and the swapped assignment.
            for (pa, pb) in [(m.a, m.b), (m.b, m.a)] {
                let (Some(&ta), Some(&tb)) = (h.a.get(&pa), h.b.get(&pb)) else {
                    continue;
                };
                if (ta - tb).abs() <= h.t_tol {
                    ok = true;
                    // Pixel error of each predicted partner against the
                    // exact corresponding location on the partner's panel,
                    // both directions.
                    let gt_b = polyline_at(&seam.uv_b, ta);
                    px_sum += geom::dist2(
                        points.points[pb].px,
                        mappings[seam.panel_b as usize].uv_to_px(gt_b),
                    );
                    let gt_a = polyline_at(&seam.uv_a, tb);
                    px_sum += geom::dist2(
                        points.points[pa].px,
                        mappings[seam.panel_a as usize].uv_to_px(gt_a),
                    );
                    px_n += 2;
                    break;
                }
            }
            if ok {
                break;
            }
        }
        if ok {
            correct += 1;
            covered.insert(m.a);
            covered.insert(m.b);
        }
    }

    let gt_covered = gt.intersection(&covered).count();
    MatchEval {
        gt_points: gt.len(),
        predicted_pairs: pairs.len(),
        correct_pairs: correct,
        precision: if pairs.is_empty() {
            1.0
        } else {
            correct as f64 / pairs.len() as f64
        },
        recall: if gt.is_empty() {
            1.0
        } else {
            gt_covered as f64 / gt.len() as f64
        },
        mean_px_dist: if px_n == 0 {
            0.0
        } else {
            px_sum / px_n as f64
        },
    }
}

/// Point on a polyline at arc-length parameter t in [0, 1].
fn polyline_at(poly: &[[f64; 2]], t: f64) -> [f64; 2] {
    if poly.len() < 2 {
        return poly.first().copied().unwrap_or([0.0, 0.0]);
    }
    let mut cum = vec![0.0f64];
    for w in poly.windows(2) {
        cum.push(cum.last().unwrap() + geom::dist2(w[0], w[1]));
    }
    let total = *cum.last().unwrap();
    let s = t.clamp(0.0, 1.0) * total;
    for (k, w) in poly.windows(2).enumerate() {
        if s <= cum[k + 1] || k == poly.len() - 2 {
            let seg = cum[k + 1] - cum[k];
            let f = if seg > 1e-30 { (s - cum[k]) / seg } else { 0.0 };
            return geom::lerp2(w[0], w[1], f.clamp(0.0, 1.0));
        }
    }
    *poly.last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryPoint;

    #[test]
    fn tube_skirt_grid_shape_and_uv_origin() {
        let out = tube_skirt(0.3, 1.0, 8, &NoiseParams::default(), 0);
        let nv = 8;
        let nu = column_count(8, PI * 0.3, 1.0);
        assert_eq!(out.mesh.vertices.len(), 2 * nu * nv);
        assert_eq!(out.mesh.faces.len(), 2 * 2 * (nu - 1) * (nv - 1));
        assert!(out.mesh.panels_contiguous());
        assert_eq!(out.seams.len(), 2);
        for pid in 0..2u32 {
            let vs: Vec<&MeshVertex> = out
                .mesh
                .vertices
                .iter()
                .filter(|v| v.panel_id == pid)
                .collect();
            let min_u = vs.iter().map(|v| v.uv[0]).fold(f64::INFINITY, f64::min);
            let min_v = vs.iter().map(|v| v.uv[1]).fold(f64::INFINITY, f64::min);
            assert!(min_u.abs() < 1e-12 && min_v.abs() < 1e-12);
            for v in &vs {
                let rad = (v.position[0].powi(2) + v.position[1].powi(2)).sqrt();
                assert!((rad - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tube_seams_touch_in_3d() {
        let out = tube_skirt(0.3, 1.0, 8, &NoiseParams::default(), 0);
        for seam in &out.seams {
            for t in [0.0, 0.5, 1.0] {
                let ua = polyline_at(&seam.uv_a, t);
                let ub = polyline_at(&seam.uv_b, t);
                let find = |panel: u32, uv: [f64; 2]| {
                    out.mesh
                        .vertices
                        .iter()
                        .filter(|v| v.panel_id == panel)
                        .min_by(|x, y| {
                            geom::dist2(x.uv, uv)
                                .partial_cmp(&geom::dist2(y.uv, uv))
                                .unwrap()
                        })
                        .unwrap()
                };
                let va = find(seam.panel_a, ua);
                let vb = find(seam.panel_b, ub);
                assert!(
                    geom::dist3(va.position, vb.position) < 1e-9,
                    "seam corresponding points must coincide"
                );
            }
            // The explicit vertex pairs carry the same guarantee: one pair
            // per grid row, distinct panels, coincident at zero noise.
            assert_eq!(seam.verts.len(), 8);
            for &[ia, ib] in &seam.verts {
                let (va, vb) = (
                    &out.mesh.vertices[ia as usize],
                    &out.mesh.vertices[ib as usize],
                );
                assert_eq!(va.panel_id, seam.panel_a);
                assert_eq!(vb.panel_id, seam.panel_b);
                assert!(geom::dist3(va.position, vb.position) < 1e-9);
            }
        }
    }

    #[test]
    fn sleeve_unroll_is_isometric() {
        let out = two_panel_sleeve(0.2, 0.6, 16, &NoiseParams::default(), 0, 0.0);
        // Every mesh edge's UV length matches its 3D length closely
        // (radial edges exactly, arc chords within the chord/arc error).
        let mut worst: f64 = 0.0;
        for f in &out.mesh.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let va = &out.mesh.vertices[a as usize];
                let vb = &out.mesh.vertices[b as usize];
                let d3 = geom::dist3(va.position, vb.position);
                let d2 = geom::dist2(va.uv, vb.uv);
                worst = worst.max((d3 - d2).abs() / d3.max(1e-12));
            }
        }
        assert!(worst < 0.02, "unroll distortion {worst}");
    }

    #[test]
    fn sleeve_separation_opens_both_seams() {
        let sep = 0.05;
        let out = two_panel_sleeve(0.2, 0.6, 8, &NoiseParams::default(), 0, sep);
        for seam in &out.seams {
            for t in [0.0, 1.0] {
                let ua = polyline_at(&seam.uv_a, t);
                let ub = polyline_at(&seam.uv_b, t);
                let find = |panel: u32, uv: [f64; 2]| {
                    out.mesh
                        .vertices
                        .iter()
                        .filter(|v| v.panel_id == panel)
                        .min_by(|x, y| {
                            geom::dist2(x.uv, uv)
                                .partial_cmp(&geom::dist2(y.uv, uv))
                                .unwrap()
                        })
                        .unwrap()
                };
                let va = find(seam.panel_a, ua);
                let vb = find(seam.panel_b, ub);
                let gap = geom::dist3(va.position, vb.position);
                assert!((gap - sep).abs() < 1e-9, "gap {gap} vs separation {sep}");
            }
            for &[ia, ib] in &seam.verts {
                let gap = geom::dist3(
                    out.mesh.vertices[ia as usize].position,
                    out.mesh.vertices[ib as usize].position,
                );
                assert!((gap - sep).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn four_panel_skirt_shape() {
        let out = four_panel_skirt(0.3, 1.0, 8, &NoiseParams::default(), 0);
        assert_eq!(out.seams.len(), 4);
        assert_eq!(out.mesh.panel_ids(), vec![0, 1, 2, 3]);
        let w = PI * 0.3 / 2.0;
        for v in &out.mesh.vertices {
            assert!(v.uv[0] <= w + 1e-12 && v.uv[1] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn noise_is_seeded_and_recorded() {
        let noise = NoiseParams {
            sigma_uv_px: 1.0,
            sigma_3d: 0.005,
        };
        let a = tube_skirt(0.3, 1.0, 8, &noise, 42);
        let b = tube_skirt(0.3, 1.0, 8, &noise, 42);
        let c = tube_skirt(0.3, 1.0, 8, &noise, 43);
        assert_eq!(a.mesh.vertices, b.mesh.vertices);
        assert_ne!(a.mesh.vertices, c.mesh.vertices);
        assert_ne!(a.transforms[0], RigidTransform::identity());
        let clean = tube_skirt(0.3, 1.0, 8, &NoiseParams::default(), 42);
        assert_eq!(clean.transforms[0], RigidTransform::identity());
        // 3D noise is rigid: distances between vertices of one panel are
        // preserved relative to the clean build with the same UV noise.
        let uv_only = NoiseParams {
            sigma_uv_px: 1.0,
            sigma_3d: 0.0,
        };
        let d = tube_skirt(0.3, 1.0, 8, &uv_only, 42);
        let (p0, p1) = (a.mesh.vertices[0].position, a.mesh.vertices[5].position);
        let (q0, q1) = (d.mesh.vertices[0].position, d.mesh.vertices[5].position);
        assert!((geom::dist3(p0, p1) - geom::dist3(q0, q1)).abs() < 1e-9);
    }

    fn seam_eval_fixture() -> (BoundaryPointSet, Vec<SeamSpec>, Vec<PanelMapping>) {
        // Two square panels joined along one seam: panel 0's right edge
        // (u = 1) against panel 1's left edge (u = 0), same heights.
        let n_side = 11;
        let mapping = PanelMapping::new([1.0, 1.0], 256, 256, 2);
        let mut points = Vec::new();
        let mut make_panel = |panel_id: u32, edge_u: f64, start: usize| {
            for k in 0..n_side {
                let v = k as f64 / (n_side - 1) as f64;
                points.push(BoundaryPoint {
                    id: start + k,
                    panel_id,
                    loop_arc_index: k as u32,
                    pos3: [edge_u, v, 0.0],
                    uv: [edge_u, v],
                    px: mapping.uv_to_px([edge_u, v]),
                    tangent3: [0.0, 1.0, 0.0],
                    tangent_uv: [0.0, 1.0],
                    arc_param: k as f64 / n_side as f64,
                });
            }
        };
        make_panel(0, 1.0, 0);
        make_panel(1, 0.0, n_side);
        let set = BoundaryPointSet {
            points,
            panel_counts: vec![n_side, n_side],
        };
        let seams = vec![SeamSpec {
            panel_a: 0,
            panel_b: 1,
            uv_a: vec![[1.0, 0.0], [1.0, 1.0]],
            uv_b: vec![[0.0, 0.0], [0.0, 1.0]],
            verts: Vec::new(),
        }];
        (set, seams, vec![mapping, mapping])
    }

    #[test]
    fn evaluation_scores_exact_and_wrong_pairs() {
        let (set, seams, mappings) = seam_eval_fixture();
        let n = 11;
        // All exact pairs: precision = recall = 1, zero pixel error.
        let pairs: Vec<PointMatch> = (0..n)
            .map(|k| PointMatch {
                a: k,
                b: n + k,
                confidence: 1.0,
            })
            .collect();
        let eval = evaluate_matches(&set, &pairs, &seams, &mappings);
        assert_eq!(eval.gt_points, 2 * n);
        assert_eq!(eval.correct_pairs, n);
        assert_eq!(eval.precision, 1.0);
        assert_eq!(eval.recall, 1.0);
        assert!(eval.mean_px_dist < 1e-9);

        // A partner one sample step away stays within the quantization
        // allowance; two steps away is rejected. Missing pairs lower recall.
        let mut off = pairs.clone();
        off[2] = PointMatch {
            a: 2,
            b: n + 3,
            confidence: 1.0,
        };
        off[3] = PointMatch {
            a: 3,
            b: n + 5,
            confidence: 1.0,
        };
        off.truncate(10);
        let eval = evaluate_matches(&set, &off, &seams, &mappings);
        assert_eq!(eval.predicted_pairs, 10);
        assert_eq!(eval.correct_pairs, 9);
        assert!((eval.precision - 0.9).abs() < 1e-12);
        assert!((eval.recall - 18.0 / 22.0).abs() < 1e-12);

        // Swapped orientation still counts as correct.
        let swapped: Vec<PointMatch> = (0..n)
            .map(|k| PointMatch {
                a: n + k,
                b: k,
                confidence: 1.0,
            })
            .collect();
        let eval = evaluate_matches(&set, &swapped, &seams, &mappings);
        assert_eq!(eval.precision, 1.0);
    }

    #[test]
    fn off_seam_points_are_not_ground_truth() {
        let (mut set, seams, mappings) = seam_eval_fixture();
        // Push two panel-0 points far from the seam line.
        set.points[0].uv = [0.5, 0.0];
        set.points[1].uv = [0.5, 0.1];
        let eval = evaluate_matches(&set, &[], &seams, &mappings);
        assert_eq!(eval.gt_points, 20);
        assert_eq!(eval.predicted_pairs, 0);
        assert_eq!(eval.precision, 1.0);
        assert_eq!(eval.recall, 0.0);
    }
}
