//! Pattern vectorization: contour points to segment loops, point stitches
//! to segment stitches, and endpoint snapping.
//!
//! Segment fitting merges adjacent segments one pair per iteration,
//! alternating between an angle criterion (direction change at the
//! junction, measured in UV and 3D) and a length criterion (relative sag
//! of the merged candidate in UV), with a merged-chord cap that follows
//! the current mean segment length. Stitch grouping lifts arc-consecutive
//! matched point runs onto the fitted segments; endpoint optimization
//! snaps nearby stitch endpoints to shared locations.

use crate::boundary::{BoundaryPoint, BoundaryPointSet};
use crate::geom;
use crate::matcher::PointMatch;
use crate::pattern::{PatternSegment, SegmentStitch, SewingPatternDoc, StitchSideRef, VectorPanel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct VectorizerConfig {
    /// Merge gate for angle iterations, degrees.
    pub angle_max: f64,
    /// Merge gate for length iterations: relative sag of the merged
    /// candidate, (polyline - chord) / polyline in UV.
    pub sag_max: f64,
    /// Merged chord length cap as a multiple of the current mean segment
    /// chord length.
    pub kappa: f64,
    /// Weight of the 3D direction change inside the angle cost.
    pub weight_3d: f64,
    /// Largest arc-index gap tolerated inside a matched run, points.
    pub run_gap: u32,
    /// Endpoint clustering radius, UV meters.
    pub snap_radius: f64,
    /// Never merge a loop below this many segments.
    pub min_segments: usize,
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        VectorizerConfig {
            angle_max: 12.0,
            sag_max: 0.008,
            kappa: 3.0,
            weight_3d: 1.0,
            run_gap: 2,
            snap_radius: 0.004,
            min_segments: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VectorizeError {
    #[error("panel {panel_id}: loop has {points} points, need at least 8 to fit segments")]
    DegenerateLoop { panel_id: u32, points: usize },
}

/// One merge iteration of the fitting loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitIteration {
    /// "angle" or "sag".
    pub criterion: String,
    /// 0 or 1 merges performed.
    pub merges: usize,
    /// Alive segments after the iteration.
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub panel_id: u32,
    pub initial_segments: usize,
    pub final_segments: usize,
    pub iterations: Vec<FitIteration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EndpointReport {
    /// Clusters with at least two endpoints.
    pub clusters: usize,
    pub endpoints_moved: usize,
    pub max_spread_before: f64,
    pub max_spread_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizeReport {
    pub traces: Vec<FitTrace>,
    pub runs_found: usize,
    pub orphan_pairs: usize,
    pub endpoint: EndpointReport,
}

/// Fits a closed segment loop to one panel's ordered boundary points.
///
/// Starts with one segment between each consecutive point pair, then
/// repeatedly merges the lowest-cost admissible adjacent pair — one merge
/// per iteration, angle cost on even iterations, sag cost on odd — until a
/// full angle+sag cycle merges nothing. A merge is admissible when its
/// criterion cost passes the gate and the merged chord is no longer than
/// `kappa` times the current mean segment chord. Ties break toward the
/// lower segment index; every surviving endpoint is an input point.
pub fn fit_segments(
    points: &BoundaryPointSet,
    panel_id: u32,
    cfg: &VectorizerConfig,
) -> Result<(VectorPanel, FitTrace), VectorizeError> {
    let pts = points.panel_points(panel_id);
    let n = pts.len();
    if n < 8 {
        return Err(VectorizeError::DegenerateLoop {
            panel_id,
            points: n,
        });
    }

    // Segment s starts life as the chord point s -> point s+1. Merging
    // (s, next) keeps s's identity, so `first[s] == s` always holds and
    // the scan index doubles as the deterministic tie-break.
    let mut alive = vec![true; n];
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut last: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut poly_len: Vec<f64> = (0..n)
        .map(|i| geom::dist2(pts[i].uv, pts[(i + 1) % n].uv))
        .collect();
    let mut alive_count = n;
    let mut chord_sum: f64 = poly_len.iter().sum();

    let chord2 = |s: usize, last: &[usize]| geom::sub2(pts[last[s]].uv, pts[s].uv);
    let chord3 = |s: usize, last: &[usize]| geom::sub3(pts[last[s]].pos3, pts[s].pos3);

    let angle_max_rad = cfg.angle_max.to_radians();
    let mut trace = FitTrace {
        panel_id,
        initial_segments: n,
        final_segments: n,
        iterations: Vec::new(),
    };

    let mut iter = 0usize;
    let mut merged_in_prev = true; // allow the first cycle to run
    loop {
        let use_angle = iter % 2 == 0;
        let l_max = cfg.kappa * chord_sum / alive_count as f64;

        let mut best: Option<(f64, usize)> = None;
        if alive_count > cfg.min_segments {
            let mut s = 0;
            while s < n {
                if !alive[s] {
                    s += 1;
                    continue;
                }
                let t = next[s];
                let merged_chord = geom::dist2(pts[s].uv, pts[last[t]].uv);
                if merged_chord <= l_max {
                    let cost = if use_angle {
                        let a_uv = geom::angle_between2(chord2(s, &last), chord2(t, &last));
                        let a_3d = geom::angle_between3(chord3(s, &last), chord3(t, &last));
                        let cost = a_uv.max(cfg.weight_3d * a_3d);
                        if cost <= angle_max_rad {
                            Some(cost)
                        } else {
                            None
                        }
                    } else {
                        let poly = poly_len[s] + poly_len[t];
                        if poly > 1e-15 {
                            let sag = ((poly - merged_chord) / poly).max(0.0);
                            if sag <= cfg.sag_max {
                                Some(sag)
                            } else {
                                None
                            }
                        } else {
                            Some(0.0)
                        }
                    };
                    if let Some(c) = cost {
                        if best.map_or(true, |(bc, _)| c < bc) {
                            best = Some((c, s));
                        }
                    }
                }
                s += 1;
            }
        }

        let merged_now = if let Some((_, s)) = best {
            let t = next[s];
            let old = geom::norm2(chord2(s, &last)) + geom::norm2(chord2(t, &last));
            alive[t] = false;
            last[s] = last[t];
            poly_len[s] += poly_len[t];
            next[s] = next[t];
            prev[next[t]] = s;
            chord_sum += geom::norm2(chord2(s, &last)) - old;
            alive_count -= 1;
            1
        } else {
            0
        };

        trace.iterations.push(FitIteration {
            criterion: if use_angle { "angle" } else { "sag" }.to_string(),
            merges: merged_now,
            segments: alive_count,
        });

        if merged_now == 0 && !merged_in_prev && iter > 0 {
            break;
        }
        merged_in_prev = merged_now == 1;
        iter += 1;
    }
    trace.final_segments = alive_count;

    // Emit segments in loop order from the lowest alive index.
    let start = (0..n).find(|&s| alive[s]).unwrap();
    let mut segments = Vec::with_capacity(alive_count);
    let mut s = start;
    loop {
        segments.push(PatternSegment {
            from: pts[s].uv,
            to: pts[last[s]].uv,
            source_span: Some([pts[s].id as u32, pts[last[s]].id as u32]),
        });
        s = next[s];
        if s == start {
            break;
        }
    }
    Ok((
        VectorPanel {
            panel_id,
            label: None,
            segments,
        },
        trace,
    ))
}

/// Per-panel lookup from local arc index to fitted segment.
struct SegmentIndex {
    n_points: usize,
    /// Segment ordinal owning each point; junction points belong to the
    /// segment that starts there.
    owner: Vec<usize>,
    is_junction: Vec<bool>,
    first_arc: Vec<usize>,
    span: Vec<usize>,
}

impl SegmentIndex {
    fn build(panel: &VectorPanel, points: &BoundaryPointSet) -> SegmentIndex {
        let n = points.panel_counts[panel.panel_id as usize];
        let mut owner = vec![usize::MAX; n];
        let mut is_junction = vec![false; n];
        let mut first_arc = Vec::with_capacity(panel.segments.len());
        let mut span = Vec::with_capacity(panel.segments.len());
        for (si, seg) in panel.segments.iter().enumerate() {
            let ids = seg
                .source_span
                .expect("grouping requires freshly fitted segments with source spans");
            let fa = points.points[ids[0] as usize].loop_arc_index as usize;
            let la = points.points[ids[1] as usize].loop_arc_index as usize;
            let sp = (la + n - fa) % n;
            first_arc.push(fa);
            span.push(sp.max(1));
            for step in 0..sp.max(1) {
                owner[(fa + step) % n] = si;
            }
            is_junction[fa] = true;
        }
        SegmentIndex {
            n_points: n,
            owner,
            is_junction,
            first_arc,
            span,
        }
    }

    /// Segments containing a point: its owner, plus the previous segment
    /// when the point is the junction between the two.
    fn containing(&self, arc: usize, n_segments: usize) -> (usize, Option<usize>) {
        let own = self.owner[arc];
        if self.is_junction[arc] {
            (own, Some((own + n_segments - 1) % n_segments))
        } else {
            (own, None)
        }
    }

    /// Fractional parameter of a point inside a segment's index span.
    fn param(&self, seg: usize, arc: usize) -> f64 {
        let steps = (arc + self.n_points - self.first_arc[seg]) % self.n_points;
        steps as f64 / self.span[seg] as f64
    }
}

struct Run {
    pairs: Vec<(usize, usize)>, // (a point id, b point id)
    dir: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct GroupReport {
    pub runs_found: usize,
    pub orphan_pairs: usize,
}

/// Lifts matched point pairs onto fitted segments.
///
/// Pairs are walked in ascending order of their first point; a run grows
/// while both sides stay arc-consecutive (gaps of at most `run_gap`
/// points) and the partner side keeps one direction. Runs shorter than two
/// pairs are dropped as orphans. Each run is cut wherever either side
/// crosses into another fitted segment (junction points stay with the
/// piece in progress) and every piece becomes one segment stitch with
/// fractional parameter ranges; descending partner indices set `reversed`.
pub fn group_stitch_edges(
    pairs: &[PointMatch],
    points: &BoundaryPointSet,
    panels: &[VectorPanel],
    cfg: &VectorizerConfig,
) -> (Vec<SegmentStitch>, GroupReport) {
    let mut report = GroupReport::default();
    if pairs.is_empty() {
        return (Vec::new(), report);
    }
    let indexes: Vec<SegmentIndex> = panels
        .iter()
        .map(|p| SegmentIndex::build(p, points))
        .collect();
    let pt = |id: usize| -> &BoundaryPoint { &points.points[id] };

    let mut sorted: Vec<(usize, usize)> = pairs.iter().map(|m| (m.a, m.b)).collect();
    sorted.sort();

    // Grow maximal runs.
    let mut runs: Vec<Run> = Vec::new();
    let gap = cfg.run_gap as usize;
    for &(a, b) in &sorted {
        let extend = runs.last().and_then(|run| {
            let &(pa, pb) = run.pairs.last().unwrap();
            let (pa, pb, a, b) = (pt(pa), pt(pb), pt(a), pt(b));
            if pa.panel_id != a.panel_id || pb.panel_id != b.panel_id {
                return None;
            }
            let na = points.panel_counts[a.panel_id as usize];
            let nb = points.panel_counts[b.panel_id as usize];
            let da = (a.loop_arc_index as usize + na - pa.loop_arc_index as usize) % na;
            if da == 0 || da > gap {
                return None;
            }
            let fwd = (b.loop_arc_index as usize + nb - pb.loop_arc_index as usize) % nb;
            let bwd = (pb.loop_arc_index as usize + nb - b.loop_arc_index as usize) % nb;
            match run.dir {
                0 => {
                    if (1..=gap).contains(&fwd) {
                        Some(1)
                    } else if (1..=gap).contains(&bwd) {
                        Some(-1)
                    } else {
                        None
                    }
                }
                1 => (1..=gap).contains(&fwd).then_some(1),
                _ => (1..=gap).contains(&bwd).then_some(-1),
            }
        });
        match extend {
            Some(dir) => {
                let run = runs.last_mut().unwrap();
                run.pairs.push((a, b));
                run.dir = dir;
            }
            None => runs.push(Run {
                pairs: vec![(a, b)],
                dir: 0,
            }),
        }
    }

    // A run may cross the arc origin of the first panel; sorted order then
    // splits it in two, with the wrapped head first. Rejoin that case.
    if runs.len() >= 2 {
        let can_join = {
            let head = &runs[0];
            let tail = runs.last().unwrap();
            let (ha, hb) = head.pairs[0];
            let &(ta, tb) = tail.pairs.last().unwrap();
            let (ha, hb, ta, tb) = (pt(ha), pt(hb), pt(ta), pt(tb));
            if ha.panel_id == ta.panel_id && hb.panel_id == tb.panel_id {
                let na = points.panel_counts[ha.panel_id as usize];
                let nb = points.panel_counts[hb.panel_id as usize];
                let da = (ha.loop_arc_index as usize + na - ta.loop_arc_index as usize) % na;
                let fwd = (hb.loop_arc_index as usize + nb - tb.loop_arc_index as usize) % nb;
                let bwd = (tb.loop_arc_index as usize + nb - hb.loop_arc_index as usize) % nb;
                let dir_ok = |run: &Run, d: i64| run.dir == 0 || run.dir == d;
                (1..=gap).contains(&da)
                    && (((1..=gap).contains(&fwd)
                        && dir_ok(&runs[0], 1)
                        && dir_ok(runs.last().unwrap(), 1))
                        || ((1..=gap).contains(&bwd)
                            && dir_ok(&runs[0], -1)
                            && dir_ok(runs.last().unwrap(), -1)))
            } else {
                false
            }
        };
        if can_join {
            let head = runs.remove(0);
            let tail = runs.last_mut().unwrap();
            if tail.dir == 0 {
                tail.dir = head.dir;
            }
            tail.pairs.extend(head.pairs);
        }
    }

    let mut stitches = Vec::new();
    for run in &runs {
        if run.pairs.len() < 2 {
            report.orphan_pairs += run.pairs.len();
            continue;
        }
        report.runs_found += 1;

        // Cut the run where either side changes fitted segment.
        let a_panel = pt(run.pairs[0].0).panel_id as usize;
        let b_panel = pt(run.pairs[0].1).panel_id as usize;
        let (ia, ib) = (&indexes[a_panel], &indexes[b_panel]);
        let (sa_n, sb_n) = (panels[a_panel].segments.len(), panels[b_panel].segments.len());

        let mut piece: Vec<(usize, usize)> = Vec::new();
        let mut cur: Option<(usize, usize)> = None;
        let mut flush = |piece: &mut Vec<(usize, usize)>, cur: &Option<(usize, usize)>| {
            if piece.len() >= 2 {
                let (seg_a, seg_b) = cur.unwrap();
                let (fa, fb) = piece[0];
                let &(la, lb) = piece.last().unwrap();
                let ta0 = ia.param(seg_a, pt(fa).loop_arc_index as usize);
                let ta1 = ia.param(seg_a, pt(la).loop_arc_index as usize);
                let (tb0, tb1, reversed) = if run.dir >= 0 {
                    (
                        ib.param(seg_b, pt(fb).loop_arc_index as usize),
                        ib.param(seg_b, pt(lb).loop_arc_index as usize),
                        false,
                    )
                } else {
                    (
                        ib.param(seg_b, pt(lb).loop_arc_index as usize),
                        ib.param(seg_b, pt(fb).loop_arc_index as usize),
                        true,
                    )
                };
                stitches.push(SegmentStitch {
                    a: StitchSideRef {
                        panel: a_panel as u32,
                        segment: seg_a,
                        t0: ta0,
                        t1: ta1,
                    },
                    b: StitchSideRef {
                        panel: b_panel as u32,
                        segment: seg_b,
                        t0: tb0,
                        t1: tb1,
                    },
                    reversed,
                });
            } else {
                report.orphan_pairs += piece.len();
            }
            piece.clear();
        };

        for &(a, b) in &run.pairs {
            let (own_a, alt_a) = ia.containing(pt(a).loop_arc_index as usize, sa_n);
            let (own_b, alt_b) = ib.containing(pt(b).loop_arc_index as usize, sb_n);
            let keeps = |cur: usize, own: usize, alt: Option<usize>| {
                cur == own || alt == Some(cur)
            };
            match cur {
                Some((ca, cb)) if keeps(ca, own_a, alt_a) && keeps(cb, own_b, alt_b) => {
                    piece.push((a, b));
                }
                _ => {
                    flush(&mut piece, &cur);
                    cur = Some((own_a, own_b));
                    piece.push((a, b));
                }
            }
        }
        flush(&mut piece, &cur);
    }

    stitches.sort_by(|x, y| {
        (x.a.panel, x.a.segment)
            .cmp(&(y.a.panel, y.a.segment))
            .then(x.a.t0.partial_cmp(&y.a.t0).unwrap())
    });
    (stitches, report)
}

/// Clusters stitch endpoints within `snap_radius` per panel and moves each
/// member to the point of its own segment chord closest to the cluster
/// mean (parameter clamped to [0, 1]). Panel loop geometry is unchanged.
pub fn optimize_endpoints(doc: &mut SewingPatternDoc, cfg: &VectorizerConfig) -> EndpointReport {
    // Collect endpoints: (stitch index, side 0/1, end 0/1, panel, uv).
    struct EndRef {
        stitch: usize,
        side: usize,
        end: usize,
        panel: u32,
        uv: [f64; 2],
    }
    let mut ends = Vec::new();
    for (si, st) in doc.stitches.iter().enumerate() {
        for (side_i, side) in [&st.a, &st.b].into_iter().enumerate() {
            let panel = doc
                .panel(side.panel)
                .expect("stitch references a missing panel");
            for (end_i, t) in [side.t0, side.t1].into_iter().enumerate() {
                ends.push(EndRef {
                    stitch: si,
                    side: side_i,
                    end: end_i,
                    panel: side.panel,
                    uv: panel.point_at(side.segment, t),
                });
            }
        }
    }

    // Union-find over same-panel endpoints within the snap radius.
    let n = ends.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
            r
        } else {
            i
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if ends[i].panel == ends[j].panel
                && geom::dist2(ends[i].uv, ends[j].uv) <= cfg.snap_radius
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }

    let mut report = EndpointReport::default();
    let spread = |uvs: &[[f64; 2]]| -> f64 {
        let mut m = 0.0f64;
        for i in 0..uvs.len() {
            for j in i + 1..uvs.len() {
                m = m.max(geom::dist2(uvs[i], uvs[j]));
            }
        }
        m
    };

    for members in clusters.values() {
        if members.len() < 2 {
            continue;
        }
        report.clusters += 1;
        let uvs: Vec<[f64; 2]> = members.iter().map(|&i| ends[i].uv).collect();
        report.max_spread_before = report.max_spread_before.max(spread(&uvs));
        let mut target = [0.0f64; 2];
        for uv in &uvs {
            target = geom::add2(target, *uv);
        }
        target = geom::scale2(target, 1.0 / uvs.len() as f64);

        let mut after = Vec::with_capacity(members.len());
        for &ei in members {
            let e = &ends[ei];
            let st = &doc.stitches[e.stitch];
            let side = if e.side == 0 { &st.a } else { &st.b };
            let seg_ref = (side.panel, side.segment, side.t0, side.t1);
            let panel = doc.panel(seg_ref.0).unwrap();
            let seg = &panel.segments[seg_ref.1];
            let chord = geom::sub2(seg.to, seg.from);
            let len2 = geom::dot2(chord, chord);
            let t_new = if len2 > 1e-18 {
                (geom::dot2(geom::sub2(target, seg.from), chord) / len2).clamp(0.0, 1.0)
            } else {
                if e.end == 0 {
                    seg_ref.2
                } else {
                    seg_ref.3
                }
            };
            // Apply only while the side's parameter ordering survives, so
            // orientation semantics never flip.
            let (t0, t1) = (seg_ref.2, seg_ref.3);
            let (n0, n1) = if e.end == 0 { (t_new, t1) } else { (t0, t_new) };
            let st = &mut doc.stitches[e.stitch];
            let side = if e.side == 0 { &mut st.a } else { &mut st.b };
            if n0 <= n1 {
                let old = if e.end == 0 { side.t0 } else { side.t1 };
                side.t0 = n0;
                side.t1 = n1;
                if old != t_new {
                    report.endpoints_moved += 1;
                }
            }
            let panel = doc.panel(e.panel).unwrap();
            let side = if e.side == 0 {
                &doc.stitches[e.stitch].a
            } else {
                &doc.stitches[e.stitch].b
            };
            let t_now = if e.end == 0 { side.t0 } else { side.t1 };
            after.push(panel.point_at(side.segment, t_now));
        }
        report.max_spread_after = report.max_spread_after.max(spread(&after));
    }
    report
}

/// Full vectorization: fit every panel, group stitches, snap endpoints.
pub fn vectorize(
    points: &BoundaryPointSet,
    pairs: &[PointMatch],
    cfg: &VectorizerConfig,
) -> Result<(SewingPatternDoc, VectorizeReport), VectorizeError> {
    let mut panels = Vec::new();
    let mut traces = Vec::new();
    for pid in 0..points.panel_counts.len() {
        let (panel, trace) = fit_segments(points, pid as u32, cfg)?;
        panels.push(panel);
        traces.push(trace);
    }
    let (stitches, group) = group_stitch_edges(pairs, points, &panels, cfg);
    let mut doc = SewingPatternDoc { panels, stitches };
    let endpoint = optimize_endpoints(&mut doc, cfg);
    Ok((
        doc,
        VectorizeReport {
            traces,
            runs_found: group.runs_found,
            orphan_pairs: group.orphan_pairs,
            endpoint,
        },
    ))
}
