//! Temporary end-to-end probe (deleted before release).

use garmage::codec::{decode_garment, encode_garment, CodecConfig};
use garmage::contour::{resample_garment, ResampleConfig};
use garmage::garmage::PanelMapping;
use garmage::matcher::{match_points, MatcherConfig};
use garmage::synth::{self, NoiseParams};
use garmage::vectorizer::{fit_segments, group_stitch_edges, VectorizerConfig};
use garmage::assembler::{relax, RelaxParams};
use std::time::Instant;

#[test]
fn probe_all() {
    let codec_cfg = CodecConfig::default();
    let res_cfg = ResampleConfig::default();

    // ---- criterion 5 probe: tube skirt matching quality ----
    for (name, noise) in [
        ("zero-noise", NoiseParams::default()),
        (
            "3d-5mm",
            NoiseParams {
                sigma_uv_px: 0.0,
                sigma_3d: 0.005,
            },
        ),
    ] {
        let t0 = Instant::now();
        let out = synth::tube_skirt(0.3, 1.0, 32, &noise, 7);
        let g = encode_garment(&out.mesh, &codec_cfg).unwrap();
        let t_enc = t0.elapsed();
        let points = resample_garment(&g, &codec_cfg, &res_cfg).unwrap();
        let t_res = t0.elapsed();
        let result = match_points(&points, &MatcherConfig::default()).unwrap();
        let t_match = t0.elapsed();
        let mappings: Vec<PanelMapping> = g
            .panels
            .iter()
            .map(|p| {
                PanelMapping::from_frame(&p.frame, p.image.width, p.image.height, codec_cfg.uv_margin_px)
            })
            .collect();
        let eval = synth::evaluate_matches(&points, &result.pairs, &out.seams, &mappings);
        println!(
            "[5 {name}] P={:.4} R={:.4} AMD={:.3}px pairs={} gt={} correct={} \
             sinkhorn_conv={} enc={:?} resample={:?} match={:?}",
            eval.precision,
            eval.recall,
            eval.mean_px_dist,
            eval.predicted_pairs,
            eval.gt_points,
            eval.correct_pairs,
            result.sinkhorn.converged,
            t_enc,
            t_res - t_enc,
            t_match - t_res,
        );

        // ---- criterion 7 probe (zero-noise only) ----
        if name == "zero-noise" {
            let vcfg = VectorizerConfig::default();
            let mut panels = Vec::new();
            for pid in 0..g.panels.len() as u32 {
                let (panel, trace) = fit_segments(&points, pid, &vcfg).unwrap();
                println!(
                    "[7] panel {pid}: {} segments after {} iterations",
                    panel.segments.len(),
                    trace.iterations.len()
                );
                panels.push(panel);
            }
            let (stitches, report) = group_stitch_edges(&result.pairs, &points, &panels, &vcfg);
            println!(
                "[7] {} stitches, runs={} orphans={}",
                stitches.len(),
                report.runs_found,
                report.orphan_pairs
            );
            for s in &stitches {
                println!(
                    "[7]   a: panel {} seg {} t [{:.3},{:.3}]  b: panel {} seg {} t [{:.3},{:.3}]  reversed {}",
                    s.a.panel, s.a.segment, s.a.t0, s.a.t1, s.b.panel, s.b.segment, s.b.t0, s.b.t1, s.reversed
                );
            }
        }
    }

    // ---- criterion 5 probe: seed scan for the jittered case ----
    for seed in [1u64, 2, 3, 5, 7, 11, 13, 17, 19, 23] {
        let noise = NoiseParams {
            sigma_uv_px: 0.0,
            sigma_3d: 0.005,
        };
        let out = synth::tube_skirt(0.3, 1.0, 32, &noise, seed);
        let g = encode_garment(&out.mesh, &codec_cfg).unwrap();
        let points = resample_garment(&g, &codec_cfg, &res_cfg).unwrap();
        let result = match_points(&points, &MatcherConfig::default()).unwrap();
        let mappings: Vec<PanelMapping> = g
            .panels
            .iter()
            .map(|p| {
                PanelMapping::from_frame(&p.frame, p.image.width, p.image.height, codec_cfg.uv_margin_px)
            })
            .collect();
        let eval = synth::evaluate_matches(&points, &result.pairs, &out.seams, &mappings);
        println!(
            "[5 scan seed={seed}] P={:.4} R={:.4} AMD={:.3}px pairs={}",
            eval.precision, eval.recall, eval.mean_px_dist, eval.predicted_pairs
        );
    }

    // ---- criterion 8 probe: sleeve gap closing on ground-truth stitches ----
    let t0 = Instant::now();
    let out = synth::two_panel_sleeve(0.2, 0.6, 32, &NoiseParams::default(), 11, 0.05);
    let mut mesh = out.mesh.clone();
    mesh.stitches = out
        .seams
        .iter()
        .flat_map(|s| s.verts.iter().copied())
        .collect();
    let params = RelaxParams::default();
    let report = relax(&mut mesh, &params);
    println!(
        "[8] pairs={} initial_gap={:.4} final_gap={:.5} outers={} converged={} strain={:.4} strain_ok={} time={:?}",
        mesh.stitches.len(),
        report.initial_gap,
        report.gap_history.last().unwrap(),
        report.outer_iterations,
        report.converged,
        report.max_strain,
        report.strain_ok,
        t0.elapsed(),
    );
    // Monotone gap with edge projection disabled.
    let mut mesh2 = out.mesh.clone();
    mesh2.stitches = mesh.stitches.clone();
    let free = RelaxParams {
        edge_iters: 0,
        ..RelaxParams::default()
    };
    let rep2 = relax(&mut mesh2, &free);
    let mono = rep2
        .gap_history
        .windows(2)
        .all(|w| w[1] < w[0] || w[1] == 0.0);
    println!(
        "[8 free] outers={} final_gap={:.6} strictly_decreasing={}",
        rep2.outer_iterations,
        rep2.gap_history.last().unwrap(),
        mono
    );
    // Schedule sweep on the criterion-8 geometry.
    {
        let mut base = out.mesh.clone();
        base.stitches = mesh.stitches.clone();
        let edges = probe_mesh_edges(&base);
        for (name, scheme, omega) in [
            ("gs-alt 1.00", 0u8, 1.0f64),
            ("gs-alt 0.80", 0, 0.8),
            ("gs-alt 0.75", 0, 0.75),
            ("gs-alt 0.70", 0, 0.7),
            ("gs-alt 0.65", 0, 0.65),
            ("gs-alt 0.60", 0, 0.6),
            ("jacobi 1.00", 2, 1.0),
            ("gated  0.60", 3, 0.6),
            ("gated  0.50", 3, 0.5),
            ("gated  0.40", 3, 0.4),
            ("gated  0.30", 3, 0.3),
        ] {
            let mut m = base.clone();
            let (hist, strain) = probe_relax(&mut m, &edges, &params, scheme, omega, 500);
            println!(
                "[sweep c8 {name}] outers={} gap={:.4}mm strain={:.4}",
                hist.len(),
                hist.last().unwrap() * 1e3,
                strain
            );
        }
    }

    // ---- criterion 1 probe: cylinder codec error, decoded surface vs the
    // analytic cylinder, sampled at decoded face edge midpoints. The input
    // mesh is dense enough that its own chordal error stays well below the
    // pixel-scale term at resolution 512.
    let (r, h) = (0.3f64, 1.0f64);
    let (nu, nv) = (900usize, 950usize);
    let mut vertices = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let phi = i as f64 / (nu - 1) as f64 * std::f64::consts::PI;
            let z = j as f64 / (nv - 1) as f64 * h;
            vertices.push(garmage::mesh::MeshVertex {
                position: [r * phi.cos(), r * phi.sin(), z],
                uv: [r * phi, z],
                panel_id: 0,
            });
        }
    }
    let mut faces = Vec::new();
    for j in 0..nv as u32 - 1 {
        for i in 0..nu as u32 - 1 {
            let p = j * nu as u32 + i;
            faces.push([p, p + 1, p + nu as u32]);
            faces.push([p + 1, p + nu as u32 + 1, p + nu as u32]);
        }
    }
    let half_cyl = garmage::mesh::GarmentMesh::new(vertices, faces, Vec::new());
    let diag = (h * h + (2.0 * r) * (2.0 * r) + r * r).sqrt();
    for res in [256usize, 512] {
        let t0 = Instant::now();
        let cfg = CodecConfig {
            resolution: res,
            ..CodecConfig::default()
        };
        let g = encode_garment(&half_cyl, &cfg).unwrap();
        let decoded = decode_garment(&g, &cfg);
        let mut worst = 0.0f64;
        for f in &decoded.faces {
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                let pa = decoded.vertices[f[a] as usize].position;
                let pb = decoded.vertices[f[b] as usize].position;
                let mid = [
                    0.5 * (pa[0] + pb[0]),
                    0.5 * (pa[1] + pb[1]),
                    0.5 * (pa[2] + pb[2]),
                ];
                let rad = (mid[0] * mid[0] + mid[1] * mid[1]).sqrt();
                worst = worst.max((rad - r).abs());
            }
        }
        println!(
            "[1] res {res}: worst surface error {:.6e} = {:.6e} x diag (decoded verts {}, {:?})",
            worst,
            worst / diag,
            decoded.vertices.len(),
            t0.elapsed()
        );
    }

    // ---- pipeline-convergence probe: matched stitches on decoded tube ----
    {
        use garmage::assembler::build_stitch_pairs;
        let out = synth::tube_skirt(0.3, 1.0, 32, &NoiseParams::default(), 0);
        let g = encode_garment(&out.mesh, &codec_cfg).unwrap();
        let points = resample_garment(&g, &codec_cfg, &res_cfg).unwrap();
        let result = match_points(&points, &MatcherConfig::default()).unwrap();
        let mut mesh = decode_garment(&g, &codec_cfg);
        let pitches: Vec<f64> = g
            .panels
            .iter()
            .map(|p| {
                PanelMapping::from_frame(&p.frame, p.image.width, p.image.height, codec_cfg.uv_margin_px)
                    .pitch()
            })
            .collect();
        let stitches = build_stitch_pairs(&mesh, &points, &result.pairs, &pitches).unwrap();
        for m in result.pairs.iter().take(4) {
            let pa = &points.points[m.a];
            let pb = &points.points[m.b];
            let d3 = ((pa.pos3[0] - pb.pos3[0]).powi(2)
                + (pa.pos3[1] - pb.pos3[1]).powi(2)
                + (pa.pos3[2] - pb.pos3[2]).powi(2))
            .sqrt();
            println!(
                "[pipe] pair a={}(p{} uv {:.4},{:.4} z {:.4}) b={}(p{} uv {:.4},{:.4} z {:.4}) pos3 dist {:.4}mm",
                m.a, pa.panel_id, pa.uv[0], pa.uv[1], pa.pos3[2],
                m.b, pb.panel_id, pb.uv[0], pb.uv[1], pb.pos3[2],
                d3 * 1e3
            );
        }
        // Initial vertex-pair distances and row-offset stats (tube seam is
        // vertical, so the v coordinate difference / pitch ~ row offset).
        let mut dist_hist = [0usize; 6];
        let mut worst0 = 0.0f64;
        for &[a, b] in &stitches {
            let pa = mesh.vertices[a as usize].position;
            let pb = mesh.vertices[b as usize].position;
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2))
                .sqrt();
            worst0 = worst0.max(d);
            let rows = (d / pitches[0]).round() as usize;
            dist_hist[rows.min(5)] += 1;
        }
        // Vertex-conflict count: vertices appearing in >1 stitch pair.
        let mut uses = std::collections::HashMap::new();
        for &[a, b] in &stitches {
            *uses.entry(a).or_insert(0usize) += 1;
            *uses.entry(b).or_insert(0usize) += 1;
        }
        let conflicts = uses.values().filter(|&&c| c > 1).count();
        println!(
            "[pipe] stitches={} init worst={:.4}mm row-offset hist={:?} conflicted verts={}",
            stitches.len(),
            worst0 * 1e3,
            dist_hist,
            conflicts
        );
        mesh.stitches = stitches;
        let mesh0 = mesh.clone();
        let params_default = RelaxParams::default();
        let params = RelaxParams {
            max_outer: 1500,
            ..RelaxParams::default()
        };
        let t0 = Instant::now();
        let report = relax(&mut mesh, &params);
        for k in [50, 100, 200, 300, 400, 500, 750, 1000, 1500, 2000, 3000, 4999] {
            if k < report.gap_history.len() {
                println!("[pipe] outer {k}: gap {:.4}mm", report.gap_history[k] * 1e3);
            }
        }
        println!(
            "[pipe] outers={} converged={} final={:.4}mm strain={:.4} ({:?})",
            report.outer_iterations,
            report.converged,
            report.gap_history.last().unwrap() * 1e3,
            report.max_strain,
            t0.elapsed()
        );
        // Schedule sweep: edge-projection variants on this constraint set.
        probe_pipe_sweep("tube-pipe", &mesh0);
        let _ = params_default;
        // Worst pairs at the end: how much of the residual is tangential
        // (z for the vertical tube seams) vs perpendicular?
        let mut final_gaps: Vec<(f64, usize)> = mesh
            .stitches
            .iter()
            .enumerate()
            .map(|(i, &[a, b])| {
                let pa = mesh.vertices[a as usize].position;
                let pb = mesh.vertices[b as usize].position;
                let d = ((pa[0] - pb[0]).powi(2)
                    + (pa[1] - pb[1]).powi(2)
                    + (pa[2] - pb[2]).powi(2))
                .sqrt();
                (d, i)
            })
            .collect();
        final_gaps.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        for &(d, i) in final_gaps.iter().take(8) {
            let [a, b] = mesh.stitches[i];
            let pa = mesh.vertices[a as usize].position;
            let pb = mesh.vertices[b as usize].position;
            let ua = mesh.vertices[a as usize].uv;
            let ub = mesh.vertices[b as usize].uv;
            println!(
                "[pipe-worst] gap {:.3}mm dz {:+.3}mm  a p{} uv({:.4},{:.4})  b p{} uv({:.4},{:.4})",
                d * 1e3,
                (pa[2] - pb[2]) * 1e3,
                mesh.vertices[a as usize].panel_id,
                ua[0],
                ua[1],
                mesh.vertices[b as usize].panel_id,
                ub[0],
                ub[1],
            );
        }
    }

    // ---- sleeve-pipeline probe (CLI default dims): why does it stall? ----
    {
        use garmage::assembler::build_stitch_pairs;
        let out = synth::two_panel_sleeve(0.3, 1.0, 32, &NoiseParams::default(), 0, 0.0);
        let g = encode_garment(&out.mesh, &codec_cfg).unwrap();
        let points = resample_garment(&g, &codec_cfg, &res_cfg).unwrap();
        let result = match_points(&points, &MatcherConfig::default()).unwrap();
        let mappings: Vec<PanelMapping> = g
            .panels
            .iter()
            .map(|p| {
                PanelMapping::from_frame(
                    &p.frame,
                    p.image.width,
                    p.image.height,
                    codec_cfg.uv_margin_px,
                )
            })
            .collect();
        let eval = synth::evaluate_matches(&points, &result.pairs, &out.seams, &mappings);
        println!(
            "[sleeve-pipe] match P={:.4} R={:.4} AMD={:.3}px pairs={} gt={}",
            eval.precision, eval.recall, eval.mean_px_dist, eval.predicted_pairs, eval.gt_points
        );
        let mut mesh = decode_garment(&g, &codec_cfg);
        let pitches: Vec<f64> = mappings.iter().map(|m| m.pitch()).collect();
        println!("[sleeve-pipe] pitches {:?}", pitches);
        let stitches = build_stitch_pairs(&mesh, &points, &result.pairs, &pitches).unwrap();
        let mut init: Vec<(f64, usize)> = stitches
            .iter()
            .enumerate()
            .map(|(i, &[a, b])| {
                let pa = mesh.vertices[a as usize].position;
                let pb = mesh.vertices[b as usize].position;
                let d = ((pa[0] - pb[0]).powi(2)
                    + (pa[1] - pb[1]).powi(2)
                    + (pa[2] - pb[2]).powi(2))
                .sqrt();
                (d, i)
            })
            .collect();
        init.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        for &(d, i) in init.iter().take(10) {
            let [a, b] = stitches[i];
            let ua = mesh.vertices[a as usize].uv;
            let ub = mesh.vertices[b as usize].uv;
            println!(
                "[sleeve-pipe init-worst] gap {:.3}mm  a p{} uv({:.4},{:.4})  b p{} uv({:.4},{:.4})",
                d * 1e3,
                mesh.vertices[a as usize].panel_id,
                ua[0],
                ua[1],
                mesh.vertices[b as usize].panel_id,
                ub[0],
                ub[1],
            );
        }
        mesh.stitches = stitches;
        let mut report_mesh = mesh.clone();
        let report = relax(&mut report_mesh, &RelaxParams::default());
        println!(
            "[sleeve-pipe] outers={} converged={} final={:.4}mm strain={:.4}",
            report.outer_iterations,
            report.converged,
            report.gap_history.last().unwrap() * 1e3,
            report.max_strain,
        );
        probe_pipe_sweep("sleeve-pipe", &mesh);
        let mut final_gaps: Vec<(f64, usize)> = report_mesh
            .stitches
            .iter()
            .enumerate()
            .map(|(i, &[a, b])| {
                let pa = report_mesh.vertices[a as usize].position;
                let pb = report_mesh.vertices[b as usize].position;
                let d = ((pa[0] - pb[0]).powi(2)
                    + (pa[1] - pb[1]).powi(2)
                    + (pa[2] - pb[2]).powi(2))
                .sqrt();
                (d, i)
            })
            .collect();
        final_gaps.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        for &(d, i) in final_gaps.iter().take(10) {
            let [a, b] = report_mesh.stitches[i];
            let pa = report_mesh.vertices[a as usize].position;
            let pb = report_mesh.vertices[b as usize].position;
            let ua = report_mesh.vertices[a as usize].uv;
            let ub = report_mesh.vertices[b as usize].uv;
            println!(
                "[sleeve-pipe worst] gap {:.3}mm dz {:+.3}mm  a p{} uv({:.4},{:.4})  b p{} uv({:.4},{:.4})",
                d * 1e3,
                (pa[2] - pb[2]) * 1e3,
                report_mesh.vertices[a as usize].panel_id,
                ua[0],
                ua[1],
                report_mesh.vertices[b as usize].panel_id,
                ub[0],
                ub[1],
            );
        }
    }

    // ---- four-panel-skirt pipeline probe (CLI default dims) ----
    {
        use garmage::assembler::build_stitch_pairs;
        let out = synth::four_panel_skirt(0.3, 1.0, 32, &NoiseParams::default(), 0);
        let g = encode_garment(&out.mesh, &codec_cfg).unwrap();
        let points = resample_garment(&g, &codec_cfg, &res_cfg).unwrap();
        let result = match_points(&points, &MatcherConfig::default()).unwrap();
        let mut mesh = decode_garment(&g, &codec_cfg);
        let pitches: Vec<f64> = g
            .panels
            .iter()
            .map(|p| {
                PanelMapping::from_frame(
                    &p.frame,
                    p.image.width,
                    p.image.height,
                    codec_cfg.uv_margin_px,
                )
                .pitch()
            })
            .collect();
        mesh.stitches = build_stitch_pairs(&mesh, &points, &result.pairs, &pitches).unwrap();
        probe_pipe_sweep("skirt4-pipe", &mesh);
    }
}

// ---- schedule-sweep helpers (temporary) ----

/// Runs the edge-schedule variant table on a matched, stitched mesh with the
/// stop rule disabled, reporting each variant's floor and where the default
/// tolerance would have stopped it.
fn probe_pipe_sweep(label: &str, mesh0: &garmage::mesh::GarmentMesh) {
    let edges = probe_mesh_edges(mesh0);
    let free_params = RelaxParams {
        gap_tol: 0.0,
        ..RelaxParams::default()
    };
    for (name, scheme, omega) in [
        ("gs-alt 1.00", 0u8, 1.0f64),
        ("gs-alt 0.80", 0, 0.8),
        ("gs-alt 0.75", 0, 0.75),
        ("gs-alt 0.70", 0, 0.7),
        ("gs-alt 0.65", 0, 0.65),
        ("gs-alt 0.60", 0, 0.6),
        ("jacobi 1.00", 2, 1.0),
        ("gated  0.60", 3, 0.6),
        ("gated  0.50", 3, 0.5),
        ("gated  0.40", 3, 0.4),
        ("gated  0.30", 3, 0.3),
    ] {
        let mut m = mesh0.clone();
        let (hist, strain) = probe_relax(&mut m, &edges, &free_params, scheme, omega, 500);
        let hit = hist.iter().position(|&g| g <= 0.0025);
        let floor = hist.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "[sweep {label} {name}] gap@500={:.4}mm floor={:.4}mm hit2.5mm@{:?} strain={:.4}",
            hist.last().unwrap() * 1e3,
            floor * 1e3,
            hit,
            strain
        );
    }
}

fn probe_mesh_edges(mesh: &garmage::mesh::GarmentMesh) -> Vec<(u32, u32, f64)> {
    let mut set = std::collections::BTreeSet::new();
    for f in &mesh.faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            set.insert([a.min(b), a.max(b)]);
        }
    }
    set.into_iter()
        .map(|[a, b]| {
            let pa = mesh.vertices[a as usize].position;
            let pb = mesh.vertices[b as usize].position;
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2))
                .sqrt();
            (a, b, d)
        })
        .collect()
}

/// Replicates the relax loop with a configurable edge-pass schedule.
/// scheme: 0 = sequential alternating sweeps, 1 = sequential forward only,
/// 2 = Jacobi averaging, 3 = alternating sweeps with gap-gated damping
/// (omega applies only once the max gap is below 5 mm; 1.0 above).
/// omega scales each edge correction.
fn probe_relax(
    mesh: &mut garmage::mesh::GarmentMesh,
    edges: &[(u32, u32, f64)],
    params: &RelaxParams,
    scheme: u8,
    omega: f64,
    max_outer: usize,
) -> (Vec<f64>, f64) {
    let n = mesh.vertices.len();
    let beta = params.stitch_stiffness;
    let gap_of = |mesh: &garmage::mesh::GarmentMesh| -> f64 {
        mesh.stitches
            .iter()
            .map(|&[a, b]| {
                let pa = mesh.vertices[a as usize].position;
                let pb = mesh.vertices[b as usize].position;
                ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    };
    let mut hist = Vec::new();
    let mut gap = gap_of(mesh);
    let mut outer = 0;
    let mut acc = vec![[0.0f64; 3]; n];
    let mut cnt = vec![0u32; n];
    while gap > params.gap_tol && outer < max_outer {
        acc.iter_mut().for_each(|a| *a = [0.0; 3]);
        cnt.iter_mut().for_each(|c| *c = 0);
        for &[a, b] in &mesh.stitches {
            let (a, b) = (a as usize, b as usize);
            let d = [
                mesh.vertices[b].position[0] - mesh.vertices[a].position[0],
                mesh.vertices[b].position[1] - mesh.vertices[a].position[1],
                mesh.vertices[b].position[2] - mesh.vertices[a].position[2],
            ];
            for k in 0..3 {
                acc[a][k] += d[k] * beta / 2.0;
                acc[b][k] -= d[k] * beta / 2.0;
            }
            cnt[a] += 1;
            cnt[b] += 1;
        }
        for i in 0..n {
            if cnt[i] > 0 {
                for k in 0..3 {
                    mesh.vertices[i].position[k] += acc[i][k] / cnt[i] as f64;
                }
            }
        }
        for pass in 0..params.edge_iters {
            match scheme {
                2 => {
                    acc.iter_mut().for_each(|a| *a = [0.0; 3]);
                    cnt.iter_mut().for_each(|c| *c = 0);
                    for &(a, b, rest) in edges {
                        let (a, b) = (a as usize, b as usize);
                        let e = [
                            mesh.vertices[b].position[0] - mesh.vertices[a].position[0],
                            mesh.vertices[b].position[1] - mesh.vertices[a].position[1],
                            mesh.vertices[b].position[2] - mesh.vertices[a].position[2],
                        ];
                        let d = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
                        if d > 1e-12 {
                            let s = omega * 0.5 * (1.0 - rest / d);
                            for k in 0..3 {
                                acc[a][k] += e[k] * s;
                                acc[b][k] -= e[k] * s;
                            }
                            cnt[a] += 1;
                            cnt[b] += 1;
                        }
                    }
                    for i in 0..n {
                        if cnt[i] > 0 {
                            for k in 0..3 {
                                mesh.vertices[i].position[k] += acc[i][k] / cnt[i] as f64;
                            }
                        }
                    }
                }
                _ => {
                    let om = if scheme == 3 && gap > 0.005 { 1.0 } else { omega };
                    let mut project = |&(a, b, rest): &(u32, u32, f64)| {
                        let (a, b) = (a as usize, b as usize);
                        let e = [
                            mesh.vertices[b].position[0] - mesh.vertices[a].position[0],
                            mesh.vertices[b].position[1] - mesh.vertices[a].position[1],
                            mesh.vertices[b].position[2] - mesh.vertices[a].position[2],
                        ];
                        let d = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
                        if d > 1e-12 {
                            let s = om * 0.5 * (1.0 - rest / d);
                            for k in 0..3 {
                                mesh.vertices[a].position[k] += e[k] * s;
                                mesh.vertices[b].position[k] -= e[k] * s;
                            }
                        }
                    };
                    if (scheme == 0 || scheme == 3) && pass % 2 == 1 {
                        edges.iter().rev().for_each(&mut project);
                    } else {
                        edges.iter().for_each(&mut project);
                    }
                }
            }
        }
        gap = gap_of(mesh);
        hist.push(gap);
        outer += 1;
    }
    let mut max_strain = 0.0f64;
    for &(a, b, rest) in edges {
        if rest > 1e-12 {
            let pa = mesh.vertices[a as usize].position;
            let pb = mesh.vertices[b as usize].position;
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2))
                .sqrt();
            max_strain = max_strain.max((d / rest - 1.0).abs());
        }
    }
    (hist, max_strain)
}
