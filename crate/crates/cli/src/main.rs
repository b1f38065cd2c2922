//! `garmage` — command-line front end for the garment codec and
//! assembly toolkit.
//!
//! Exit codes: 0 success, 2 invalid input or failed validation,
//! 3 seam relaxation finished without reaching the gap tolerance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use garmage::assembler::{close_seams, RelaxParams, RelaxReport};
use garmage::boundary::BoundaryPointSet;
use garmage::codec::{decode_garment, encode_garment, CodecConfig};
use garmage::contour::{resample_garment, ResampleConfig};
use garmage::garmage::{Garmage, PanelMapping};
use garmage::io::{
    load_gmg, load_obj, load_pattern, load_point_stitches, save_gmg, save_obj, save_pattern,
    save_point_stitches, PointStitchDoc,
};
use garmage::matcher::{match_points, MatchError, MatcherConfig, PointMatch};
use garmage::mesh::GarmentMesh;
use garmage::pattern::SewingPatternDoc;
use garmage::synth::{generate, Template, TemplateParams};
use garmage::validate::{validate, AssetRef, ValidationReport};
use garmage::vectorizer::{
    fit_segments, group_stitch_edges, optimize_endpoints, VectorizerConfig,
};

const CONFIG_VERSION: u32 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A fatal CLI error: message printed to stderr, process exits with `code`.
struct CliError {
    msg: String,
    code: u8,
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> CliError {
        CliError {
            msg: msg.into(),
            code: EXIT_INVALID,
        }
    }
}

macro_rules! from_domain_error {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::invalid(e.to_string())
            }
        })*
    };
}

from_domain_error!(
    garmage::io::IoError,
    garmage::codec::CodecError,
    garmage::contour::ContourError,
    garmage::assembler::AssembleError,
    garmage::vectorizer::VectorizeError,
    garmage::synth::SynthError,
);

/// Attaches the file path to an error, so messages always name the file
/// that failed to load or save.
fn at_path<T, E: std::fmt::Display>(path: &Path, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e)))
}

// ---------------------------------------------------------------------------
// Configuration file
// ---------------------------------------------------------------------------

fn default_config_version() -> u32 {
    CONFIG_VERSION
}

/// On-disk configuration: every section optional, defaults fill the rest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct FileConfig {
    #[serde(default = "default_config_version")]
    version: u32,
    codec: CodecConfig,
    resample: ResampleConfig,
    matcher: MatcherConfig,
    vectorizer: VectorizerConfig,
    relax: RelaxParams,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig {
            version: CONFIG_VERSION,
            ..FileConfig::default()
        });
    };
    let text = at_path(path, std::fs::read_to_string(path))?;
    let cfg: FileConfig = at_path(path, serde_json::from_str(&text))?;
    if cfg.version != CONFIG_VERSION {
        return Err(CliError::invalid(format!(
            "{}: unsupported config version {} (expected {})",
            path.display(),
            cfg.version,
            CONFIG_VERSION
        )));
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "garmage",
    version,
    about = "Garment geometry-image codec and seam assembly toolkit"
)]
struct Cli {
    /// JSON configuration file (all sections optional).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores). The GARMAGE_THREADS environment
    /// variable, when set, overrides this flag.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode an OBJ garment mesh into a .gmg geometry-image container.
    Encode {
        /// Input OBJ mesh (stitch sidecar loaded when present).
        #[arg(long)]
        input: PathBuf,
        /// Output .gmg file.
        #[arg(long)]
        out: PathBuf,
        /// Raster resolution override (pixels per side).
        #[arg(long)]
        res: Option<usize>,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decode a .gmg container back into an OBJ mesh.
    Decode {
        /// Input .gmg file.
        #[arg(long)]
        input: PathBuf,
        /// Output OBJ mesh (a stitch sidecar is always written).
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract panel boundaries and resample them to a point budget.
    Contour {
        /// Input .gmg file.
        #[arg(long)]
        input: PathBuf,
        /// Output boundary-point JSON.
        #[arg(long)]
        out: PathBuf,
        /// Total boundary point budget override.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Match boundary points into point-level stitch pairs.
    Match {
        /// Input .gmg file.
        #[arg(long)]
        input: PathBuf,
        /// Output point-stitch JSON.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Vectorize panel boundaries into a sewing-pattern document.
    Vectorize {
        /// Input .gmg file.
        #[arg(long)]
        input: PathBuf,
        /// Point-stitch JSON produced by `match`.
        #[arg(long)]
        stitches: PathBuf,
        /// Output pattern JSON.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decode, stitch, and relax a garment until seams close.
    Assemble {
        /// Input .gmg file.
        #[arg(long)]
        input: PathBuf,
        /// Point-stitch JSON produced by `match`.
        #[arg(long)]
        stitches: PathBuf,
        /// Output OBJ mesh of the relaxed garment.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the full pipeline: encode, contour, match, vectorize, assemble.
    Pipeline {
        /// Input OBJ mesh.
        #[arg(long)]
        input: PathBuf,
        /// Directory for all intermediate and final artifacts.
        #[arg(long)]
        out_dir: PathBuf,
        /// Raster resolution override (pixels per side).
        #[arg(long)]
        res: Option<usize>,
    },
    /// Generate a synthetic garment with known ground-truth seams.
    Synth {
        /// Garment template.
        #[arg(long, value_enum)]
        template: TemplateArg,
        /// Output OBJ mesh (ground-truth stitch sidecar included).
        #[arg(long)]
        out: PathBuf,
        /// Base radius, meters.
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        /// Height, meters.
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        /// Vertex rows per panel.
        #[arg(long, default_value_t = 32)]
        density: usize,
        /// UV jitter (std dev, pixels at resolution 256).
        #[arg(long, default_value_t = 0.0)]
        sigma_uv_px: f64,
        /// Per-panel rigid 3D perturbation scale, meters.
        #[arg(long, default_value_t = 0.0)]
        sigma_3d: f64,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rigid gap opened along every seam (two-panel sleeve only).
        #[arg(long, default_value_t = 0.0)]
        separation: f64,
    },
    /// Validate an asset (.obj mesh, .gmg container, or pattern .json).
    Validate {
        /// Asset path; the format is chosen by extension.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TemplateArg {
    #[value(name = "tube_skirt")]
    TubeSkirt,
    #[value(name = "two_panel_sleeve")]
    TwoPanelSleeve,
    #[value(name = "four_panel_skirt")]
    FourPanelSkirt,
}

impl From<TemplateArg> for Template {
    fn from(t: TemplateArg) -> Template {
        match t {
            TemplateArg::TubeSkirt => Template::TubeSkirt,
            TemplateArg::TwoPanelSleeve => Template::TwoPanelSleeve,
            TemplateArg::FourPanelSkirt => Template::FourPanelSkirt,
        }
    }
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    init_threads(cli.threads)?;
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Encode {
            input,
            out,
            res,
            report,
        } => cmd_encode(&cfg, &input, &out, res, report.as_deref()),
        Command::Decode { input, out } => cmd_decode(&cfg, &input, &out),
        Command::Contour { input, out, points } => cmd_contour(&cfg, &input, &out, points),
        Command::Match { input, out, report } => cmd_match(&cfg, &input, &out, report.as_deref()),
        Command::Vectorize {
            input,
            stitches,
            out,
            report,
        } => cmd_vectorize(&cfg, &input, &stitches, &out, report.as_deref()),
        Command::Assemble {
            input,
            stitches,
            out,
            report,
        } => cmd_assemble(&cfg, &input, &stitches, &out, report.as_deref()),
        Command::Pipeline {
            input,
            out_dir,
            res,
        } => cmd_pipeline(&cfg, &input, &out_dir, res),
        Command::Synth {
            template,
            out,
            radius,
            height,
            density,
            sigma_uv_px,
            sigma_3d,
            seed,
            separation,
        } => {
            let mut params = TemplateParams::default();
            params.radius = radius;
            params.height = height;
            params.density = density;
            params.noise.sigma_uv_px = sigma_uv_px;
            params.noise.sigma_3d = sigma_3d;
            params.seed = seed;
            params.separation = separation;
            cmd_synth(template.into(), &params, &out)
        }
        Command::Validate { input } => cmd_validate(&input),
    }
}

/// Resolves the worker-thread count. The GARMAGE_THREADS environment
/// variable overrides the --threads flag; 0 means "all cores" and leaves
/// the default pool untouched.
fn init_threads(flag: usize) -> Result<(), CliError> {
    let n = match std::env::var("GARMAGE_THREADS") {
        Ok(s) => s.trim().parse::<usize>().map_err(|_| {
            CliError::invalid(format!("GARMAGE_THREADS: not a thread count: {s:?}"))
        })?,
        Err(std::env::VarError::NotPresent) => flag,
        Err(e) => return Err(CliError::invalid(format!("GARMAGE_THREADS: {e}"))),
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e)))?;
    text.push('\n');
    at_path(path, std::fs::write(path, text))
}

fn ms_since(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

fn load_garmage(path: &Path) -> Result<Garmage, CliError> {
    at_path(path, load_gmg(path))
}

fn load_mesh(path: &Path) -> Result<GarmentMesh, CliError> {
    at_path(path, load_obj(path))
}

/// Fails when a mesh or garment violates its structural invariants.
fn require_valid(report: &ValidationReport, what: &str) -> Result<(), CliError> {
    if report.is_valid() {
        return Ok(());
    }
    let mut msg = format!("{what} failed validation:");
    for v in &report.violations {
        msg.push_str(&format!("\n  [{}] {}: {}", v.rule, v.location, v.detail));
    }
    Err(CliError::invalid(msg))
}

fn resample(g: &Garmage, cfg: &FileConfig) -> Result<BoundaryPointSet, CliError> {
    Ok(resample_garment(g, &cfg.codec, &cfg.resample)?)
}

/// Outcome of the matching stage: pairs (possibly empty) plus metrics.
struct MatchStage {
    pairs: Vec<PointMatch>,
    metrics: Value,
}

/// Runs the point matcher. An empty classifier mask is a valid outcome
/// (panels that touch nothing produce no stitches), reported as a warning
/// on stderr, not an error. Hitting the Sinkhorn iteration cap is likewise
/// only a warning.
fn run_match_stage(points: &BoundaryPointSet, cfg: &MatcherConfig) -> Result<MatchStage, CliError> {
    match match_points(points, cfg) {
        Ok(result) => {
            if !result.sinkhorn.converged {
                eprintln!(
                    "warning: sinkhorn stopped at the iteration cap ({} iterations, delta {:.3e})",
                    result.sinkhorn.iterations, result.sinkhorn.final_delta
                );
            }
            let metrics = json!({
                "total_points": points.points.len(),
                "kept_points": result.mask.len(),
                "pairs": result.pairs.len(),
                "sigma": result.sigma,
                "sinkhorn": {
                    "iterations": result.sinkhorn.iterations,
                    "converged": result.sinkhorn.converged,
                    "final_delta": result.sinkhorn.final_delta,
                },
            });
            Ok(MatchStage {
                pairs: result.pairs.clone(),
                metrics,
            })
        }
        Err(MatchError::MaskEmpty { kept }) => {
            eprintln!(
                "warning: stitch classifier kept {kept} boundary points; writing an empty stitch set"
            );
            let metrics = json!({
                "total_points": points.points.len(),
                "kept_points": kept,
                "pairs": 0,
            });
            Ok(MatchStage {
                pairs: Vec::new(),
                metrics,
            })
        }
    }
}

/// Outcome of the vectorize stage.
struct VectorizeStage {
    doc: SewingPatternDoc,
    metrics: Value,
}

fn run_vectorize_stage(
    g: &Garmage,
    points: &BoundaryPointSet,
    pairs: &[PointMatch],
    cfg: &VectorizerConfig,
) -> Result<VectorizeStage, CliError> {
    let mut panels = Vec::with_capacity(g.panels.len());
    let mut traces = Vec::with_capacity(g.panels.len());
    for pid in 0..g.panels.len() {
        let (mut panel, trace) = fit_segments(points, pid as u32, cfg)?;
        panel.label = g.panels[pid].label.clone();
        panels.push(panel);
        traces.push(trace);
    }
    let (stitches, group) = group_stitch_edges(pairs, points, &panels, cfg);
    let mut doc = SewingPatternDoc { panels, stitches };
    let endpoints = optimize_endpoints(&mut doc, cfg);
    require_valid(&validate(AssetRef::Pattern(&doc)), "pattern document")?;
    let metrics = json!({
        "panels": doc.panels.iter().enumerate().map(|(i, p)| json!({
            "panel": i,
            "segments": p.segments.len(),
            "merge_iterations": traces[i].iterations.len(),
            "initial_segments": traces[i].initial_segments,
        })).collect::<Vec<_>>(),
        "stitches": doc.stitches.len(),
        "grouping": { "runs_found": group.runs_found, "orphan_pairs": group.orphan_pairs },
        "endpoints": {
            "clusters": endpoints.clusters,
            "moved": endpoints.endpoints_moved,
            "max_spread_before": endpoints.max_spread_before,
            "max_spread_after": endpoints.max_spread_after,
        },
    });
    Ok(VectorizeStage { doc, metrics })
}

/// Outcome of the assemble stage.
struct AssembleStage {
    mesh: GarmentMesh,
    report: RelaxReport,
    metrics: Value,
}

fn run_assemble_stage(
    g: &Garmage,
    points: &BoundaryPointSet,
    pairs: &[PointMatch],
    cfg: &FileConfig,
) -> Result<AssembleStage, CliError> {
    let mesh = decode_garment(g, &cfg.codec);
    let pitches: Vec<f64> = g
        .panels
        .iter()
        .map(|p| {
            PanelMapping::from_frame(
                &p.frame,
                p.image.width,
                p.image.height,
                cfg.codec.uv_margin_px,
            )
            .pitch()
        })
        .collect();
    let (mesh, report) = close_seams(mesh, points, pairs, &pitches, &cfg.relax)?;
    let metrics = json!({
        "stitch_pairs": mesh.stitches.len(),
        "initial_gap": report.initial_gap,
        "final_gap": report.gap_history.last().copied().unwrap_or(report.initial_gap),
        "gap_history": report.gap_history,
        "outer_iterations": report.outer_iterations,
        "converged": report.converged,
        "max_strain": report.max_strain,
        "strain_ok": report.strain_ok,
    });
    Ok(AssembleStage {
        mesh,
        report,
        metrics,
    })
}

/// Wraps stage metrics and timings into the standard report shape. All
/// timings live under the single top-level `timings_ms` key so exact
/// comparisons can strip them in one step.
fn stage_report(stages: Value, timings: &BTreeMap<String, f64>) -> Value {
    json!({
        "version": 1,
        "stages": stages,
        "timings_ms": timings,
    })
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_encode(
    cfg: &FileConfig,
    input: &Path,
    out: &Path,
    res: Option<usize>,
    report: Option<&Path>,
) -> Result<u8, CliError> {
    let mut codec = cfg.codec.clone();
    if let Some(r) = res {
        codec.resolution = r;
    }
    let mesh = load_mesh(input)?;
    require_valid(&validate(AssetRef::Mesh(&mesh)), "input mesh")?;
    let t0 = Instant::now();
    let g = encode_garment(&mesh, &codec)?;
    let encode_ms = ms_since(t0);
    at_path(out, save_gmg(&g, out))?;
    if let Some(rp) = report {
        let mut timings = BTreeMap::new();
        timings.insert("encode".to_string(), encode_ms);
        let stages = json!({
            "encode": {
                "panels": g.panels.len(),
                "resolution": codec.resolution,
                "vertices": mesh.vertices.len(),
                "faces": mesh.faces.len(),
            }
        });
        write_json(rp, &stage_report(stages, &timings))?;
    }
    Ok(0)
}

fn cmd_decode(cfg: &FileConfig, input: &Path, out: &Path) -> Result<u8, CliError> {
    let g = load_garmage(input)?;
    let mesh = decode_garment(&g, &cfg.codec);
    at_path(out, save_obj(&mesh, out))?;
    Ok(0)
}

fn cmd_contour(
    cfg: &FileConfig,
    input: &Path,
    out: &Path,
    points: Option<usize>,
) -> Result<u8, CliError> {
    let mut cfg = cfg.clone();
    if let Some(n) = points {
        cfg.resample.total_points = n;
    }
    let g = load_garmage(input)?;
    let set = resample(&g, &cfg)?;
    let doc = json!({
        "version": 1,
        "panel_counts": set.panel_counts,
        "points": set.points,
    });
    write_json(out, &doc)?;
    Ok(0)
}

fn cmd_match(
    cfg: &FileConfig,
    input: &Path,
    out: &Path,
    report: Option<&Path>,
) -> Result<u8, CliError> {
    let g = load_garmage(input)?;
    let t0 = Instant::now();
    let points = resample(&g, cfg)?;
    let contour_ms = ms_since(t0);
    let t1 = Instant::now();
    let stage = run_match_stage(&points, &cfg.matcher)?;
    let match_ms = ms_since(t1);
    let doc = PointStitchDoc::new(points.points.len(), &stage.pairs);
    at_path(out, save_point_stitches(&doc, out))?;
    if let Some(rp) = report {
        let mut timings = BTreeMap::new();
        timings.insert("contour".to_string(), contour_ms);
        timings.insert("match".to_string(), match_ms);
        write_json(rp, &stage_report(json!({ "match": stage.metrics }), &timings))?;
    }
    Ok(0)
}

/// Loads a point-stitch document and checks it indexes the same boundary
/// sampling that the current configuration reproduces.
fn load_stitches_for(points: &BoundaryPointSet, path: &Path) -> Result<Vec<PointMatch>, CliError> {
    let doc = at_path(path, load_point_stitches(path))?;
    if doc.total_points != points.points.len() {
        return Err(CliError::invalid(format!(
            "{}: stitch document indexes a boundary sampling of {} points, \
             but the current configuration produces {} points",
            path.display(),
            doc.total_points,
            points.points.len()
        )));
    }
    Ok(doc.pairs)
}

fn cmd_vectorize(
    cfg: &FileConfig,
    input: &Path,
    stitches: &Path,
    out: &Path,
    report: Option<&Path>,
) -> Result<u8, CliError> {
    let g = load_garmage(input)?;
    let points = resample(&g, cfg)?;
    let pairs = load_stitches_for(&points, stitches)?;
    let t0 = Instant::now();
    let stage = run_vectorize_stage(&g, &points, &pairs, &cfg.vectorizer)?;
    let vectorize_ms = ms_since(t0);
    at_path(out, save_pattern(&stage.doc, out))?;
    if let Some(rp) = report {
        let mut timings = BTreeMap::new();
        timings.insert("vectorize".to_string(), vectorize_ms);
        write_json(
            rp,
            &stage_report(json!({ "vectorize": stage.metrics }), &timings),
        )?;
    }
    Ok(0)
}

fn cmd_assemble(
    cfg: &FileConfig,
    input: &Path,
    stitches: &Path,
    out: &Path,
    report: Option<&Path>,
) -> Result<u8, CliError> {
    let g = load_garmage(input)?;
    let points = resample(&g, cfg)?;
    let pairs = load_stitches_for(&points, stitches)?;
    let t0 = Instant::now();
    let stage = run_assemble_stage(&g, &points, &pairs, cfg)?;
    let assemble_ms = ms_since(t0);
    at_path(out, save_obj(&stage.mesh, out))?;
    if let Some(rp) = report {
        let mut timings = BTreeMap::new();
        timings.insert("assemble".to_string(), assemble_ms);
        write_json(
            rp,
            &stage_report(json!({ "assemble": stage.metrics }), &timings),
        )?;
    }
    if stage.report.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: relaxation stopped after {} outer iterations with gap {:.6} m (tolerance {:.6} m)",
            stage.report.outer_iterations,
            stage.report.gap_history.last().copied().unwrap_or(stage.report.initial_gap),
            cfg.relax.gap_tol
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_pipeline(
    cfg: &FileConfig,
    input: &Path,
    out_dir: &Path,
    res: Option<usize>,
) -> Result<u8, CliError> {
    let mut cfg = cfg.clone();
    if let Some(r) = res {
        cfg.codec.resolution = r;
    }
    at_path(out_dir, std::fs::create_dir_all(out_dir))?;

    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut stages = serde_json::Map::new();

    // Load + validate.
    let mesh = load_mesh(input)?;
    require_valid(&validate(AssetRef::Mesh(&mesh)), "input mesh")?;

    // Encode.
    let t = Instant::now();
    let g = encode_garment(&mesh, &cfg.codec)?;
    timings.insert("encode".into(), ms_since(t));
    let gmg_path = out_dir.join("garment.gmg");
    at_path(&gmg_path, save_gmg(&g, &gmg_path))?;
    stages.insert(
        "encode".into(),
        json!({
            "panels": g.panels.len(),
            "resolution": cfg.codec.resolution,
            "vertices": mesh.vertices.len(),
            "faces": mesh.faces.len(),
        }),
    );

    // Contour.
    let t = Instant::now();
    let points = resample(&g, &cfg)?;
    timings.insert("contour".into(), ms_since(t));
    let boundary_path = out_dir.join("boundary.json");
    write_json(
        &boundary_path,
        &json!({
            "version": 1,
            "panel_counts": points.panel_counts,
            "points": points.points,
        }),
    )?;
    stages.insert(
        "contour".into(),
        json!({
            "total_points": points.points.len(),
            "panel_counts": points.panel_counts,
        }),
    );

    // Match.
    let t = Instant::now();
    let mstage = run_match_stage(&points, &cfg.matcher)?;
    timings.insert("match".into(), ms_since(t));
    let stitches_path = out_dir.join("stitches.json");
    let doc = PointStitchDoc::new(points.points.len(), &mstage.pairs);
    at_path(&stitches_path, save_point_stitches(&doc, &stitches_path))?;
    stages.insert("match".into(), mstage.metrics.clone());

    // Vectorize.
    let t = Instant::now();
    let vstage = run_vectorize_stage(&g, &points, &mstage.pairs, &cfg.vectorizer)?;
    timings.insert("vectorize".into(), ms_since(t));
    let pattern_path = out_dir.join("pattern.json");
    at_path(&pattern_path, save_pattern(&vstage.doc, &pattern_path))?;
    stages.insert("vectorize".into(), vstage.metrics.clone());

    // Assemble.
    let t = Instant::now();
    let astage = run_assemble_stage(&g, &points, &mstage.pairs, &cfg)?;
    timings.insert("assemble".into(), ms_since(t));
    let closed_path = out_dir.join("closed.obj");
    at_path(&closed_path, save_obj(&astage.mesh, &closed_path))?;
    stages.insert("assemble".into(), astage.metrics.clone());

    let report_path = out_dir.join("report.json");
    write_json(&report_path, &stage_report(Value::Object(stages), &timings))?;

    if astage.report.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: relaxation stopped after {} outer iterations with gap {:.6} m (tolerance {:.6} m)",
            astage.report.outer_iterations,
            astage
                .report
                .gap_history
                .last()
                .copied()
                .unwrap_or(astage.report.initial_gap),
            cfg.relax.gap_tol
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_synth(template: Template, params: &TemplateParams, out: &Path) -> Result<u8, CliError> {
    let output = generate(template, params)?;
    let mut mesh = output.mesh;
    mesh.stitches = output
        .seams
        .iter()
        .flat_map(|s| s.verts.iter().copied())
        .collect();
    at_path(out, save_obj(&mesh, out))?;
    Ok(0)
}

fn cmd_validate(input: &Path) -> Result<u8, CliError> {
    let ext = input
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let report = match ext.as_str() {
        "obj" => validate(AssetRef::Mesh(&load_mesh(input)?)),
        "gmg" => validate(AssetRef::Garmage(&load_garmage(input)?)),
        "json" => {
            let doc = at_path(input, load_pattern(input))?;
            validate(AssetRef::Pattern(&doc))
        }
        other => {
            return Err(CliError::invalid(format!(
                "{}: unknown asset extension {:?} (expected obj, gmg, or json)",
                input.display(),
                other
            )))
        }
    };
    let text = serde_json::to_string_pretty(&json!({
        "valid": report.is_valid(),
        "violations": report.violations,
    }))
    .map_err(|e| CliError::invalid(e.to_string()))?;
    println!("{text}");
    if report.is_valid() {
        Ok(0)
    } else {
        Ok(EXIT_INVALID)
    }
}
