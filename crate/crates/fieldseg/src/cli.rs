//! The `fieldseg` command line.
//!
//! Exit codes: 0 on success, 1 when a stage or file operation fails, 2 for
//! invalid flags or parameter values.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fieldseg_core::eval::{evaluate, rasterize, EvalParams, Rasterized};
use fieldseg_core::pipeline::{edge_stage, finish, ndvi_stage, snic_stage, PipelineOutput};
use fieldseg_core::preprocess::apply_qa_mask;
use fieldseg_core::snic::snic_segment_with_stats;
use fieldseg_core::synthgen::{generate, Layout, SceneSpec};
use fieldseg_core::{PipelineParams, Raster};
use serde::Serialize;

use crate::bsq::write_bsq;
use crate::geotiff::DEFAULT_REFLECTANCE_SCALE;
use crate::io::{labels_to_raster, mask_to_raster, raster_to_labels, raster_to_mask, read_raster, stack_bands, RasterFormat};
use crate::render::{render_overlay, Overlay};
use crate::vector::{geojson_string, read_geojson, write_geojson};

#[derive(Debug, Parser)]
#[command(name = "fieldseg", version, about = "Delineate agricultural field boundaries from NDVI rasters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

// Parsed once per process, so the size spread between variants is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic NDVI scene with known field rectangles
    Synth(SynthArgs),
    /// Cloud-mask a reflectance image and compute NDVI
    Ndvi(NdviArgs),
    /// SNIC superpixels of an NDVI raster
    Snic(SnicArgs),
    /// Canny edges of an NDVI raster
    Canny(CannyArgs),
    /// Full pipeline: NDVI, superpixels, edges, fusion, closing, polygons
    Segment(SegmentArgs),
    /// Compare predicted fields against ground truth
    Eval(EvalArgs),
    /// Render a raster band with boundary or label overlays to PNG
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input raster; repeat to stack the bands of several files in order
    #[arg(long = "input", short = 'i')]
    pub inputs: Vec<PathBuf>,
    /// Input format (default: from the file extension)
    #[arg(long, value_enum)]
    pub format: Option<RasterFormat>,
    /// Divisor applied to integer GeoTIFF samples
    #[arg(long, default_value_t = DEFAULT_REFLECTANCE_SCALE)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct MaskFlags {
    /// QA bitmask raster used for cloud masking
    #[arg(long)]
    pub qa: Option<PathBuf>,
    /// QA bits that mark a pixel as cloudy
    #[arg(long, value_delimiter = ',')]
    pub cloud_bits: Option<Vec<u32>>,
    /// Zero-based red band index
    #[arg(long)]
    pub red_band: Option<usize>,
    /// Zero-based near-infrared band index
    #[arg(long)]
    pub nir_band: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SnicFlags {
    /// Superpixel seed spacing in pixels
    #[arg(long)]
    pub size: Option<usize>,
    /// Weight of spatial against spectral distance
    #[arg(long)]
    pub compactness: Option<f64>,
    /// Pixel connectivity, 4 or 8
    #[arg(long)]
    pub connectivity: Option<u8>,
}

#[derive(Debug, Args)]
pub struct CannyFlags {
    /// Gaussian smoothing sigma in pixels
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Low hysteresis threshold on gradient magnitude
    #[arg(long)]
    pub low: Option<f64>,
    /// High hysteresis threshold on gradient magnitude
    #[arg(long)]
    pub high: Option<f64>,
    /// Use this percentile of the gradient magnitude as the low threshold
    #[arg(long)]
    pub low_percentile: Option<f64>,
    /// Use this percentile of the gradient magnitude as the high threshold
    #[arg(long)]
    pub high_percentile: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FieldFlags {
    /// Square closing kernel width (odd)
    #[arg(long)]
    pub close_kernel: Option<usize>,
    /// Smallest field kept, in pixels
    #[arg(long)]
    pub min_area: Option<usize>,
    /// Minimum NDVI difference between superpixel means for a boundary
    #[arg(long)]
    pub snic_contrast: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    /// Standard deviation of the additive Gaussian noise
    #[arg(long, default_value_t = 0.0)]
    pub noise: f32,
    /// Minimum NDVI difference between neighbouring fields
    #[arg(long, default_value_t = 0.3)]
    pub gap: f32,
    #[arg(long, default_value_t = 0.0)]
    pub min_value: f32,
    #[arg(long, default_value_t = 0.9)]
    pub max_value: f32,
    /// Explicit per-field NDVI values, row-major
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f32>>,
    /// Width of the box blur softening field transitions
    #[arg(long, default_value_t = 0)]
    pub boundary_width: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// NDVI raster output (BSQ)
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth GeoJSON output
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NdviArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub mask: MaskFlags,
    /// NDVI raster output (BSQ)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SnicArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub snic: SnicFlags,
    /// Label raster output (BSQ, -1 = unlabelled)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CannyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub canny: CannyFlags,
    /// Edge mask output (BSQ, 1 = edge)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub mask: MaskFlags,
    #[command(flatten)]
    pub snic: SnicFlags,
    #[command(flatten)]
    pub canny: CannyFlags,
    #[command(flatten)]
    pub fields: FieldFlags,
    /// Treat the input as an NDVI raster instead of reflectances
    #[arg(long)]
    pub input_is_ndvi: bool,
    /// Reuse a superpixel label raster instead of running SNIC
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Reuse an edge mask raster instead of running Canny
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Field GeoJSON output (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// PNG preview of NDVI with the final boundaries
    #[arg(long)]
    pub png: Option<PathBuf>,
    /// Directory receiving every intermediate raster
    #[arg(long)]
    pub save_intermediate: Option<PathBuf>,
    /// Print the effective parameters as JSON and exit
    #[arg(long)]
    pub print_params: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted fields (GeoJSON)
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth fields (GeoJSON)
    #[arg(long)]
    pub truth: PathBuf,
    /// Raster defining the pixel grid both files are burned into
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<RasterFormat>,
    #[arg(long, default_value_t = 0.5)]
    pub iou_threshold: f64,
    /// Boundary match tolerance in pixels
    #[arg(long, default_value_t = 2)]
    pub tolerance: usize,
    /// Report output (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Band of the input to show
    #[arg(long, default_value_t = 0)]
    pub band: usize,
    /// Boundary mask raster drawn in the highlight colour
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Label raster tinted per label
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Field GeoJSON, burned into labels
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// PNG output
    #[arg(long)]
    pub out: PathBuf,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameter values (exit 2).
    Usage(String),
    /// A stage or file operation failed (exit 1).
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Ndvi(a) => cmd_ndvi(a),
        Command::Snic(a) => cmd_snic(a),
        Command::Canny(a) => cmd_canny(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Render(a) => cmd_render(a),
    }
}

/// Default parameters overridden by whichever flag groups a command has.
fn params_from(
    mask: Option<&MaskFlags>,
    snic: Option<&SnicFlags>,
    canny: Option<&CannyFlags>,
    fields: Option<&FieldFlags>,
) -> std::result::Result<PipelineParams, Failure> {
    let mut p = PipelineParams::default();
    if let Some(m) = mask {
        if let Some(bits) = &m.cloud_bits {
            p.cloud_bits = bits.clone();
        }
        p.red_band = m.red_band;
        p.nir_band = m.nir_band;
        if p.cloud_bits.iter().any(|&b| b >= 64) {
            return Err(Failure::Usage("cloud bits must be below 64".into()));
        }
    }
    if let Some(s) = snic {
        p.size = s.size.unwrap_or(p.size);
        p.compactness = s.compactness.unwrap_or(p.compactness);
        p.connectivity = s.connectivity.unwrap_or(p.connectivity);
    }
    if let Some(c) = canny {
        p.sigma = c.sigma.unwrap_or(p.sigma);
        p.low = c.low.unwrap_or(p.low);
        p.high = c.high.unwrap_or(p.high);
        p.low_percentile = c.low_percentile;
        p.high_percentile = c.high_percentile;
    }
    if let Some(f) = fields {
        p.close_kernel = f.close_kernel.unwrap_or(p.close_kernel);
        p.min_area_px = f.min_area.unwrap_or(p.min_area_px);
        p.snic_contrast = f.snic_contrast.unwrap_or(p.snic_contrast);
    }
    p.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(p)
}

fn load_input(input: &InputArgs) -> std::result::Result<Raster, Failure> {
    if input.inputs.is_empty() {
        return Err(Failure::Usage("at least one --input is required".into()));
    }
    let rasters = input
        .inputs
        .iter()
        .map(|p| read_raster(p, input.format, input.scale))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(stack_bands(&rasters)?)
}

/// QA flags are integers, so they are never rescaled.
fn load_qa(mask: &MaskFlags) -> anyhow::Result<Option<Raster>> {
    mask.qa
        .as_ref()
        .map(|p| read_raster(p, None, 1.0).with_context(|| "reading QA raster"))
        .transpose()
}

fn single_band(r: Raster, what: &str) -> std::result::Result<Raster, Failure> {
    if r.bands() != 1 {
        return Err(Failure::Run(anyhow::anyhow!(
            "{what} must be a single-band raster, found {} bands",
            r.bands()
        )));
    }
    Ok(r)
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let spec = SceneSpec {
        width: a.width,
        height: a.height,
        layout: Layout::Grid { cols: a.cols, rows: a.rows },
        value_range: (a.min_value, a.max_value),
        min_gap: a.gap,
        values: a.values,
        noise_sigma: a.noise,
        boundary_width: a.boundary_width,
        seed: a.seed,
    };
    let scene = generate(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    write_bsq(&scene.ndvi, &a.out)?;
    if let Some(t) = &a.truth {
        write_geojson(&scene.truth, t)?;
    }
    eprintln!(
        "fieldseg: wrote {}x{} scene with {} fields",
        a.width,
        a.height,
        scene.truth.len()
    );
    Ok(())
}

fn cmd_ndvi(a: NdviArgs) -> CmdResult {
    let params = params_from(Some(&a.mask), None, None, None)?;
    let image = load_input(&a.input)?;
    let qa = load_qa(&a.mask)?;
    let ndvi = ndvi_stage(&image, qa.as_ref(), &params)?;
    write_bsq(&ndvi, &a.out)?;
    eprintln!("fieldseg: {} of {} pixels valid", ndvi.valid_count(), ndvi.pixel_count());
    Ok(())
}

fn cmd_snic(a: SnicArgs) -> CmdResult {
    let params = params_from(None, Some(&a.snic), None, None)?;
    let ndvi = load_input(&a.input)?;
    let (labels, stats) = snic_segment_with_stats(&ndvi, &params.snic().map_err(|e| Failure::Usage(e.to_string()))?)?;
    write_bsq(&labels_to_raster(&labels, &ndvi), &a.out)?;
    eprintln!(
        "fieldseg: {} superpixels ({} seeds, {} orphans, {} pushes)",
        labels.cluster_count(),
        stats.seeds,
        stats.orphan_clusters,
        stats.pushes
    );
    Ok(())
}

fn cmd_canny(a: CannyArgs) -> CmdResult {
    let params = params_from(None, None, Some(&a.canny), None)?;
    let ndvi = single_band(load_input(&a.input)?, "canny input")?;
    let (edges, (low, high)) = edge_stage(&ndvi, &params)?;
    write_bsq(&mask_to_raster(&edges, &ndvi), &a.out)?;
    eprintln!("fieldseg: {} edge pixels (thresholds {low} / {high})", edges.count());
    Ok(())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    params: &'a PipelineParams,
    /// Absent when edges were supplied rather than computed.
    thresholds: Option<(f64, f64)>,
    superpixels: usize,
    fields: usize,
}

fn cmd_segment(a: SegmentArgs) -> CmdResult {
    let params = params_from(Some(&a.mask), Some(&a.snic), Some(&a.canny), Some(&a.fields))?;
    if a.print_params {
        println!("{}", serde_json::to_string_pretty(&params)?);
        return Ok(());
    }
    let started = Instant::now();
    let image = load_input(&a.input)?;
    let qa = load_qa(&a.mask)?;
    let ndvi = if a.input_is_ndvi {
        let ndvi = single_band(image, "NDVI input")?;
        match &qa {
            Some(qa) => apply_qa_mask(&ndvi, qa, &params.cloud_bits)?,
            None => ndvi,
        }
    } else {
        ndvi_stage(&image, qa.as_ref(), &params)?
    };
    let labels = match &a.labels {
        Some(p) => {
            let r = read_raster(p, None, 1.0)?;
            raster_to_labels(&r, p)?
        }
        None => snic_stage(&ndvi, &params)?,
    };
    let (edges, thresholds) = match &a.edges {
        Some(p) => {
            let r = read_raster(p, None, 1.0)?;
            (raster_to_mask(&r, p)?, None)
        }
        None => {
            let (e, t) = edge_stage(&ndvi, &params)?;
            (e, Some(t))
        }
    };
    let out = finish(&ndvi, labels, edges, thresholds.unwrap_or((params.low, params.high)), &params)?;

    match &a.out {
        Some(p) => write_geojson(&out.fields, p)?,
        None => print!("{}", geojson_string(&out.fields)?),
    }
    if let Some(p) = &a.png {
        let overlay = Overlay {
            boundaries: Some(&out.boundaries),
            ..Overlay::default()
        };
        render_overlay(&out.ndvi, 0, overlay, p)?;
    }
    let summary = RunSummary {
        params: &params,
        thresholds,
        superpixels: out.snic_labels.cluster_count(),
        fields: out.fields.len(),
    };
    if let Some(dir) = &a.save_intermediate {
        save_intermediate(dir, &out, &summary)?;
    }
    eprintln!(
        "fieldseg: {} fields from {} superpixels in {:.2} s",
        summary.fields,
        summary.superpixels,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

/// File names used by `--save-intermediate`.
pub mod intermediate {
    pub const NDVI: &str = "ndvi.bsq";
    pub const SNIC_LABELS: &str = "snic_labels.bsq";
    pub const SNIC_BOUNDARIES: &str = "snic_boundaries.bsq";
    pub const EDGES: &str = "edges.bsq";
    pub const FUSED: &str = "fused.bsq";
    pub const BOUNDARIES: &str = "boundaries.bsq";
    pub const REGIONS: &str = "regions.bsq";
    pub const SUMMARY: &str = "run.json";
}

fn save_intermediate(dir: &Path, out: &PipelineOutput, summary: &RunSummary<'_>) -> anyhow::Result<()> {
    use intermediate::*;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let like = &out.ndvi;
    write_bsq(&out.ndvi, dir.join(NDVI))?;
    write_bsq(&labels_to_raster(&out.snic_labels, like), dir.join(SNIC_LABELS))?;
    write_bsq(&mask_to_raster(&out.snic_boundaries, like), dir.join(SNIC_BOUNDARIES))?;
    write_bsq(&mask_to_raster(&out.edges, like), dir.join(EDGES))?;
    write_bsq(&mask_to_raster(&out.fused, like), dir.join(FUSED))?;
    write_bsq(&mask_to_raster(&out.boundaries, like), dir.join(BOUNDARIES))?;
    write_bsq(&labels_to_raster(&out.regions, like), dir.join(REGIONS))?;
    let path = dir.join(SUMMARY);
    fs::write(&path, serde_json::to_string_pretty(summary)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn burn(path: &Path, frame: &Raster, what: &str) -> anyhow::Result<Rasterized> {
    let fields = read_geojson(path, frame.width(), frame.height(), *frame.geotransform())?;
    let r = rasterize(&fields, frame.width(), frame.height()).with_context(|| format!("rasterizing {what} {}", path.display()))?;
    for w in &r.warnings {
        eprintln!("fieldseg: warning: {what}: {w:?}");
    }
    Ok(r)
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    if !(0.0..=1.0).contains(&a.iou_threshold) {
        return Err(Failure::Usage(format!("iou threshold must be in [0, 1], got {}", a.iou_threshold)));
    }
    let frame = read_raster(&a.frame, a.format, DEFAULT_REFLECTANCE_SCALE)?;
    let truth = burn(&a.truth, &frame, "truth")?;
    let pred = burn(&a.pred, &frame, "prediction")?;
    let params = EvalParams {
        iou_threshold: a.iou_threshold,
        tolerance_px: a.tolerance,
    };
    let report = evaluate(&pred.labels, &truth.labels, params)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let base = load_input(&a.input)?;
    if a.band >= base.bands() {
        return Err(Failure::Usage(format!("band {} out of range for {} band(s)", a.band, base.bands())));
    }
    let mask = match &a.mask {
        Some(p) => Some(raster_to_mask(&read_raster(p, None, 1.0)?, p)?),
        None => None,
    };
    let labels = match (&a.labels, &a.fields) {
        (Some(_), Some(_)) => return Err(Failure::Usage("use either --labels or --fields, not both".into())),
        (Some(p), None) => Some(raster_to_labels(&read_raster(p, None, 1.0)?, p)?),
        (None, Some(p)) => Some(burn(p, &base, "fields")?.labels),
        (None, None) => None,
    };
    let overlay = Overlay {
        labels: labels.as_ref(),
        boundaries: mask.as_ref(),
    };
    render_overlay(&base, a.band, overlay, &a.out)?;
    Ok(())
}
