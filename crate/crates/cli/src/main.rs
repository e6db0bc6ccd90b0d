use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use planvec_core::pipeline::{defaults_table, PipelineConfig};

mod commands;
mod error;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "planvec", version, about = "Vectorize raster floor plans into one SVG path per wall")]
#[command(after_help = defaults_table())]
struct Cli {
    /// Output file (stdout when omitted).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Emit JSON instead of SVG (vectorize, synth) or CSV (guidance-demo).
    #[arg(long, global = true)]
    json: bool,

    /// Seed for synthetic plans, noise and the demo's initial latent.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a PNG/PGM/PPM floor plan into an SVG with one path per wall.
    #[command(after_help = defaults_table())]
    Vectorize(VectorizeArgs),
    /// Generate a synthetic plan: raster to -o, ground truth next to it.
    Synth(SynthArgs),
    /// Generate, rasterize, vectorize and score a range of seeds.
    #[command(after_help = defaults_table())]
    Bench(BenchArgs),
    /// Print the masked-mean trajectory of guided latent updates as CSV.
    GuidanceDemo(DemoArgs),
}

/// Pipeline overrides; unset values fall back to defaults scaled to the image width.
#[derive(Args, Debug, Clone, Default)]
struct PipelineArgs {
    /// Binarization threshold; gray values below it are ink.
    #[arg(long)]
    threshold: Option<u8>,
    /// Corner clustering tolerance in pixels.
    #[arg(long)]
    snap_tol: Option<f64>,
    #[arg(long)]
    min_fill: Option<f64>,
    #[arg(long)]
    min_gain: Option<f64>,
    #[arg(long)]
    min_thickness: Option<f64>,
    #[arg(long)]
    max_thickness: Option<f64>,
    #[arg(long)]
    min_length: Option<f64>,
    /// Keep contained and mergeable rectangles.
    #[arg(long)]
    no_postprocess: bool,
    /// Run corner detection on the grayscale image instead of the thresholded mask.
    #[arg(long)]
    grayscale_corners: bool,
}

impl PipelineArgs {
    fn config(&self, width: usize) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::scaled(width);
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(tol) = self.snap_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Input(format!("--snap-tol must be a positive number, got {tol}")));
            }
            cfg.snap_tol = tol;
        }
        let fit = &mut cfg.fit;
        for (slot, value) in [
            (&mut fit.min_fill, self.min_fill),
            (&mut fit.min_gain, self.min_gain),
            (&mut fit.min_thickness, self.min_thickness),
            (&mut fit.max_thickness, self.max_thickness),
            (&mut fit.min_length, self.min_length),
        ] {
            if let Some(v) = value {
                *slot = v;
            }
        }
        cfg.fit.validate().map_err(|e| CliError::Input(e.to_string()))?;
        cfg.postprocess = !self.no_postprocess;
        if self.grayscale_corners {
            cfg.corner_source = planvec_core::CornerSource::Grayscale;
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct VectorizeArgs {
    /// Input raster (PNG, PGM or PPM).
    input: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write detected corners as CSV (x,y,response) to this file.
    #[arg(long, value_name = "PATH")]
    debug_corners: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct PlanArgs {
    /// Canvas width and height in pixels.
    #[arg(long, default_value_t = 512)]
    size: u32,
    /// Wall thickness in pixels.
    #[arg(long, default_value_t = 8)]
    thickness: u32,
    #[arg(long, default_value_t = 24)]
    door_width: u32,
    #[arg(long, default_value_t = 3)]
    min_partitions: u32,
    #[arg(long, default_value_t = 5)]
    max_partitions: u32,
    /// Smallest room side in pixels.
    #[arg(long, default_value_t = 96)]
    min_room: u32,
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    /// Corrupt the raster with the default noise model (speckle 0.0005, jitter 1, gray 245).
    #[arg(long)]
    noise: bool,
    /// Overrides the speckle rate (implies --noise).
    #[arg(long)]
    speckle_rate: Option<f64>,
    /// Overrides the edge jitter in pixels (implies --noise).
    #[arg(long)]
    edge_jitter: Option<u32>,
    /// Overrides the background gray level (implies --noise).
    #[arg(long)]
    gray_level: Option<u8>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Inclusive seed range `a..b`, or a single seed; `b < a` is empty.
    #[arg(long, default_value = "0..49")]
    seeds: String,
    /// IoU needed for a predicted wall to match a true one.
    #[arg(long, default_value_t = 0.7)]
    iou: f64,
    /// Write `elapsed_seconds` as null so repeated runs are byte-identical.
    #[arg(long)]
    omit_timing: bool,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// Side of the square image (latent and pixel grids coincide).
    #[arg(long, default_value_t = 16)]
    size: usize,
    /// Region pushed towards white: left-half, top-half, border, checker or all.
    #[arg(long, default_value = "left-half")]
    mask: String,
    /// Loss scale s.
    #[arg(long, default_value_t = 0.25)]
    scale: f64,
    /// Comma-separated cumulative schedule alpha_bar.
    #[arg(long, default_value = "0.5")]
    alpha_bar: String,
    /// Schedule index used for every step.
    #[arg(long, default_value_t = 0)]
    t: usize,
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Vectorize(args) => commands::vectorize(&cli, args),
        Command::Synth(args) => commands::synth(&cli, args),
        Command::Bench(args) => commands::bench(&cli, args),
        Command::GuidanceDemo(args) => commands::guidance_demo(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
