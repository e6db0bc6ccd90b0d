use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use planvec_core::error::GuidanceError;
use planvec_core::guidance::{guided_descent_demo, PixelMask, Tensor};
use planvec_core::io::{load_image, save_image};
use planvec_core::pipeline::{vectorize as run_pipeline, PipelineConfig};
use planvec_core::synth::{add_noise, generate_plan, match_walls, rasterize, NoiseConfig, PlanConfig, SplitMix64};
use planvec_core::{to_svg, VectorPlan};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::{BenchArgs, Cli, DemoArgs, NoiseArgs, PlanArgs, SynthArgs, VectorizeArgs};

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn plan_text(plan: &VectorPlan, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(plan).expect("plans serialize");
        s.push('\n');
        s
    } else {
        to_svg(plan).text
    }
}

pub fn vectorize(cli: &Cli, args: &VectorizeArgs) -> Result<(), CliError> {
    let img = load_image(&args.input)?;
    let cfg = args.pipeline.config(img.width())?;
    let out = run_pipeline(&img, &cfg)?;

    if let Some(path) = &args.debug_corners {
        let mut csv = String::from("x,y,response\n");
        for c in &out.corners {
            csv.push_str(&format!("{},{},{}\n", c.x, c.y, c.response));
        }
        fs::write(path, csv).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    if out.plan.walls.is_empty() {
        eprintln!("warning: no walls found in {}", args.input.display());
    }
    emit(cli.output.as_deref(), plan_text(&out.plan, cli.json).as_bytes())?;
    let summary = json!({
        "paths": out.plan.walls.len(),
        "elapsed_seconds": out.elapsed_seconds,
        "image_size": [img.width(), img.height()],
    });
    eprintln!("{summary}");
    Ok(())
}

impl PlanArgs {
    fn config(&self) -> Result<PlanConfig, CliError> {
        let cfg = PlanConfig {
            canvas_width: self.size,
            canvas_height: self.size,
            thickness: self.thickness,
            door_width: self.door_width,
            min_partitions: self.min_partitions,
            max_partitions: self.max_partitions,
            min_room: self.min_room,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NoiseArgs {
    /// `None` when no noise flag was given.
    fn config(&self) -> Result<Option<NoiseConfig>, CliError> {
        if !self.noise && self.speckle_rate.is_none() && self.edge_jitter.is_none() && self.gray_level.is_none() {
            return Ok(None);
        }
        let d = NoiseConfig::default();
        let cfg = NoiseConfig {
            speckle_rate: self.speckle_rate.unwrap_or(d.speckle_rate),
            edge_jitter: self.edge_jitter.unwrap_or(d.edge_jitter),
            gray_level: self.gray_level.unwrap_or(d.gray_level),
        };
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

pub fn synth(cli: &Cli, args: &SynthArgs) -> Result<(), CliError> {
    let raster_path = cli
        .output
        .as_ref()
        .ok_or_else(|| CliError::Input("synth needs -o <raster.png|raster.pgm>".into()))?;
    let ext = raster_path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    if !matches!(ext.as_deref(), Some("png" | "pgm" | "ppm")) {
        return Err(CliError::Input(format!("{}: raster must end in .png, .pgm or .ppm", raster_path.display())));
    }
    let plan_cfg = args.plan.config()?;
    let noise = args.noise.config()?;

    let plan = generate_plan(cli.seed, &plan_cfg)?;
    let binary = rasterize(&plan);
    let raster = match &noise {
        Some(n) => add_noise(&binary, cli.seed, n)?,
        None => binary.to_gray(),
    };
    save_image(raster_path, &raster)?;

    let truth = VectorPlan::new(plan.canvas_width, plan.canvas_height, plan.walls.clone());
    let truth_path: PathBuf = raster_path.with_extension(if cli.json { "json" } else { "svg" });
    fs::write(&truth_path, plan_text(&truth, cli.json))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", truth_path.display())))?;
    eprintln!(
        "wrote {} and {} ({} walls, seed {})",
        raster_path.display(),
        truth_path.display(),
        truth.walls.len(),
        cli.seed
    );
    Ok(())
}

/// Parses `a..b` (inclusive) or a single seed.
fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Input(format!("seed range {s:?} is not of the form a..b"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            Ok(if b < a { Vec::new() } else { (a..=b).collect() })
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

#[derive(Serialize)]
struct BenchParams<'a> {
    plan: &'a PlanConfig,
    noise: Option<&'a NoiseConfig>,
    pipeline: &'a PipelineConfig,
    iou_threshold: f64,
}

#[derive(Serialize)]
struct BenchRecord<'a> {
    seed: u64,
    precision: f64,
    recall: f64,
    f1: f64,
    path_count_pred: usize,
    path_count_truth: usize,
    elapsed_seconds: Option<f64>,
    params: &'a BenchParams<'a>,
}

pub fn bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    let seeds = parse_seeds(&args.seeds)?;
    if !(args.iou > 0.0 && args.iou <= 1.0) {
        return Err(CliError::Input(format!("--iou must be in (0, 1], got {}", args.iou)));
    }
    let plan_cfg = args.plan.config()?;
    let noise = args.noise.config()?;
    let pipeline = args.pipeline.config(plan_cfg.canvas_width as usize)?;
    let params = BenchParams { plan: &plan_cfg, noise: noise.as_ref(), pipeline: &pipeline, iou_threshold: args.iou };

    // Seeds run in parallel; collect() keeps them in seed order.
    let runs: Vec<Result<String, CliError>> = seeds
        .par_iter()
        .map(|&seed| {
            let plan = generate_plan(seed, &plan_cfg)?;
            let binary = rasterize(&plan);
            let img = match &noise {
                Some(n) => add_noise(&binary, seed, n)?,
                None => binary.to_gray(),
            };
            let out = run_pipeline(&img, &pipeline)?;
            let report = match_walls(&out.plan.walls, &plan.walls, args.iou);
            let record = BenchRecord {
                seed,
                precision: report.precision,
                recall: report.recall,
                f1: report.f1,
                path_count_pred: report.path_count_pred,
                path_count_truth: report.path_count_truth,
                elapsed_seconds: (!args.omit_timing).then_some(out.elapsed_seconds),
                params: &params,
            };
            Ok(serde_json::to_string(&record).expect("records serialize"))
        })
        .collect();

    let mut text = String::new();
    for run in runs {
        text.push_str(&run?);
        text.push('\n');
    }
    emit(cli.output.as_deref(), text.as_bytes())
}

fn demo_mask(name: &str, size: usize) -> Result<PixelMask, CliError> {
    let half = size / 2;
    let mask = match name {
        "left-half" => PixelMask::from_fn(size, size, |x, _| x < half),
        "top-half" => PixelMask::from_fn(size, size, |_, y| y < half),
        "border" => PixelMask::from_fn(size, size, |x, y| x == 0 || y == 0 || x + 1 == size || y + 1 == size),
        "checker" => PixelMask::from_fn(size, size, |x, y| (x + y) % 2 == 0),
        "all" => PixelMask::from_fn(size, size, |_, _| true),
        other => {
            return Err(CliError::Input(format!(
                "unknown mask {other:?} (expected left-half, top-half, border, checker or all)"
            )))
        }
    };
    Ok(mask)
}

pub fn guidance_demo(cli: &Cli, args: &DemoArgs) -> Result<(), CliError> {
    if args.size == 0 {
        return Err(CliError::Input("--size must be positive".into()));
    }
    let mask = demo_mask(&args.mask, args.size)?;
    let alpha_bar = args
        .alpha_bar
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(format!("--alpha-bar: {e}")))?;

    // Initial latent in [0, 1): a dark-ish image the guidance pushes towards white.
    let mut rng = SplitMix64::new(cli.seed);
    let n = args.size * args.size;
    let initial = Tensor::new(vec![1, args.size, args.size], (0..n).map(|_| rng.next_f64()).collect())?;
    let trajectory = guided_descent_demo(&initial, &mask, args.scale, &alpha_bar, args.t, args.steps)?;
    if trajectory.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numeric(GuidanceError::NonFinite("masked mean")));
    }

    let text = if cli.json {
        let rows: Vec<_> = trajectory.iter().enumerate().map(|(k, v)| json!({"step": k, "masked_mean": v})).collect();
        format!("{}\n", serde_json::Value::Array(rows))
    } else {
        let mut csv = String::from("step,masked_mean\n");
        for (k, v) in trajectory.iter().enumerate() {
            csv.push_str(&format!("{k},{v}\n"));
        }
        csv
    };
    emit(cli.output.as_deref(), text.as_bytes())
}
