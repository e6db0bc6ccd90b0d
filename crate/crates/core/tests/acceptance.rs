//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use planvec_core::corners::{detect_corners, shi_tomasi_response, CornerParams};
use planvec_core::guidance::{
    downscale_mask, guided_descent_demo, latent_update, white_loss_grad, GuidanceState, Identity, LatentMap,
    LinearDecoder, PixelMask, Tensor,
};
use planvec_core::pipeline::{vectorize, vectorize_binary, PipelineConfig};
use planvec_core::postprocess::{postprocess, rect_union, VectorPlan};
use planvec_core::raster::{to_rgb, BinaryImage, RasterImage};
use planvec_core::svg::{parse_svg, to_svg, SvgDocument};
use planvec_core::synth::{add_noise, generate_plan, match_walls, rasterize, NoiseConfig, PlanConfig, SplitMix64};
use planvec_core::wallfit::{build_sat, rect_ink, WallRect};

const SEEDS: std::ops::Range<u64> = 0..50;
const IOU_THRESHOLD: f64 = 0.70;
const CLEAN_BUDGET_SECONDS: f64 = 60.0;
const NOISY_MIN_PRECISION: f64 = 0.90;
const NOISY_MIN_RECALL: f64 = 0.90;
const LARGE_BUDGET_SECONDS: f64 = 5.0;
const EIGEN_TOLERANCE: f64 = 1e-9;
const CORNER_RADIUS_PX: f64 = 2.0;
const FD_RELATIVE_TOLERANCE: f64 = 1e-5;
const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn clean_round_trip() -> Outcome {
    let start = Instant::now();
    let cfg = PipelineConfig::scaled(512);
    let mut failures = Vec::new();
    for seed in SEEDS {
        let plan = generate_plan(seed, &PlanConfig::default()).map_err(|e| e.to_string())?;
        let out = vectorize_binary(&rasterize(&plan), &cfg).map_err(|e| e.to_string())?;
        let rep = match_walls(&out.plan.walls, &plan.walls, IOU_THRESHOLD);
        if rep.precision != 1.0 || rep.recall != 1.0 || rep.path_count_pred != rep.path_count_truth {
            failures.push(format!(
                "seed {seed}: P={:.3} R={:.3} paths {}/{}",
                rep.precision, rep.recall, rep.path_count_pred, rep.path_count_truth
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        failures.is_empty() && elapsed < CLEAN_BUDGET_SECONDS,
        format!("{} seeds, {} imperfect {:?}, {elapsed:.2} s total", SEEDS.end - SEEDS.start, failures.len(), failures),
    )
}

fn noisy_robustness() -> Outcome {
    let cfg = PipelineConfig::scaled(512);
    let noise = NoiseConfig { speckle_rate: 0.0005, edge_jitter: 1, gray_level: 245 };
    let (mut p, mut r) = (0.0, 0.0);
    for seed in SEEDS {
        let plan = generate_plan(seed, &PlanConfig::default()).map_err(|e| e.to_string())?;
        let img = add_noise(&rasterize(&plan), seed, &noise).map_err(|e| e.to_string())?;
        let out = vectorize(&img, &cfg).map_err(|e| e.to_string())?;
        let rep = match_walls(&out.plan.walls, &plan.walls, IOU_THRESHOLD);
        p += rep.precision;
        r += rep.recall;
    }
    let n = (SEEDS.end - SEEDS.start) as f64;
    let (p, r) = (p / n, r / n);
    check(
        p >= NOISY_MIN_PRECISION && r >= NOISY_MIN_RECALL,
        format!("mean precision {p:.4} (need {NOISY_MIN_PRECISION}), mean recall {r:.4} (need {NOISY_MIN_RECALL})"),
    )
}

fn large_latency() -> Outcome {
    let cfg = PlanConfig {
        canvas_width: 1024,
        canvas_height: 1024,
        thickness: 16,
        door_width: 48,
        min_room: 192,
        ..PlanConfig::default()
    };
    let plan = generate_plan(0, &cfg).map_err(|e| e.to_string())?;
    let img = to_rgb(&rasterize(&plan));
    let start = Instant::now();
    let out = vectorize(&img, &PipelineConfig::scaled(1024)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(
        elapsed < LARGE_BUDGET_SECONDS,
        format!("1024x1024 plan with {} walls -> {} paths in {elapsed:.3} s", plan.walls.len(), out.plan.walls.len()),
    )
}

/// Smaller eigenvalue of [[a, b], [b, c]] from a Jacobi rotation.
fn jacobi_min_eigen(a: f64, b: f64, c: f64) -> f64 {
    if b == 0.0 {
        return a.min(c);
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    let l1 = co * co * a + 2.0 * s * co * b + s * s * c;
    let l2 = s * s * a - 2.0 * s * co * b + co * co * c;
    l1.min(l2)
}

fn shi_tomasi() -> Outcome {
    let mut rng = SplitMix64::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.next_f64() * 10.0;
        let c = rng.next_f64() * 10.0;
        let b = (2.0 * rng.next_f64() - 1.0) * (a * c).sqrt();
        worst = worst.max((shi_tomasi_response(a, b, c) - jacobi_min_eigen(a, b, c)).abs());
    }

    let mut img = RasterImage::filled_gray(64, 64, 255).map_err(|e| e.to_string())?;
    for y in 22..42 {
        for x in 22..42 {
            img.set(x, y, 0, 0);
        }
    }
    let params = CornerParams { quality_level: 0.05, min_distance: 5.0, max_corners: None, window_radius: 2 };
    let corners = detect_corners(&img, &params).map_err(|e| e.to_string())?;
    let localized = [(22.0, 22.0), (41.0, 22.0), (22.0, 41.0), (41.0, 41.0)]
        .iter()
        .all(|&(x, y): &(f64, f64)| corners.iter().any(|p| (p.x - x).hypot(p.y - y) <= CORNER_RADIUS_PX));
    check(
        worst <= EIGEN_TOLERANCE && corners.len() == 4 && localized,
        format!("max eigen error {worst:.2e} over 1000 tensors; square: {} corners, localized={localized}", corners.len()),
    )
}

fn random_binary(rng: &mut SplitMix64, w: usize, h: usize) -> BinaryImage {
    let density = rng.next_f64();
    BinaryImage::new(w, h, (0..w * h).map(|_| rng.next_f64() < density).collect()).unwrap()
}

fn sat_exactness() -> Outcome {
    let mut rng = SplitMix64::new(5);
    let mut checked = 0u64;
    for h in 1..=32usize {
        for w in 1..=32usize {
            let img = random_binary(&mut rng, w, h);
            let sat = build_sat(&img);
            for x0 in 0..w {
                for x1 in x0 + 1..=w {
                    // Per-row ink counts in [x0, x1), summed directly from pixels.
                    let rows: Vec<u64> = (0..h).map(|y| (x0..x1).filter(|&x| img.get(x, y)).count() as u64).collect();
                    for y0 in 0..h {
                        let mut acc = 0;
                        for y1 in y0 + 1..=h {
                            acc += rows[y1 - 1];
                            let r = WallRect::new(x0 as u32, y0 as u32, x1 as u32, y1 as u32);
                            if rect_ink(&sat, &r).map_err(|e| e.to_string())? != acc {
                                return Err(format!("{w}x{h} image, rect {r:?}"));
                            }
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    let img = random_binary(&mut rng, 512, 512);
    let sat = build_sat(&img);
    for _ in 0..10_000 {
        let (xa, xb) = (rng.below(513) as u32, rng.below(513) as u32);
        let (ya, yb) = (rng.below(513) as u32, rng.below(513) as u32);
        if xa == xb || ya == yb {
            continue;
        }
        let r = WallRect::new(xa.min(xb), ya.min(yb), xa.max(xb), ya.max(yb));
        let brute = (r.y0..r.y1)
            .flat_map(|y| (r.x0..r.x1).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x as usize, y as usize))
            .count() as u64;
        if rect_ink(&sat, &r).map_err(|e| e.to_string())? != brute {
            return Err(format!("512x512 image, rect {r:?}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} rectangle counts exact (all rectangles of every size up to 32x32, plus random 512x512 queries)"))
}

fn union_bitmap(walls: &[WallRect]) -> Vec<bool> {
    let mut bits = vec![false; 128 * 128];
    for r in walls {
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                bits[y as usize * 128 + x as usize] = true;
            }
        }
    }
    bits
}

fn random_multiset(rng: &mut SplitMix64) -> Vec<WallRect> {
    let n = rng.below(13) as usize;
    let mut walls = Vec::with_capacity(n);
    for _ in 0..n {
        // A coarse lattice makes shared edges, containment and duplicates common.
        let x0 = 8 * rng.below(15) as u32;
        let y0 = 8 * rng.below(15) as u32;
        let x1 = (x0 + 8 * (1 + rng.below(6) as u32)).min(128);
        let y1 = (y0 + 8 * (1 + rng.below(6) as u32)).min(128);
        let r = WallRect::new(x0, y0, x1, y1);
        walls.push(r);
        if rng.below(5) == 0 {
            walls.push(r);
        }
    }
    walls.truncate(12);
    walls
}

fn postprocess_algebra() -> Outcome {
    let mut rng = SplitMix64::new(6);
    for case in 0..10_000 {
        let walls = random_multiset(&mut rng);
        let plan = VectorPlan::new(128, 128, walls.clone());
        let out = postprocess(&plan);
        if union_bitmap(&out.walls) != union_bitmap(&walls) {
            return Err(format!("case {case}: pixel set changed for {walls:?}"));
        }
        if postprocess(&out) != out {
            return Err(format!("case {case}: not idempotent"));
        }
        let mut shuffled = walls.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i as u64 + 1) as usize);
        }
        if postprocess(&VectorPlan::new(128, 128, shuffled)) != out {
            return Err(format!("case {case}: order-sensitive for {walls:?}"));
        }
        for (i, a) in out.walls.iter().enumerate() {
            for (j, b) in out.walls.iter().enumerate() {
                if i != j && (a.contains(b) || rect_union(a, b).is_some()) {
                    return Err(format!("case {case}: {a:?} and {b:?} survive"));
                }
            }
        }
    }
    Ok("10000 multisets: pixel set preserved, idempotent, order-insensitive, no contained or mergeable pair".into())
}

fn guidance_math() -> Outcome {
    let mut rng = SplitMix64::new(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (c, h, w) = (1 + rng.below(3) as usize, 2 + rng.below(4) as usize, 2 + rng.below(4) as usize);
        let in_len = 2 + rng.below(6) as usize;
        let out_len = c * h * w;
        let weights = (0..out_len * in_len).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let bias = (0..out_len).map(|_| 2.0 * rng.next_f64() - 0.5).collect();
        let decoder = LinearDecoder::new(weights, bias, in_len, vec![c, h, w]).map_err(|e| e.to_string())?;
        let mask = PixelMask::new(w, h, (0..w * h).map(|_| rng.next_f64() < 0.5).collect()).map_err(|e| e.to_string())?;
        let s = 0.01 + 2.0 * rng.next_f64();
        let x: Vec<f64> = (0..in_len).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let xt = Tensor::new(vec![in_len], x.clone()).map_err(|e| e.to_string())?;
        let analytic = white_loss_grad(&xt, 0, &Identity, &decoder, &mask, s).map_err(|e| e.to_string())?;

        let loss = |v: &[f64]| -> f64 {
            let y = decoder.forward(&Tensor::new(vec![in_len], v.to_vec()).unwrap()).unwrap();
            y.data().iter().enumerate().filter(|(i, _)| mask.data[i % (w * h)]).map(|(_, v)| (v - 1.0).powi(2)).sum::<f64>() * s
        };
        let step = 1e-4;
        let numeric: Vec<f64> = (0..in_len)
            .map(|i| {
                let (mut plus, mut minus) = (x.clone(), x.clone());
                plus[i] += step;
                minus[i] -= step;
                (loss(&plus) - loss(&minus)) / (2.0 * step)
            })
            .collect();
        let diff = analytic.data().iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            worst = worst.max(diff / norm);
        } else if diff > 0.0 {
            worst = f64::INFINITY;
        }
    }

    let mask = PixelMask::from_fn(16, 16, |x, y| x < 8 || y < 4);
    let initial = Tensor::filled(vec![1, 16, 16], 0.0).map_err(|e| e.to_string())?;
    let traj = guided_descent_demo(&initial, &mask, 0.25, &[0.5], 0, 30).map_err(|e| e.to_string())?;
    let closed = traj.iter().enumerate().map(|(k, v)| (v - (1.0 - 0.5f64.powi(k as i32))).abs()).fold(0.0, f64::max);

    let mut identical = true;
    for _ in 0..100 {
        let data: Vec<f64> = (0..4 * 8 * 8).map(|_| 10.0 * rng.next_f64() - 5.0).collect();
        let x = Tensor::new(vec![4, 8, 8], data).map_err(|e| e.to_string())?;
        let grad = Tensor::new(vec![4, 8, 8], (0..256).map(|_| rng.next_f64() - 0.5).collect()).map_err(|e| e.to_string())?;
        let pm = PixelMask::new(64, 64, (0..64 * 64).map(|_| rng.next_f64() < 0.5).collect()).map_err(|e| e.to_string())?;
        let lm = downscale_mask(&pm, 8, 8).map_err(|e| e.to_string())?;
        let state = GuidanceState::new(x.clone(), 2, vec![0.99, 0.7, 0.4], 1.0).map_err(|e| e.to_string())?;
        let next = latent_update(&state, &grad, &lm).map_err(|e| e.to_string())?;
        identical &= x
            .data()
            .iter()
            .zip(next.x_t.data())
            .enumerate()
            .all(|(i, (a, b))| lm.data[i % 64] || a.to_bits() == b.to_bits());
    }
    check(
        worst < FD_RELATIVE_TOLERANCE && closed <= CLOSED_FORM_TOLERANCE && identical,
        format!("max FD relative error {worst:.2e}; closed-form deviation {closed:.2e}; unmasked bit-identical={identical}"),
    )
}

/// Line-by-line check of the SVG dialect, written independently of the parser.
fn valid_dialect(doc: &str, w: u32, h: u32) -> bool {
    let lines: Vec<&str> = doc.split_terminator('\n').collect();
    if !doc.ends_with("</svg>\n") || doc.contains('\r') || lines.len() < 2 {
        return false;
    }
    let header = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">");
    if lines[0] != header || lines[lines.len() - 1] != "</svg>" {
        return false;
    }
    lines[1..lines.len() - 1].iter().all(|line| {
        let Some(d) = line.strip_prefix("<path d=\"").and_then(|l| l.strip_suffix("\" fill=\"#000000\"/>")) else {
            return false;
        };
        let t: Vec<&str> = d.split(' ').collect();
        if t.len() != 10 || t[0] != "M" || t[3] != "H" || t[5] != "V" || t[7] != "H" || t[9] != "Z" {
            return false;
        }
        let n: Vec<u32> = match [t[1], t[2], t[4], t[6], t[8]].iter().map(|v| v.parse()).collect() {
            Ok(n) => n,
            Err(_) => return false,
        };
        n[0] == n[4] && n[0] < n[2] && n[1] < n[3] && n[2] <= w && n[3] <= h
    })
}

fn svg_contract() -> Outcome {
    let mut rng = SplitMix64::new(8);
    for case in 0..1000 {
        let (w, h) = (1 + rng.below(2048) as u32, 1 + rng.below(2048) as u32);
        let walls: Vec<WallRect> = (0..rng.below(30))
            .map(|_| {
                let (x0, y0) = (rng.below(w as u64) as u32, rng.below(h as u64) as u32);
                let x1 = x0 + 1 + rng.below((w - x0) as u64) as u32;
                let y1 = y0 + 1 + rng.below((h - y0) as u64) as u32;
                WallRect::new(x0, y0, x1, y1)
            })
            .collect();
        let plan = VectorPlan::new(w, h, walls);
        let doc = to_svg(&plan);
        if parse_svg(&doc).map_err(|e| format!("case {case}: {e}"))? != plan {
            return Err(format!("case {case}: round trip changed the plan"));
        }
        if !valid_dialect(doc.as_str(), w, h) {
            return Err(format!("case {case}: document outside the dialect"));
        }
        if to_svg(&plan) != doc || doc.path_count() != plan.walls.len() {
            return Err(format!("case {case}: output not deterministic"));
        }
    }
    let plan = generate_plan(3, &PlanConfig::default()).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::scaled(512);
    let a = to_svg(&vectorize_binary(&rasterize(&plan), &cfg).map_err(|e| e.to_string())?.plan);
    let b = to_svg(&vectorize_binary(&rasterize(&plan), &cfg).map_err(|e| e.to_string())?.plan);
    let reparsed: Result<VectorPlan, _> = parse_svg(&SvgDocument { text: a.text.clone() });
    check(
        a == b && reparsed.is_ok(),
        "1000 random plans round-trip and validate; pipeline output byte-identical across runs".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("clean round trip", clean_round_trip),
        ("noisy robustness", noisy_robustness),
        ("vectorization latency", large_latency),
        ("Shi-Tomasi correctness", shi_tomasi),
        ("summed-area table exactness", sat_exactness),
        ("postprocess algebra", postprocess_algebra),
        ("guidance math", guidance_math),
        ("SVG contract", svg_contract),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
