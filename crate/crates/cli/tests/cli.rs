use std::path::Path;
use std::process::{Command, Output};

use planvec_core::svg::{parse_svg, SvgDocument};

fn planvec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planvec")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_vectorize_recovers_every_wall() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("plan.png");
    let out = planvec(&["--seed", "7", "-o", path_str(&raster), "synth"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let truth = parse_svg(&SvgDocument { text: std::fs::read_to_string(dir.path().join("plan.svg")).unwrap() }).unwrap();
    let out = planvec(&["vectorize", path_str(&raster)]);
    assert_eq!(out.status.code(), Some(0));
    let pred = parse_svg(&SvgDocument { text: String::from_utf8(out.stdout).unwrap() }).unwrap();
    assert_eq!(pred.walls.len(), truth.walls.len());

    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["paths"], truth.walls.len());
    assert_eq!(summary["image_size"], serde_json::json!([512, 512]));
}

#[test]
fn blank_image_gives_empty_svg() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.pgm");
    let mut bytes = b"P5\n32 32\n255\n".to_vec();
    bytes.extend([255u8; 32 * 32]);
    std::fs::write(&blank, bytes).unwrap();

    let svg = dir.path().join("blank.svg");
    let out = planvec(&["vectorize", path_str(&blank), "-o", path_str(&svg)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let plan = parse_svg(&SvgDocument { text: std::fs::read_to_string(svg).unwrap() }).unwrap();
    assert!(plan.walls.is_empty());
}

#[test]
fn missing_input_exits_2() {
    let out = planvec(&["vectorize", "/nonexistent/plan.png"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn candidate_explosion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("speckled.png");
    assert!(planvec(&["-o", path_str(&raster), "synth", "--speckle-rate", "0.05", "--gray-level", "200"]).status.success());
    let out = planvec(&[
        "vectorize", path_str(&raster), "--snap-tol", "0.01", "--threshold", "200",
        "--min-thickness", "0.1", "--max-thickness", "600", "--min-length", "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hint:"));
    assert_eq!(planvec(&["vectorize", path_str(&raster), "--snap-tol", "0"]).status.code(), Some(2));
}

#[test]
fn debug_corners_csv() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("p.pgm");
    assert!(planvec(&["-o", path_str(&raster), "synth"]).status.success());
    let csv = dir.path().join("corners.csv");
    let out = planvec(&["vectorize", path_str(&raster), "--debug-corners", path_str(&csv), "-o", path_str(&dir.path().join("o.svg"))]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,response"));
    let rows: Vec<_> = lines.collect();
    assert!(rows.len() >= 8);
    assert!(rows.iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn bench_clean_seeds_are_perfect_and_reproducible() {
    let out = planvec(&["bench", "--seeds", "1..10", "--omit-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> =
        out.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).map(|l| serde_json::from_slice(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(line["seed"], i as u64 + 1);
        assert_eq!(line["precision"], 1.0);
        assert_eq!(line["recall"], 1.0);
        assert_eq!(line["path_count_pred"], line["path_count_truth"]);
        assert!(line["params"]["pipeline"].is_object());
    }
    let again = planvec(&["bench", "--seeds", "1..10", "--omit-timing"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn bench_edge_cases() {
    let empty = planvec(&["bench", "--seeds", "5..4"]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(empty.stdout.is_empty());
    assert_eq!(planvec(&["bench", "--seeds", "0..2", "--size", "40"]).status.code(), Some(2));
    assert_eq!(planvec(&["bench", "--seeds", "x"]).status.code(), Some(2));
}

fn trajectory(args: &[&str]) -> Vec<f64> {
    let mut full = vec!["guidance-demo"];
    full.extend_from_slice(args);
    let out = planvec(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,masked_mean"));
    lines.map(|l| l.split_once(',').unwrap().1.parse().unwrap()).collect()
}

#[test]
fn guidance_demo_default_is_monotone() {
    let t = trajectory(&[]);
    assert_eq!(t.len(), 21);
    assert!(t.windows(2).all(|w| w[1] >= w[0]));
    assert!((t[20] - 1.0).abs() < 1e-5);
}

#[test]
fn guidance_demo_zero_scale_is_constant() {
    let t = trajectory(&["--scale", "0", "--mask", "border"]);
    assert!(t.iter().all(|&v| v == t[0]));
}

#[test]
fn guidance_demo_numeric_errors_exit_4() {
    assert_eq!(planvec(&["guidance-demo", "--alpha-bar", "0"]).status.code(), Some(4));
    let diverging = planvec(&["guidance-demo", "--alpha-bar", "0.05", "--scale", "2", "--steps", "2000"]);
    assert_eq!(diverging.status.code(), Some(4));
    assert!(diverging.stdout.is_empty());
    assert_eq!(planvec(&["guidance-demo", "--mask", "nope"]).status.code(), Some(2));
}

#[test]
fn help_lists_defaults() {
    let out = planvec(&["vectorize", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("snap-tol"));
    assert!(text.contains("min-fill"));
}

#[test]
fn json_output_is_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let raster = dir.path().join("p.png");
    assert!(planvec(&["--json", "-o", path_str(&raster), "synth"]).status.success());
    let truth: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    let out = planvec(&["--json", "vectorize", path_str(&raster)]);
    let pred: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(pred["walls"].as_array().unwrap().len(), truth["walls"].as_array().unwrap().len());
}
