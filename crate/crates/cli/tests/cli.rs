use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ppsdepth::io::{read_pfm, write_gray, BitDepth, PointCloud};
use ppsdepth::photometrics::ImageGray;

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tube.toml")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppsdepth"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = config();
    let cfg = cfg.to_str().unwrap();

    let o = run(&["render", cfg, "-o", "."], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stderr(&o).contains("clipped"));

    let o = run(&["mask", "image.png"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("4096 of 4096"));

    let o = run(&["pps", "depth.pfm", cfg], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_pfm(d.join("pps.pfm")).unwrap().len(), 4096);

    let o = run(&["refine", "depth.pfm", "image.png", cfg, "--max-iters", "5"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,loss"));

    let o = run(&["eval", "depth.pfm", "depth.pfm", "--json", "m.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let json = std::fs::read_to_string(d.join("m.json")).unwrap();
    assert!(json.contains("\"rmse\":0") || json.contains("\"rmse\": 0"), "{json}");
    assert!(json.contains("\"delta_1_1\":1") || json.contains("\"delta_1_1\": 1"), "{json}");

    let o = run(&["cloud", "depth.pfm", "image.png", cfg], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let cloud = PointCloud::read(d.join("cloud.ply")).unwrap();
    assert_eq!(cloud.len(), 4096);
    assert!(cloud.colors.is_some());
}

#[test]
fn saturated_image_warns_about_empty_mask() {
    let dir = tempfile::tempdir().unwrap();
    let white = ImageGray::from_fn(8, 8, |_, _| 1.0f64).unwrap();
    write_gray(dir.path().join("white.png"), &white, BitDepth::Eight).unwrap();
    let o = run(&["mask", "white.png"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("mask is empty"));
}

#[test]
fn invalid_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let o = run(&["render", cfg.to_str().unwrap(), "--gamma=-1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn missing_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eval", "nope.pfm", "nope.pfm"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.pfm"));
}
