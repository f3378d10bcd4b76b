use std::path::Path;
use std::process::{Command, Output};

use capillary::io::{read_pair, write_pair, RunManifest};
use capillary::scene::ProblemMode;
use capillary::spanning::{is_spanning, SpanningClass, SpanningMode};
use capillary::{build_domain, SceneConfig};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capillary")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn quick(mut scene: SceneConfig) -> SceneConfig {
    scene.optimizer.t_final = 0.05;
    scene.optimizer.cooling = 0.7;
    scene.optimizer.moves_per_temperature = 5.0;
    scene
}

fn write_scene(dir: &Path, name: &str, scene: &SceneConfig) -> String {
    let p = dir.join(name);
    std::fs::write(&p, scene.to_toml()).unwrap();
    p.to_string_lossy().into_owned()
}

fn triple() -> SceneConfig {
    quick(SceneConfig::triple_disk(3.0, 1.0, 0.15, 1.0 / 16.0))
}

#[test]
fn minimize_then_check_report_and_partition() {
    let tmp = TempDir::new().unwrap();
    let scene = write_scene(tmp.path(), "s.toml", &triple());
    let out = tmp.path().join("run");
    let out_s = out.to_string_lossy().into_owned();
    let o = run(&["minimize", "--scene", &scene, "--out", &out_s, "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["pair.bin", "trace.csv", "result.json", "manifest.json", "scene.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,temperature,energy,volume_error,best"));

    // same seed, same bytes
    let m1: RunManifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let again = tmp.path().join("again");
    assert_eq!(code(&run(&["minimize", "--scene", &scene, "--out", again.to_str().unwrap(), "--seed", "5"])), 0);
    let m2: RunManifest = serde_json::from_str(&std::fs::read_to_string(again.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m1.checksums, m2.checksums);
    assert_eq!(m1.config_hash, m2.config_hash);

    let pair_path = out.join("pair.bin");
    let o = run(&["span-check", "--scene", &scene, "--pair", pair_path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["spanning"], true);

    // drop a sheet facet that a tube slice depends on
    let dom = build_domain(&triple()).unwrap();
    let class = SpanningClass::from_scene(&triple(), &dom).unwrap();
    let full = read_pair(&pair_path, &dom).unwrap();
    let pair = full
        .k_extra
        .iter()
        .map(|f| {
            let mut p = full.clone();
            p.k_extra.remove(f);
            p
        })
        .find(|p| !is_spanning(p, &class, SpanningMode::Bulk, &dom))
        .expect("some facet is essential");
    let cut = tmp.path().join("cut.bin");
    write_pair(&cut, &pair, &dom).unwrap();
    let o = run(&["span-check", "--scene", &scene, "--pair", cut.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing: Vec<&str> = cert["tubes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| t["spanning"] == false)
        .map(|t| t["id"].as_str().unwrap())
        .collect();
    assert!(!failing.is_empty());

    let o = run(&["report", "--out", &out_s]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(out.join("film.svg")).unwrap();
    let thin = svg.split(r#"class="mult1""#).nth(1).unwrap().split("</g>").next().unwrap();
    assert_eq!(thin.matches("<line").count(), 0, "dry result renders bold only");
    assert!(svg.contains(r#"class="mult2""#));
    assert!(out.join("fit.json").exists());

    let o = run(&["partition", "--scene", &scene, "--pair", pair_path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let part: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(part["count"].as_u64().unwrap() >= 1);
}

#[test]
fn bad_inputs_exit_two() {
    let tmp = TempDir::new().unwrap();
    let scene = write_scene(tmp.path(), "s.toml", &triple());
    let junk = tmp.path().join("junk.bin");
    std::fs::write(&junk, b"not a bitmap").unwrap();
    assert_eq!(code(&run(&["span-check", "--scene", &scene, "--pair", junk.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["span-check", "--scene", "/nonexistent.toml", "--pair", junk.to_str().unwrap()])), 2);
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "resolution = 0.1\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(&["minimize", "--scene", bad.to_str().unwrap(), "--out", "x"])), 2);
    assert_eq!(code(&run(&["report", "--out", tmp.path().join("missing").to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn oversized_volume_exits_three() {
    let tmp = TempDir::new().unwrap();
    let scene = write_scene(tmp.path(), "s.toml", &triple());
    let o = run(&["minimize", "--scene", &scene, "--mode", "bulk", "--volume", "100", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn two_chamber_foam_is_straight() {
    let tmp = TempDir::new().unwrap();
    let mut scene = quick(SceneConfig::triple_disk(1.0, 0.5, 0.1, 1.0 / 16.0));
    scene.wire.clear();
    scene.generator.clear();
    scene.problem.mode = ProblemMode::Foam;
    scene.problem.chambers = Some([2, 1]);
    let path = write_scene(tmp.path(), "foam.toml", &scene);
    let out = tmp.path().join("foam");
    let o = run(&["minimize", "--scene", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("result.json")).unwrap()).unwrap();
    // one vertical sheet across the unit box
    assert!((summary["energy"]["total"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(summary["foam"]["chamber_cells"], serde_json::json!([128, 128]));
}
