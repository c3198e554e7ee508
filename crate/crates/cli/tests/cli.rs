use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_charged-drops"));
    c.env("CHARGED_DROPS_THREADS", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn unit_disk_energy_is_four_pi_at_unit_tension() {
    let dir = tempfile::tempdir().unwrap();
    let shape = write(dir.path(), "ball1.json", r#"{"dim": 2, "radius": 1}"#);
    let v = json(&run(&["energy", "--shape", &shape, "--lambda", "1", "--Q", "0", "--alpha", "1", "--dim", "2"]));
    assert!((v["total"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-12);
    assert!((v["perimeter"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn spherical_shell_has_willmore_energy_eight_pi() {
    let dir = tempfile::tempdir().unwrap();
    let shape = write(dir.path(), "shell.json", r#"{"dim": 3, "r_in": 0.5, "r_out": 1.0}"#);
    let v = json(&run(&["energy", "--shape", &shape, "--dim", "3", "--lambda", "0", "--Q", "0"]));
    assert!((v["total"].as_f64().unwrap() - 8.0 * PI).abs() < 1e-12);
}

#[test]
fn malformed_shape_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"dim": 2, "radius": 1, "colour": "red"}"#, "colour"),
        (r#"{"dim": 2, "radius": "one"}"#, "radius"),
        (r#"{"dim": 2, "base_radius": 1, "center": [0, 0], "coeffs": {"a0": 0, "a": [0.1, "x"]}}"#, "coeffs.a"),
        (r#"{"dim": 5, "radius": 1}"#, "dim"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let shape = write(dir.path(), &format!("bad{i}.json"), body);
        let out = run(&["energy", "--shape", &shape, "--lambda", "1", "--Q", "0"]);
        assert_eq!(out.status.code(), Some(2), "case {body}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{err} should name {field}");
    }
    let broken = write(dir.path(), "broken.json", "{\"dim\": 2,");
    assert_eq!(run(&["energy", "--shape", &broken, "--lambda", "1", "--Q", "0"]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    let out = run(&["energy", "--shape", missing.to_str().unwrap(), "--lambda", "1", "--Q", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let shape = write(dir.path(), "ball.json", r#"{"dim": 2, "radius": 1}"#);
    for args in [
        vec!["energy", "--shape", &shape, "--lambda", "-1", "--Q", "0"],
        vec!["energy", "--shape", &shape, "--lambda", "1", "--Q", "0", "--alpha", "2.5"],
        vec!["energy", "--shape", &shape, "--lambda", "1", "--Q", "0", "--dim", "3"],
        vec!["lambda-bar", "--tol", "0"],
        vec!["bogus"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let out = bin().env("CHARGED_DROPS_THREADS", "zero").args(["lambda-bar"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threshold_from_the_command_line() {
    let v = json(&run(&["lambda-bar", "--tol", "1e-10"]));
    let l = v["lambda_bar"].as_f64().unwrap();
    assert!(l > 0.0 && l <= 0.5f64.sqrt());
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn uncharged_annulus_matches_the_euler_lagrange_root() {
    let v = json(&run(&["annulus", "--lambda", "1", "--Q", "0", "--alpha", "1"]));
    let r = v["r_star"].as_f64().unwrap();
    assert!((r - 0.88).abs() < 0.01, "r = {r}");
    // f_1(r) = 2 pi (R + r) + 2 pi (1/R + 1/r) with R = sqrt(1 + r^2), stationary at r
    let f = |r: f64| {
        let big = (1.0 + r * r).sqrt();
        2.0 * PI * (big + r) + 2.0 * PI * (1.0 / big + 1.0 / r)
    };
    let h = 1e-5;
    let d = (f(r + h) - f(r - h)) / (2.0 * h);
    assert!(d.abs() < 1e-5, "derivative {d}");
    assert!((v["energy"].as_f64().unwrap() - f(r)).abs() < 1e-10);
    assert!((v["r_lambda"].as_f64().unwrap() - r).abs() < 1e-8);
}

fn scan_config(dir: &Path, tag: &str) -> (String, std::path::PathBuf, std::path::PathBuf) {
    let csv = dir.join(format!("{tag}.csv"));
    let svg = dir.join(format!("{tag}.svg"));
    let body = format!(
        r#"{{"scan": {{"lambda": {{"min": 0.01, "max": 1.0, "points": 3}}, "Q": {{"min": 1e-3, "max": 10.0, "points": 3}}, "alpha": 1.5}},
            "csv": {:?}, "svg": {:?}}}"#,
        csv.to_str().unwrap(),
        svg.to_str().unwrap()
    );
    (write(dir, &format!("{tag}.json"), &body), csv, svg)
}

#[test]
fn phase_diagram_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, csv_a, svg_a) = scan_config(dir.path(), "a");
    let (b, csv_b, svg_b) = scan_config(dir.path(), "b");
    let va = json(&run(&["phase-diagram", "--config", &a]));
    json(&bin().env("CHARGED_DROPS_THREADS", "2").args(["phase-diagram", "--config", &b]).output().unwrap());
    assert_eq!(va.as_array().unwrap().len(), 9);
    let (ca, cb) = (fs::read(&csv_a).unwrap(), fs::read(&csv_b).unwrap());
    assert_eq!(ca, cb);
    assert_eq!(fs::read(&svg_a).unwrap(), fs::read(&svg_b).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("lambda,Q,alpha,dim,"));
    // no temporary files left behind
    let leftovers = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.json",
        r#"{"scan": {"lambda": {"min": 0.1, "max": 1, "points": 2}, "Q": {"min": 0, "max": 0, "points": 1}, "alpha": 1.5, "resolution": 3}}"#,
    );
    let out = run(&["phase-diagram", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
}

#[test]
fn unwritable_output_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let cfg = write(
        dir.path(),
        "scan.json",
        &format!(
            r#"{{"scan": {{"lambda": {{"min": 1, "max": 1, "points": 1}}, "Q": {{"min": 0, "max": 0, "points": 1}}, "alpha": 1.5}}, "csv": {:?}}}"#,
            target.to_str().unwrap()
        ),
    );
    assert_eq!(run(&["phase-diagram", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn stability_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("deficits.csv");
    let cfg = write(
        dir.path(),
        "stab.json",
        &format!(
            r#"{{"experiment": {{"trials": 20, "seed": 7}}, "csv": {:?}, "taylor_modes": [2, 3]}}"#,
            csv.to_str().unwrap()
        ),
    );
    let v = json(&run(&["stability", "--config", &cfg]));
    assert_eq!(v["trials"], 20);
    assert!(v["c0"]["min"].as_f64().unwrap() > 0.0);
    assert_eq!(v["taylor"].as_array().unwrap().len(), 2);
    // mode 2: 2 pi (k^4 - 5/2 k^2 + 3/2) / 2 with k = 2
    assert!((v["taylor"][0]["predicted"].as_f64().unwrap() - 7.5 * PI).abs() < 1e-12);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 21);
}

#[test]
fn minimize_rounds_a_perturbed_disk() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let fin = dir.path().join("final.json");
    let cfg = write(
        dir.path(),
        "min.json",
        &format!(
            r#"{{"init": {{"topology": "ball", "curve": {{"dim": 2, "center": [0, 0], "base_radius": 1, "coeffs": {{"a0": 0, "a": [0, 0.1], "b": [0, 0]}}}}}},
                "params": {{"lambda": 1, "Q": 0, "alpha": 1, "dim": 2}},
                "trajectory": {:?}, "final_shape": {:?}}}"#,
            traj.to_str().unwrap(),
            fin.to_str().unwrap()
        ),
    );
    let v = json(&run(&["minimize", "--config", &cfg]));
    assert_eq!(v["stop_reason"], "converged");
    assert!(v["hint"]["distance"].as_f64().unwrap() < 1e-4);
    assert!((v["energy"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-8);
    let t = fs::read_to_string(&traj).unwrap();
    assert_eq!(t.lines().next(), Some("iteration,energy,grad_norm,step"));
    let shape: Value = serde_json::from_str(&fs::read_to_string(&fin).unwrap()).unwrap();
    assert_eq!(shape["topology"], "ball");
}

#[test]
fn minimize_budget_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "min.json",
        r#"{"init": {"topology": "ball", "curve": {"dim": 2, "center": [0, 0], "base_radius": 1, "coeffs": {"a0": 0, "a": [0, 0.1], "b": [0, 0]}}},
            "params": {"lambda": 1, "Q": 0, "alpha": 1, "dim": 2},
            "options": {"max_iters": 1, "grad_tol": 1e-14}}"#,
    );
    assert_eq!(run(&["minimize", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn nonexistence_sweep() {
    let v = json(&run(&["nonexist", "--lambda", "1", "--Q", "1e-3,1e3", "--alpha", "1.5", "--dim", "2"]));
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["certified"], false);
    assert_eq!(arr[1]["certified"], true);
    assert!(arr[1]["margin"].as_f64().unwrap() > 0.0);
    let out = run(&["nonexist", "--lambda", "1", "--Q", "1", "--alpha", "2.5", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mass_map_lists_each_area() {
    let v = json(&run(&["mass-map", "--lambda", "1", "--Q", "0", "--alpha", "1.5", "--masses", "3.14159,10"]));
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["cell"]["classification"], "BALL");
}

#[test]
fn shipped_configs_run_and_write_their_outputs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("scan_16x16.json", "phase-diagram", &["phase_diagram.csv", "phase_diagram.svg"][..]),
        ("stability.json", "stability", &["stability.csv"][..]),
        ("minimize_ball.json", "minimize", &["ball_trajectory.csv", "ball_final.json"][..]),
        ("minimize_annulus.json", "minimize", &["annulus_trajectory.csv", "annulus_final.json"][..]),
    ];
    for (file, cmd, outputs) in cases {
        let dir = tempfile::tempdir().unwrap();
        let cfg = root.join(file);
        // all available threads; results do not depend on the count
        let out = Command::new(env!("CARGO_BIN_EXE_charged-drops"))
            .args([cmd, "--config", cfg.to_str().unwrap()])
            .current_dir(dir.path())
            .output()
            .unwrap();
        json(&out);
        for o in outputs {
            assert!(dir.path().join(o).metadata().unwrap().len() > 0, "{file}: {o}");
        }
    }
}
