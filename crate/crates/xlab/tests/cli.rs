use std::path::Path;
use std::process::{Command, Output};

use xlab_core::control::ControlPath;

fn xlab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_xlab"));
    cmd.args(args).env_remove("XLAB_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("run xlab")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn e3_writes_documented_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = xlab(&["e3-epsnet", "--samples", "50", "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let d = dir.path();
    assert_eq!(header(&d.join("e3_quantizer.csv")), "radius,eps,sample,w11_norm,l1_error,error_bound,status");
    assert_eq!(
        header(&d.join("e3_table.csv")),
        "radius,eps,intervals,levels,ln_cardinality,eps_growth,ratio,decimal_digits"
    );
    assert!(d.join("e3_growth.svg").exists());
    let report = json(&d.join("report.json"));
    assert_eq!(report["manifest"], "manifest.json");
    assert_eq!(report["anchor"], serde_json::json!([5, 41]));
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["experiment"], "E3");
    assert_eq!(manifest["content_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_precedence_is_config_then_env_then_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 11, "samples": 20}"#).unwrap();
    let run = |extra: &[&str], env: &[(&str, &str)]| {
        let out = dir.path().join("out");
        let mut args = vec!["e3-epsnet", "--config", s(&cfg), "--output", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(xlab(&args, env).status.code(), Some(0));
        let m = json(&out.join("manifest.json"));
        (m["seed"]["master"].as_u64().unwrap(), m["seed"]["source"].as_str().unwrap().to_string())
    };
    assert_eq!(run(&[], &[]), (11, "config".into()));
    assert_eq!(run(&[], &[("XLAB_SEED", "12")]), (12, "env".into()));
    assert_eq!(run(&["--seed", "13"], &[("XLAB_SEED", "12")]), (13, "flag".into()));
}

#[test]
fn invalid_configuration_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = xlab(&["e3-epsnet", "--s", "3.0", "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-integer"));
    let out = xlab(&["e3-epsnet", "--eps", "0.1,0.2", "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(1));
    let out = xlab(&["e3-epsnet", "--output", s(dir.path())], &[("XLAB_SEED", "x")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn property_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"samples": 10, "e3": {"growth_constant": 1.0}}"#).unwrap();
    let out = xlab(&["e3-epsnet", "--config", s(&cfg), "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED: max cardinality ratio"));
}

#[test]
fn e1_records_zero_rows_and_force_only_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid": 16, "samples": 4, "e1": {"min_pairs": 0, "perturbation": "force-only"}}"#).unwrap();
    let out = xlab(&["e1-lipschitz", "--config", s(&cfg), "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut rdr = csv::Reader::from_path(dir.path().join("e1_ratios.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4 * 4);
    for r in &rows {
        if &r[2] == "identical" {
            assert_eq!(&r[3], "0");
            assert_eq!(&r[6], "0");
        } else {
            let ratio: f64 = r[6].parse().unwrap();
            assert!(ratio.is_finite() && ratio > 0.0);
        }
    }
}

#[test]
fn e1_max_ratio_is_stable_when_samples_double() {
    let dir = tempfile::tempdir().unwrap();
    let max_ratios = |n: usize| -> Vec<f64> {
        let out = dir.path().join(format!("n{n}"));
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, format!(r#"{{"grid": 16, "samples": {n}, "e1": {{"min_pairs": 0}}}}"#)).unwrap();
        assert_eq!(xlab(&["e1-lipschitz", "--config", s(&cfg), "--output", s(&out)], &[]).status.code(), Some(0));
        let report = json(&out.join("report.json"));
        report["scales"].as_array().unwrap().iter().map(|s| s["max_ratio"].as_f64().unwrap()).collect()
    };
    let (a, b) = (max_ratios(20), max_ratios(40));
    for (x, y) in a.iter().zip(&b) {
        assert!((y / x - 1.0).abs() <= 0.2, "{x} vs {y}");
    }
}

#[test]
fn e2_single_sample_surfaces_degenerate_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = xlab(&["e2-entropy-gap", "--grid", "16", "--samples", "1", "--output", s(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("not testable numerically"));
    let report = json(&dir.path().join("report.json"));
    for cloud in ["holder", "attainable"] {
        assert!(report[cloud]["full_fit_error"].as_str().unwrap().contains("degenerate slope fit"));
    }
    assert_eq!(header(&dir.path().join("e2_holder_curve.csv")), "eps,packing,ln_inv_eps,ln_packing");
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["assertions"]["identical_metric"], true);
}

#[test]
fn solve_with_control_file_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let control = dir.path().join("eta.csv");
    let eta = ControlPath::uniform(0.2, vec![vec![0.5, 0.0, 0.0, -0.5, 0.1, 0.0], vec![0.0; 6]]).unwrap();
    eta.write_csv(std::fs::File::create(&control).unwrap()).unwrap();
    let out_dir = dir.path().join("run");
    let out = xlab(
        &[
            "solve",
            "--grid",
            "16",
            "--horizon",
            "0.2",
            "--init",
            "holder",
            "--init-seed",
            "3",
            "--control-file",
            s(&control),
            "--checkpoint-every",
            "3",
            "--output",
            s(&out_dir),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&out_dir.join("steps.csv")), "step,t,sup_norm,holder_norm,energy,enstrophy");
    let steps = std::fs::read_to_string(out_dir.join("steps.csv")).unwrap().lines().count() - 1;
    assert_eq!(steps, 11);
    let ckpts: Vec<_> = std::fs::read_dir(out_dir.join("checkpoints")).unwrap().collect();
    assert_eq!(ckpts.len(), 5);
    let manifest = json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["assertions"]["time_mesh"].as_array().unwrap().len(), 11);
    let end = xlab_core::io::read_vector(&mut std::fs::File::open(out_dir.join("endpoint.bin")).unwrap()).unwrap();
    assert_eq!(end.grid().n(), 16);

    let bad = xlab(&["solve", "--grid", "12", "--output", s(&out_dir)], &[]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn plot_reads_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("curve.csv");
    std::fs::write(&csv_path, "eps,packing\n0.1,10\n0.01,100\n").unwrap();
    let svg = dir.path().join("curve.svg");
    let out = xlab(&["plot", "--input", s(&csv_path), "--output", s(&svg)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<circle").count(), 2);
    let out = xlab(&["plot", "--input", s(&csv_path), "--y", "nope", "--output", s(&svg)], &[]);
    assert_eq!(out.status.code(), Some(1));
}
