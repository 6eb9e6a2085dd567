use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn holeburn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holeburn")).args(args).output().unwrap()
}

fn scenario(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(", ").map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn validation_failures_exit_with_2_and_list_every_problem() {
    let d = TempDir::new().unwrap();
    let bad = scenario(d.path(), "bad.json", r#"{"alpha0_L": -5, "v_over_c": 2, "delta0_T": 0}"#);
    let out = holeburn(&["validate", "--scenario", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha0_L") && err.contains("v_over_c") && err.contains("delta0_T"), "{err}");

    let missing = d.path().join("nope.json");
    assert_eq!(holeburn(&["validate", "--scenario", missing.to_str().unwrap()]).status.code(), Some(2));

    let unknown = scenario(d.path(), "u.json", r#"{"alpha0_L": 25, "b": 0.6, "bogus": 1}"#);
    assert_eq!(holeburn(&["validate", "--scenario", &unknown]).status.code(), Some(2));

    let unsupported = scenario(
        d.path(),
        "f.json",
        r#"{"alpha0_L": 25, "b": 0.6, "delta1_over_delta0": 5, "method": "full_quadrature"}"#,
    );
    let out = holeburn(&["store", "--scenario", &unsupported, "--out", d.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.path().join("o").exists(), "nothing is computed for an invalid scenario");

    let good = scenario(d.path(), "good.json", r#"{"alpha0_L": 25, "b": 0.6}"#);
    assert_eq!(holeburn(&["validate", "--scenario", &good]).status.code(), Some(0));
    assert_eq!(holeburn(&["--tol", "0", "validate", "--scenario", &good]).status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_is_a_numerical_failure() {
    let d = TempDir::new().unwrap();
    let s = scenario(d.path(), "s.json", r#"{"alpha0_L": 9, "b": 0.6}"#);
    let out = holeburn(&["--tol", "1e-16", "store", "--scenario", &s, "--out", d.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn store_writes_profiles_and_sidecar() {
    let d = TempDir::new().unwrap();
    let s = scenario(d.path(), "s.json", r#"{"alpha0_L": 25, "b": 0.6, "method": "established"}"#);
    let o = d.path().join("o");
    let out = holeburn(&["store", "--scenario", &s, "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let restored = fs::read_to_string(o.join("restored.csv")).unwrap();
    assert!(restored.starts_with("# t_minus_tpi2, re, im\n"));
    assert!(rows(&o.join("restored.csv")).iter().all(|r| r[0] > 0.0));
    assert!(fs::read_to_string(o.join("original.csv")).unwrap().starts_with("# t_minus_tpi1, re, im\n"));
    let side: serde_json::Value = serde_json::from_slice(&fs::read(o.join("restored.json")).unwrap()).unwrap();
    assert_eq!(side["method"], "established");
    let eta = side["eta"].as_f64().unwrap();
    assert!(eta > 0.0 && eta < 1.0);
    assert!(side["params"]["delta0_ts"].as_f64().unwrap() > side["params"]["delta0_t"].as_f64().unwrap());
    assert!(side["validity"]["warnings"].is_array());
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let d = TempDir::new().unwrap();
    let s = scenario(
        d.path(),
        "s.json",
        r#"{"alpha0_L": 25, "b": 0.6, "sweep_sqrt_alpha0_L": [3, 4, 5, 6]}"#,
    );
    let run = |cmd: &str, workers: &str, tag: &str| {
        let o = d.path().join(tag);
        let out = holeburn(&["--workers", workers, cmd, "--scenario", &s, "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        o
    };
    let a = run("sweep-efficiency", "1", "a");
    let b = run("sweep-efficiency", "3", "b");
    let c = run("sweep-efficiency", "1", "c");
    for f in ["efficiency.csv", "efficiency.json"] {
        let x = fs::read(a.join(f)).unwrap();
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, fs::read(c.join(f)).unwrap(), "{f}");
    }
    let etas: Vec<f64> = rows(&a.join("efficiency.csv")).iter().map(|r| r[3]).collect();
    assert!(etas.windows(2).all(|w| w[1] > w[0]), "{etas:?}");
    assert!(etas.iter().all(|e| *e > 0.0 && *e < 1.0));

    let x = run("store", "1", "x");
    let y = run("store", "2", "y");
    for f in ["restored.csv", "restored.json", "original.csv", "revival_factor.csv"] {
        assert_eq!(fs::read(x.join(f)).unwrap(), fs::read(y.join(f)).unwrap(), "{f}");
    }
}

#[test]
#[allow(clippy::approx_constant)]
fn preset_fig2_matches_the_quadratic_closed_form() {
    let d = TempDir::new().unwrap();
    let out = holeburn(&["preset", "fig2", "--out", d.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (t, peak) in [("5", 0.4472), ("10", 0.7071)] {
        let dir = d.path().join("fig2").join(format!("delta0_T_{t}"));
        for f in ["input.csv", "exact.csv", "second_order.csv"] {
            assert!(fs::read_to_string(dir.join(f)).unwrap().starts_with("# t, re, im\n"));
        }
        let second = rows(&dir.join("second_order.csv"));
        let top = second.iter().map(|r| r[1].hypot(r[2])).fold(0.0, f64::max);
        assert!((top / peak - 1.0).abs() < 1e-3, "T = {t}: {top}");
        let back: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("scenario.json")).unwrap()).unwrap();
        assert_eq!(back["alpha0_L"], 100.0);
    }
}

#[test]
fn preset_fig4_revival_factors() {
    let d = TempDir::new().unwrap();
    for name in ["fig4a", "fig4b"] {
        let out = holeburn(&["preset", name, "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let factor = |name: &str, theta: f64| {
        rows(&d.path().join(name).join("revival_factor.csv"))
            .iter()
            .find(|r| (r[0] - theta).abs() < 1e-9)
            .map(|r| r[1])
            .unwrap()
    };
    assert!((factor("fig4a", 2.0) - 0.9109).abs() < 1e-3);
    assert!((factor("fig4a", 0.0)).abs() < 1e-15);
    let plateau = (factor("fig4b", 16.0) + factor("fig4b", 18.0) + factor("fig4b", 20.0)) / 3.0;
    assert!((plateau / 0.8872 - 1.0).abs() < 0.02, "{plateau}");
    let restored = rows(&d.path().join("fig4b").join("restored.csv"));
    assert!(restored.iter().all(|r| r[0] > 0.0));
}
