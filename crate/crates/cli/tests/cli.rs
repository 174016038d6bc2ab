use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn lgf(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lgf"))
        .args(args)
        .env_remove("LGF_CACHE_DIR")
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn lgf_json(args: &[&str]) -> Value {
    let (ok, out, err) = lgf(args);
    assert!(ok, "{args:?} failed: {err}");
    serde_json::from_str(&out).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exact_series_file() {
    let (ok, out, _) = lgf(&["gen-series", "--d", "7", "--terms", "6", "--exact"]);
    assert!(ok);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "LGF d=7 mode=exact p=- N=6");
    assert_eq!(&lines[1..], ["1/1", "0/1", "1/84", "5/1764", "263/197568", "1355/2074464"]);
}

#[test]
fn modular_route_to_exact_operator() {
    let dir = scratch("route");
    let mut odes = Vec::new();
    for i in 0..6 {
        let s = dir.join(format!("s{i}.txt"));
        let m = dir.join(format!("m{i}.ode"));
        let idx = i.to_string();
        lgf_json(&["gen-series", "--d", "3", "--terms", "40", "--prime-index", &idx, "--out", s.to_str().unwrap()]);
        let v = lgf_json(&["min-ode", "--series", s.to_str().unwrap(), "--guard", "10", "--out", m.to_str().unwrap()]);
        assert_eq!(v["order"], 3);
        odes.push(m.to_str().unwrap().to_string());
    }
    let exact = dir.join("g3.ode");
    let mut args = vec!["reconstruct"];
    args.extend(odes.iter().map(String::as_str));
    args.extend(["--out", exact.to_str().unwrap()]);
    let v = lgf_json(&args);
    assert_eq!(v["order"], 3);
    let e = lgf_json(&["exponents", "--ode", exact.to_str().unwrap(), "--at", "0", "--at", "1", "--at", "-3"]);
    assert_eq!(e[0]["exponents"][0]["rho"], "0");
    assert_eq!(e[0]["exponents"][0]["multiplicity"], 3);
    assert_eq!(e[2]["point"], "-3");
    let r = lgf_json(&["retprob", "--d", "3", "--digits", "15", "--ode", exact.to_str().unwrap()]);
    assert_eq!(r["value"], "0.256318236504649");
    assert_eq!(r["watson"], "0.256318236504649");
    let p = lgf_json(&["probe-irreducible", "--ode", exact.to_str().unwrap(), "--samples", "4"]);
    assert_eq!(p["verdict"], "no-right-factor-detected");
}

#[test]
fn landau_and_asymptotics() {
    let v = lgf_json(&["landau", "--d", "4"]);
    let xs: Vec<&str> = v["table"]["entries"].as_array().unwrap().iter().map(|e| e["x"].as_str().unwrap()).collect();
    assert_eq!(xs, ["-8", "-6", "-3", "-2", "1"]);
    let a = lgf_json(&["retprob", "--asymptotic", "--order", "7"]);
    assert_eq!(a["coefficients"][7], "1219/8");
    let g = lgf_json(&["generic-d", "--terms", "8"]);
    assert_eq!(g["y_operator"]["order"], 2);
    assert_eq!(g["y_series"][8], "1190672");
}

#[test]
fn cached_run_is_stable() {
    let dir = scratch("run");
    let root = dir.to_str().unwrap();
    let first = lgf_json(&["run", "--d", "3", "--cache", root]);
    let second = lgf_json(&["run", "--d", "3", "--cache", root]);
    assert_eq!(first["order"], 3);
    assert_eq!(first["exact_sha256"], second["exact_sha256"]);
    let tables = lgf_json(&["verify-tables", "--dims", "3", "--cache", root]);
    assert_eq!(tables["all_pass"], true);
}

#[test]
fn errors_are_json() {
    let (ok, _, err) = lgf(&["guess-ode", "--series", "/nonexistent", "--q", "1", "--deg", "1"]);
    assert!(!ok);
    let v: Value = serde_json::from_str(&err).unwrap();
    assert!(v["error"].as_str().unwrap().contains("nonexistent"));
}
