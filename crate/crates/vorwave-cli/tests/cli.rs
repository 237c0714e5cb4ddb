//! End-to-end tests of the binary: golden values, byte-stable output,
//! exit codes and CSV schemas.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vorwave"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vorwave-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn critical_constant_vorticity_golden() {
    let dir = tmpdir("critical");
    let cfg = write_config(&dir, "c.conf", "[vorticity]\nkind = constant\nb = 2.0\n");
    let out = run(&["critical", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "vorwave-report/1");
    let res = &v["results"];
    assert_eq!(res["s0"], 2.0);
    assert!((res["r0"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!((res["s_c"].as_f64().unwrap() - 2.0399).abs() < 1e-3);
    assert!(res["r_c"].as_f64().unwrap() < res["r0"].as_f64().unwrap());
}

#[test]
fn roots_irrotational_golden_and_deterministic() {
    let dir = tmpdir("roots");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "r.conf",
        &format!(
            "[vorticity]\nkind = zero\n\n[branch]\nj = 0\nsign = +\n\n[params]\nh = 1.2\n\n[output]\ndir = {}\nformats = csv,json\n",
            outdir.display()
        ),
    );
    let first = run(&["roots", cfg.to_str().unwrap()]);
    let v = stdout_json(&first);
    let roots = v["results"]["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    let tau0 = roots[0]["tau0"].as_f64().unwrap();
    assert!((tau0 - 1.3250204585).abs() < 1e-6);
    assert!((roots[0]["lambda0"].as_f64().unwrap() - 2.0 * std::f64::consts::PI / tau0).abs() < 1e-12);
    let csv1 = std::fs::read(outdir.join("roots.csv")).unwrap();
    let json1 = std::fs::read(outdir.join("report.json")).unwrap();
    assert!(std::str::from_utf8(&csv1)
        .unwrap()
        .starts_with("tau0,lambda0,residual,interval,condRh,branch,s,r,layers\n"));

    // Identical config and version give byte-identical artifacts.
    let second = run(&["roots", cfg.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv1, std::fs::read(outdir.join("roots.csv")).unwrap());
    assert_eq!(json1, std::fs::read(outdir.join("report.json")).unwrap());
}

#[test]
fn scan_streams_constant_vorticity() {
    let dir = tmpdir("scan");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "s.conf",
        &format!(
            "[vorticity]\nkind = constant\nb = 2.0\n\n[params]\nr = 2.0\n\n[scan]\nj_max = 2\n\n[output]\ndir = {}\nformats = csv\n",
            outdir.display()
        ),
    );
    let out = run(&["scan-streams", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    let streams = v["results"]["streams"].as_array().unwrap();
    // r = 2 > r0 = 2/3: one supercritical stream on (0,+), one on (1,+).
    assert_eq!(streams.len(), 2);
    assert_eq!(streams[0]["branch"], "0+");
    assert_eq!(streams[0]["layers"], 1);
    assert_eq!(streams[1]["branch"], "1+");
    assert_eq!(streams[1]["layers"], 2);
    for s in streams {
        assert!((s["r"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    }
    let csv = std::fs::read_to_string(outdir.join("streams.csv")).unwrap();
    assert!(csv.starts_with("s,branch,h,kappa,r,layers\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn dispersion_csv_schema() {
    let dir = tmpdir("disp");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "d.conf",
        &format!(
            "[vorticity]\nkind = linear\nb = 1.0\n\n[branch]\nj = 0\nsign = -\n\n[params]\ns = 2.0\n\n[output]\ndir = {}\nformats = csv\n",
            outdir.display()
        ),
    );
    let out = run(&["dispersion", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["results"]["root_count"], 1); // s = 2.0 > s_c: single root past the pole
    assert_eq!(v["results"]["poles"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(outdir.join("dispersion.csv")).unwrap();
    assert!(csv.starts_with("tau,sigma,interval\n"));
    // Two continuity intervals sampled.
    assert!(csv.lines().any(|l| l.ends_with(",0")));
    assert!(csv.lines().any(|l| l.ends_with(",1")));
}

#[test]
fn branch_tau_curve_csv() {
    let dir = tmpdir("curve");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "b.conf",
        &format!(
            "[vorticity]\nkind = linear\nb = 1.0\n\n[branch]\nj = 0\nsign = -\n\n[params]\ns_min = 1.2\ns_max = 2.4\nn_points = 9\n\n[output]\ndir = {}\nformats = csv\n",
            outdir.display()
        ),
    );
    let out = run(&["branch-tau", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["results"]["points"], 9);
    let csv = std::fs::read_to_string(outdir.join("curve.csv")).unwrap();
    assert!(csv.starts_with("s,tau,tau_dot_sign\n"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn kernel_and_field_reports() {
    let dir = tmpdir("field");
    let cfg = write_config(
        &dir,
        "f.conf",
        "[vorticity]\nkind = zero\n\n[branch]\nj = 0\nsign = +\n\n[params]\nh = 1.2\namplitude = 0.001\nnx = 17\nny = 9\n",
    );
    let out = run(&["kernel", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert!(v["results"]["boundary_residual"].as_f64().unwrap() <= 1e-6);

    let out = run(&["field", cfg.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert!(v["results"]["max_bernoulli_defect"].as_f64().unwrap() < 1e-4);
    assert_eq!(v["results"]["has_interior_critical_layer"], false);
}

#[test]
fn oracle_check_passes() {
    for args in [
        vec!["oracle-check", "--family", "irrotational"],
        vec!["oracle-check", "--family", "constant", "--b", "2"],
        vec!["oracle-check", "--family", "linear", "--b", "1"],
    ] {
        let out = run(&args);
        let v = stdout_json(&out);
        assert_eq!(v["results"]["pass"], true, "args {args:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tmpdir("exit");
    // Unknown key: configuration error, code 2.
    let bad = write_config(&dir, "bad.conf", "[vorticity]\nkind = zero\nwhat = 1\n");
    let out = run(&["critical", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Unavailable branch: numeric failure, code 3.
    let unavailable = write_config(
        &dir,
        "un.conf",
        "[vorticity]\nkind = zero\n\n[branch]\nj = 1\nsign = +\n\n[params]\ns = 1.0\n",
    );
    let out = run(&["roots", unavailable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // Unknown oracle family: code 2.
    let out = run(&["oracle-check", "--family", "cubic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_env_override_is_echoed() {
    let dir = tmpdir("tol");
    let cfg = write_config(&dir, "t.conf", "[vorticity]\nkind = constant\nb = 2.0\n");
    let out = bin()
        .args(["critical", cfg.to_str().unwrap()])
        .env("VORWAVE_TOL_QUAD", "1e-9")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tolerances"]["quad"], 1e-9);
    assert_eq!(v["tolerances"]["ode"], 1e-12);
}
