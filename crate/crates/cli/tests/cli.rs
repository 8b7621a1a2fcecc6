use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mowave_cli::output::verify_manifest;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn mowave(outdir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mowave"))
        .env_remove("MOWAVE_OUTDIR")
        .arg("--outdir")
        .arg(outdir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `config(name)` with `from` replaced by `to` into `dir`.
fn patched(dir: &Path, name: &str, from: &str, to: &str) -> String {
    let text = fs::read_to_string(config(name)).unwrap();
    assert!(text.contains(from), "{from} not in {name}");
    let path = dir.join(format!("patched_{name}"));
    fs::write(&path, text.replace(from, to)).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn reference_simulation_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = mowave(
        &out,
        &["simulate", config("reference.json").to_str().unwrap(), "--grid-n", "50", "--trajectory"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["energy.csv", "identity.csv", "decay.svg", "trajectory.csv", "manifest.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("t,E,kinetic,gradient,restoring,nonlinear,flux,bound\n"));
    let identity = fs::read_to_string(out.join("identity.csv")).unwrap();
    assert!(identity.starts_with("t,dE_dt,rate_rhs,residual\n"));
    let svg = fs::read_to_string(out.join("decay.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"), "certificate line missing");
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn outdir_defaults_to_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mowave"))
        .env("MOWAVE_OUTDIR", dir.path())
        .args(["simulate", config("constant_beta.json").to_str().unwrap(), "--grid-n", "16"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn speed_of_light_boundary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "manufactured_affine.json", r#""k": 0.5"#, r#""k": 1.0"#);
    let o = mowave(&dir.path().join("out"), &["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sup α'(t)<1"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unstable_time_step_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["simulate", config("reference.json").to_str().unwrap(), "--cfl", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("blew up") && stderr(&o).contains("t = "), "{}", stderr(&o));
}

#[test]
fn malformed_and_unknown_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = patched(dir.path(), "reference.json", r#""horizon""#, r#""extra": 1, "horizon""#);
    assert_eq!(mowave(dir.path(), &["simulate", &unknown]).status.code(), Some(2));
    assert_eq!(mowave(dir.path(), &["certify", &unknown]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(
        mowave(dir.path(), &["simulate", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(mowave(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn certify_prints_certificate_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["certify", config("constant_beta.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["lambda_lo"], 0.0);
    assert!((cert["lambda_hi"].as_f64().unwrap() - 0.638_896_919_471_352_6).abs() < 1e-9);
    assert!(cert["C"].as_f64().unwrap() > 1.0);
}

#[test]
fn certify_empty_window_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["certify", config("fast_beta.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("empty window"));
    assert!(o.stdout.is_empty());
}

#[test]
fn certify_without_restoring_term_uses_poincare_window() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["certify", config("no_restoring.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["branch"], "remark1");
    assert_eq!(cert["omega_star"], 1.0);
    // λ(3/2 + a²|Ω*|²/2) ≤ a/2 binds at λ = 1/4, inside aλ|Ω*|² < 1.
    assert!((cert["lambda_hi"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn empty_window_simulation_still_succeeds_without_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["simulate", config("fast_beta.json").to_str().unwrap(), "--grid-n", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let energy = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let first = energy.lines().nth(1).unwrap();
    assert!(first.ends_with(','), "bound column should be empty: {first}");
    assert!(!fs::read_to_string(dir.path().join("decay.svg")).unwrap().contains("stroke-dasharray"));
}

#[test]
fn manifest_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["simulate", config("constant_beta.json").to_str().unwrap(), "--grid-n", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(verify_manifest(dir.path()).unwrap().is_empty());

    let energy = dir.path().join("energy.csv");
    let mut text = fs::read_to_string(&energy).unwrap();
    text.push('\n');
    fs::write(&energy, text).unwrap();
    fs::remove_file(dir.path().join("decay.svg")).unwrap();
    let mut bad = verify_manifest(dir.path()).unwrap();
    bad.sort();
    assert_eq!(bad, ["decay.svg", "energy.csv"]);
}

#[test]
fn literal_energy_flag_changes_only_the_restoring_part() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "constant_beta.json", r#""b": 1.0"#, r#""b": 4.0"#);
    let (plain, literal) = (dir.path().join("plain"), dir.path().join("literal"));
    assert_eq!(mowave(&plain, &["simulate", &cfg, "--grid-n", "16"]).status.code(), Some(0));
    assert_eq!(
        mowave(&literal, &["simulate", &cfg, "--grid-n", "16", "--paper-literal-energy"]).status.code(),
        Some(0)
    );
    let row = |dir: &Path| -> Vec<f64> {
        let text = fs::read_to_string(dir.join("energy.csv")).unwrap();
        text.lines().nth(1).unwrap().split(',').take(7).map(|v| v.parse().unwrap()).collect()
    };
    let (p, l) = (row(&plain), row(&literal));
    assert_eq!(p[2], l[2]);
    assert_eq!(p[3], l[3]);
    assert!((p[4] - 4.0 * l[4]).abs() < 1e-12 * p[4]);
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("manufactured_affine.json");
    let o = mowave(dir.path(), &["convergence", cfg.to_str().unwrap(), "--grid-n", "50,100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("order")).count(), 6);
    assert!(dir.path().join("convergence.csv").is_file());

    // Too coarse to be asymptotic; the rate residual lags behind.
    let coarse = mowave(dir.path(), &["convergence", cfg.to_str().unwrap(), "--grid-n", "8,16"]);
    assert_eq!(coarse.status.code(), Some(6));

    let single = mowave(dir.path(), &["convergence", cfg.to_str().unwrap(), "--grid-n", "50"]);
    assert_eq!(single.status.code(), Some(2));
}

#[test]
fn sweep_flags_only_fast_growth_as_empty() {
    let dir = tempfile::tempdir().unwrap();
    let o = mowave(dir.path(), &["sweep", config("sweep_mu.json").to_str().unwrap(), "--grid-n", "32", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(
        header,
        ["mu", "rho", "k", "a", "b", "lambda_lo", "lambda_hi", "lambda_fit", "C", "bound_holds", "exit"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let mus: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(mus, ["0.0", "0.1", "0.5", "2.0"]);
    for r in &rows {
        let lo: f64 = r[5].parse().unwrap();
        let hi: f64 = r[6].parse().unwrap();
        assert_eq!(lo > hi, &r[0] == "2.0");
        assert_eq!(r[8].is_empty(), &r[0] == "2.0");
    }
    assert!(dir.path().join("cells/cell_0003/manifest.json").is_file());
}

#[test]
fn sweep_without_axes_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(config("reference.json")).unwrap();
    let sweep = dir.path().join("sweep.json");
    fs::write(&sweep, format!(r#"{{"base": {base}}}"#)).unwrap();
    let o = mowave(&dir.path().join("sweep"), &["sweep", sweep.to_str().unwrap(), "--grid-n", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let s = mowave(
        &dir.path().join("single"),
        &["simulate", config("reference.json").to_str().unwrap(), "--grid-n", "32"],
    );
    assert_eq!(s.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert_eq!(
        fs::read(dir.path().join("sweep/cells/cell_0000/energy.csv")).unwrap(),
        fs::read(dir.path().join("single/energy.csv")).unwrap()
    );
}

#[test]
fn sweep_records_failing_cells_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.json");
    let base = fs::read_to_string(config("manufactured_affine.json")).unwrap();
    fs::write(&sweep, format!(r#"{{"base": {base}, "axes": {{"k": [0.5, 1.0]}}}}"#)).unwrap();
    let o = mowave(dir.path(), &["sweep", sweep.to_str().unwrap(), "--grid-n", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let exits: Vec<&str> = table.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(exits, ["0", "2"]);
}
