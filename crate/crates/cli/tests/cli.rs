use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qha(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qha"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .output()
        .expect("qha runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

/// Data rows of a CSV file, after the comment block and the header.
fn csv_rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let text = read(path);
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

const SMALL: &[&str] = &["--d", "12", "--resolution", "64"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(dir: &Path, args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    qha(dir, &refs)
}

#[test]
fn default_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["verify"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("verify/summary.csv"));
    assert_eq!(header, ["identity", "residual", "tolerance", "passed", "flags"]);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[3] == "true"));
    let record = json(dir.path().join("verify/weyl_inverse.json"));
    assert_eq!(record["schema_version"], "1");
    assert_eq!(record["config"]["model"]["d"], 40);
}

#[test]
fn tiny_window_fails_with_instability_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["verify", "--window", "1", "--pairs", "1"]));
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("trace_identity"));
    let record = json(dir.path().join("verify/window_stability.json"));
    assert_eq!(record["passed"], false);
    let flags: Vec<String> = serde_json::from_value(record["flags"].clone()).unwrap();
    assert!(flags.contains(&"window_instability".to_string()), "{flags:?}");
    assert!(stdout(&out).contains("window_instability"));
}

#[test]
fn low_quadrature_order_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["verify", "--d", "20", "--q", "10"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("quadrature order"));
    assert!(!dir.path().join("verify").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["approx", "weyl:abc"],
        vec!["approx", "nonsense"],
        vec!["sweep", "unknown-kind"],
        vec!["verify", "--tol", "bogus=1"],
        vec!["verify", "--threads", "0"],
        vec!["frobnicate"],
        vec![],
    ] {
        let out = qha(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn weyl_at_zero_gives_a_zero_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["approx", "weyl:0", "--stages", "1,2"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("approx.csv"));
    assert_eq!(header, ["N", "l1_residual", "op_error", "baseline_error"]);
    assert!(column(&header, &rows, "op_error").iter().all(|e| *e < 1e-12));
    let report = json(dir.path().join("approx.json"));
    assert_eq!(report["checks"]["dominated"], true);
    assert_eq!(report["config"]["args"]["target"], "weyl:0");
}

#[test]
fn gaussian_bump_curve_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["approx", "toeplitz:gaussian-bump", "--d", "20", "--stages", "1,2,4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("approx.csv"));
    let errors = column(&header, &rows, "op_error");
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn quantization_sweep_has_four_decreasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["sweep", "quantization", "--d", "16"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("sweep-quantization.csv"));
    assert_eq!(rows.len(), 4);
    for name in ["product_defect", "heat_defect"] {
        let v = column(&header, &rows, name);
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{name}: {v:?}");
    }
    let degrees = column(&header, &rows, "model_d");
    assert_eq!(degrees, [16.0, 32.0, 64.0, 128.0]);
}

#[test]
fn radial_symbol_is_flagged_as_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["sweep", "invariance", "--symbol", "radial(width=2)", "--direction", "1"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sidecar = json(dir.path().join("sweep-invariance.json"));
    assert_eq!(sidecar["checks"]["invariant"], false);
    assert_eq!(sidecar["flags"][0], "negative_control");
    assert!(sidecar["max_residual"].as_f64().unwrap() > 0.01);
}

#[test]
fn horizontal_symbol_is_invariant_along_imaginary_directions() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["sweep", "invariance"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sidecar = json(dir.path().join("sweep-invariance.json"));
    assert_eq!(sidecar["checks"]["invariant"], true, "{}", sidecar["max_residual"]);
}

#[test]
fn identity_has_a_flat_compactness_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["sweep", "compactness"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("sweep-compactness.csv"));
    let k = header.iter().position(|h| h == "berezin_max").unwrap();
    let trusted: Vec<f64> = rows
        .iter()
        .filter(|r| r.last().unwrap() == "false")
        .map(|r| r[k].parse().unwrap())
        .collect();
    assert!(trusted.len() >= 4);
    assert!(trusted.iter().all(|v| (v - 1.0).abs() < 1e-8), "{trusted:?}");
    let (_, sv) = csv_rows(dir.path().join("sweep-compactness-singular-values.csv"));
    assert_eq!(sv.len(), 13);
}

#[test]
fn approximate_identity_sweep_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = qha(dir.path(), &["sweep", "approx-identity", "--d", "16"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("sweep-approx-identity.csv"));
    let errors = column(&header, &rows, "op_error");
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn exported_operator_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["export-operator", "weyl:0.5-0.25i"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let path = dir.path().join("operator.json");
    let op = qha_core::fock::io::load_operator(&path).unwrap();
    let p = qha_core::FockParams::new(1, 1.0, 12, 22).unwrap();
    assert_eq!(op, qha_core::weyl::weyl(&p, &[num_complex::Complex64::new(0.5, -0.25)]));
    assert_eq!(json(path)["metadata"]["command"], "export-operator");
}

#[test]
fn berezin_export_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["export-berezin", "rank-one:0.5", "--points", "11"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(dir.path().join("berezin.csv"));
    assert_eq!(header, ["re_z1", "im_z1", "re_value", "im_value", "flagged"]);
    assert_eq!(rows.len(), 121);
    let peak = column(&header, &rows, "re_value").into_iter().fold(0.0, f64::max);
    assert!(peak <= 1.0 + 1e-12 && peak > 0.9, "{peak}");
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[model]\nd = 14\nt = 0.5\n\n[run]\nseed = 9\n\n[tolerances]\ntrace_identity = 0.001\n").unwrap();
    let out = qha(dir.path(), &["--config", cfg.to_str().unwrap(), "--d", "10", "--print-config"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let printed: toml::Value = toml::from_str(&stdout(&out)).unwrap();
    assert_eq!(printed["model"]["d"].as_integer(), Some(10));
    assert_eq!(printed["model"]["q"].as_integer(), Some(20));
    assert_eq!(printed["model"]["t"].as_float(), Some(0.5));
    assert_eq!(printed["run"]["seed"].as_integer(), Some(9));
    assert_eq!(printed["tolerances"]["trace_identity"].as_float(), Some(0.001));
    assert!(printed["convolution"]["window"].as_float().unwrap() > 0.0);

    std::fs::write(&cfg, "[model]\nsize = 3\n").unwrap();
    let out = qha(dir.path(), &["--config", cfg.to_str().unwrap(), "verify"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_outputs_embed_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), with(SMALL, &["sweep", "compactness", "--seed", "5"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = read(dir.path().join("sweep-compactness.csv"));
    let block: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect();
    let embedded: toml::Value = toml::from_str(&block).unwrap();
    assert_eq!(embedded["schema_version"].as_str(), Some("1"));
    assert_eq!(embedded["seed"].as_integer(), Some(5));
    assert_eq!(embedded["model"]["d"].as_integer(), Some(12));
    assert_eq!(embedded["args"]["kind"].as_str(), Some("compactness"));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((name, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["verify", "--pairs", "2"],
        vec!["approx", "random:2", "--stages", "1,2"],
        vec!["sweep", "approx-identity", "--values", "1,0.5"],
    ];
    for args in runs {
        let mut snapshots = Vec::new();
        for threads in ["1", "3"] {
            let dir = tempfile::tempdir().unwrap();
            let mut all = with(SMALL, &args);
            all.extend(["--threads".to_string(), threads.to_string()]);
            let out = run(dir.path(), all);
            assert!(code(&out) <= 1, "{args:?}: {}", stderr(&out));
            snapshots.push(snapshot(dir.path()));
        }
        assert!(!snapshots[0].is_empty());
        assert_eq!(snapshots[0], snapshots[1], "{args:?}");
    }
}
