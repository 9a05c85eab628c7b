use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opuc-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Writes `cfg.json` with `outputs` pointing into `dir/out` and returns its path.
fn config(dir: &Path, body: &str) -> PathBuf {
    let out = dir.join("out");
    let text = body.replace("OUT", &out.display().to_string());
    let path = dir.join("cfg.json");
    fs::write(&path, text).unwrap();
    path
}

fn opuc(args: &[&str], cfg: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opuc"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .env("OPUC_THREADS", "2")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

const BS2: &str = r#"{"weight": {"kind": "bernstein_szego", "c": 2.0}, "n_list": [2, 4, 6, 8, 10, 12, 14, 16], "outputs": "OUT"}"#;

#[test]
fn lebesgue_pipeline_is_exact_and_passes() {
    let dir = workdir("lebesgue");
    let cfg = config(&dir, r#"{"weight": {"kind": "lebesgue"}, "n_list": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10], "outputs": "OUT"}"#);
    assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
    let (_, rows) = csv(&dir.join("out/alpha.csv"));
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    assert_eq!(code(&opuc(&["predict", "--method", "scattering"], &cfg)), 0);
    let o = opuc(&["compare"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn bernstein_szego_pipeline_passes_with_slopes() {
    let dir = workdir("bs2");
    let cfg = config(&dir, BS2);
    assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
    // w = 5/4 - Re z, so d_0 = 5/4 and d_1 = -1/2 up to 2 pi, and alpha_0 = conj(d_{-1}/d_0)
    let (_, alpha) = csv(&dir.join("out/alpha.csv"));
    assert!((alpha[0][1] + 0.4).abs() < 1e-15 && alpha[0][2].abs() < 1e-15);

    assert_eq!(code(&opuc(&["predict", "--method", "scattering"], &cfg)), 0);
    let (header, _) = csv(&dir.join("out/predict_scattering.csv"));
    for c in ["alpha_l1_re", "alpha_l2_re", "kappa_sq_relative_deficit_l1", "kappa_sq_relative_deficit_l2"] {
        assert!(header.iter().any(|h| h == c), "missing {c}");
    }
    let o = opuc(&["compare"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("out/compare_report.json")).unwrap()).unwrap();
    for t in report["tests"].as_array().unwrap() {
        assert_eq!(t["status"], "pass");
        assert!(t["slope"].is_number());
    }
}

#[test]
fn wrong_rho_fails_the_slope_test() {
    let dir = workdir("wrong-rho");
    let cfg = config(&dir, &BS2.replace(r#""outputs""#, r#""rho": 0.25, "outputs""#));
    assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
    assert_eq!(code(&opuc(&["predict", "--method", "scattering"], &cfg)), 0);
    let o = opuc(&["compare"], &cfg);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 1);
    assert!(stdout.contains("FAIL alpha_error_slope"), "{stdout}");
}

#[test]
fn essential_level_curve_has_one_component() {
    let dir = workdir("essential");
    let cfg = config(&dir, r#"{"weight": {"kind": "essential", "rho": 0.5}, "n_list": [30], "outputs": "OUT"}"#);
    assert_eq!(code(&opuc(&["predict", "--method", "essential"], &cfg)), 0);
    let (header, rows) = csv(&dir.join("out/levelcurve.csv"));
    assert_eq!(header, ["re", "im", "component_id"]);
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r[2] == 0.0));
}

#[test]
fn essential_oracle_stays_in_the_disk() {
    let dir = workdir("essential-oracle");
    let cfg = config(&dir, r#"{"weight": {"kind": "essential", "rho": 0.5}, "n_list": [40], "outputs": "OUT"}"#);
    let start = std::time::Instant::now();
    assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
    assert!(start.elapsed().as_secs() < 30);
    let (_, rows) = csv(&dir.join("out/alpha.csv"));
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r[3] < 1.0));
}

#[test]
fn zero_weight_interior_zeros_follow_parity() {
    let dir = workdir("zero-weight");
    let cfg = config(
        &dir,
        r#"{"weight": {"kind": "zero_modified", "base": {"kind": "lebesgue"},
            "zeros": [{"angle": 0.0, "beta": 0.5}, {"angle": 3.141592653589793, "beta": 0.5}]},
            "n_list": [8, 9, 10, 11, 12], "outputs": "OUT"}"#,
    );
    assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
    assert_eq!(code(&opuc(&["predict", "--method", "zero-weight"], &cfg)), 0);
    let (_, predicted) = csv(&dir.join("out/predicted_zeros_zero-weight.csv"));
    let (_, actual) = csv(&dir.join("out/oracle_zeros.csv"));
    for n in 8..=12 {
        let p = predicted.iter().filter(|r| r[0] == n as f64 && r[3] < 0.4).count();
        let a = actual.iter().filter(|r| r[0] == n as f64 && r[3] < 0.4).count();
        assert_eq!((p, a), (n % 2, n % 2), "n = {n}");
    }
}

#[test]
fn json_outputs_are_deterministic_and_carry_a_manifest() {
    let dir = workdir("determinism");
    let cfg = config(&dir, &BS2.replace(r#""outputs""#, r#""format": "json", "outputs""#));
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        assert_eq!(code(&opuc(&["oracle"], &cfg)), 0);
        assert_eq!(code(&opuc(&["predict", "--method", "scattering"], &cfg)), 0);
        let names = ["alpha.json", "kappa.json", "phi_8.json", "predict_scattering.json", "smatrix.json"];
        snapshots.push(names.map(|n| fs::read(dir.join("out").join(n)).unwrap()));
    }
    assert_eq!(snapshots[0], snapshots[1]);
    let doc: serde_json::Value = serde_json::from_slice(&snapshots[0][0]).unwrap();
    assert_eq!(doc["manifest"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(doc["manifest"]["opuc_core"].is_string());
    assert_eq!(code(&opuc(&["compare"], &cfg)), 0);
}

#[test]
fn exit_codes_are_categorized() {
    let dir = workdir("exit-codes");
    let bad = config(&dir, r#"{"weight": {"kind": "lebesgue"}, "n_list": [3, 2], "outputs": "OUT"}"#);
    assert_eq!(code(&opuc(&["oracle"], &bad)), 2);
    let bad_r = config(&dir, r#"{"weight": {"kind": "bernstein_szego", "c": 2.0}, "n_list": [3], "r": 0.3, "outputs": "OUT"}"#);
    assert_eq!(code(&opuc(&["predict", "--method", "scattering"], &bad_r)), 2);
    let ess = config(&dir, r#"{"weight": {"kind": "essential", "rho": 0.5}, "n_list": [5], "outputs": "OUT"}"#);
    assert_eq!(code(&opuc(&["predict", "--method", "poles"], &ess)), 4);
    assert_eq!(code(&opuc(&["predict", "--method", "zero-weight"], &ess)), 4);
    assert_eq!(code(&opuc(&["compare"], &ess)), 5);
}
