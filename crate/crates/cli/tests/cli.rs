use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attrdiff::format::{save_matrix, MatrixFormat, Precision};
use attrdiff::{compare, endpoint_direction, select_endpoint, AttributeMatrix, CompareOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_attrdiff"));
    c.env_remove("ATTRDIFF_SEED");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gaussian(n: usize, shifts: &[f64], seed: u64) -> AttributeMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let d = shifts.len();
    let values = (0..n * d)
        .map(|k| shifts[k % d] + z.sample(&mut rng))
        .collect();
    AttributeMatrix::new(n, d, values).unwrap()
}

fn write(m: &AttributeMatrix, dir: &Path, name: &str) -> PathBuf {
    let p = dir.join(name);
    save_matrix(m, &p, MatrixFormat::from_path(&p), Precision::F64).unwrap();
    p
}

fn fixture() -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let real = write(
        &gaussian(60, &[0.0, 2.0, 0.0, -1.0, 0.0], 1),
        dir.path(),
        "real.adif",
    );
    let dev = write(
        &gaussian(50, &[0.0, 0.0, 0.0, 0.0, 0.0], 2),
        dir.path(),
        "dev.adif",
    );
    (dir, real, dev)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    jsonschema::validator_for(&read_json(&path)).unwrap()
}

fn assert_valid(report: &Value) {
    let v = schema();
    let errors: Vec<String> = v
        .iter_errors(report)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn diff_writes_report_plots_and_directions() {
    let (dir, real, dev) = fixture();
    ok(
        &["diff", s(&real), s(&dev), "--k", "3", "--out", "out"],
        dir.path(),
    );
    let out = dir.path().join("out");
    let report = read_json(&out.join("report.json"));
    assert_valid(&report);
    let result = &report["result"];
    assert_eq!(result["selected"].as_array().unwrap().len(), 3);
    assert_eq!(result["ranked"].as_array().unwrap().len(), 5);
    assert_eq!(result["ranked"][0]["dim"], 1);
    assert_eq!(result["selected"][0]["endpoint"], "max_end");
    assert_eq!(report["config"]["k"], 3);
    assert_eq!(report["config"]["bins"], 60);
    assert_eq!(report["version"], attrdiff::VERSION);
    for sel in result["selected"].as_array().unwrap() {
        let svg = std::fs::read_to_string(out.join(sel["svg"].as_str().unwrap())).unwrap();
        assert!(svg.starts_with("<svg"));
    }
    let dirs = std::fs::read_to_string(out.join("directions.csv")).unwrap();
    assert_eq!(dirs.lines().count(), 4);
    assert!(dirs.lines().nth(1).unwrap().starts_with("1,1,0,1,0,0,0"));
}

#[test]
fn diff_with_pca_is_schema_valid() {
    let (dir, real, dev) = fixture();
    ok(
        &[
            "diff",
            s(&real),
            s(&dev),
            "--pca",
            "--k",
            "2",
            "--no-normalize",
            "--order",
            "1",
            "--out",
            "o",
        ],
        dir.path(),
    );
    let report = read_json(&dir.path().join("o/report.json"));
    assert_valid(&report);
    assert_eq!(report["result"]["pca_applied"], true);
    assert_eq!(report["result"]["score_kind"], "raw");
    assert_eq!(report["result"]["order"], "1");
    assert_eq!(report["config"]["pca_threshold"], 0.99999);
    let dir0 = report["result"]["selected"][0]["direction"]
        .as_array()
        .unwrap();
    let norm: f64 = dir0.iter().map(|v| v.as_f64().unwrap().powi(2)).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn identical_inputs_give_zero_distance() {
    let (dir, real, _) = fixture();
    ok(&["diff", s(&real), s(&real), "--out", "same"], dir.path());
    let report = read_json(&dir.path().join("same/report.json"));
    for r in report["result"]["ranked"].as_array().unwrap() {
        assert_eq!(r["norm_w"], 0.0);
        assert_eq!(r["raw_w"], 0.0);
    }
    let dims: Vec<u64> = report["result"]["ranked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["dim"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![0, 1, 2, 3, 4]);
}

#[test]
fn validation_and_io_exit_codes() {
    let (dir, real, _) = fixture();
    let narrow = write(
        &gaussian(10, &[0.0, 0.0, 0.0], 3),
        dir.path(),
        "narrow.adif",
    );
    let out = run(&["diff", s(&real), s(&narrow)], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('5') && err.contains('3'), "{err}");
    assert_eq!(err.lines().count(), 1);

    let out = run(&["diff", s(&real), "missing.adif"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.adif"));

    let out = run(&["diff", s(&real), s(&real), "--k", "9"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,x\n").unwrap();
    let out = run(&["diff", "bad.csv", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["select", s(&real), "--dim", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2), "auto endpoint needs --dev");

    let out = run(&["eval", "--methods", "stylediff,magic"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn select_auto_composes_endpoint_rule() {
    let (dir, real, dev) = fixture();
    let out = ok(
        &[
            "select",
            s(&real),
            "--dev",
            s(&dev),
            "--dim",
            "3",
            "--k",
            "10",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&report);

    let r = attrdiff::load_matrix(&real, MatrixFormat::Binary).unwrap();
    let d = attrdiff::load_matrix(&dev, MatrixFormat::Binary).unwrap();
    let cmp = compare(
        &r,
        &d,
        &CompareOptions {
            top_k: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let dim3 = cmp.ranked.iter().find(|x| x.dim == 3).unwrap();
    let want = select_endpoint(&r, 3, endpoint_direction(dim3), 10).unwrap();
    assert_eq!(report["result"]["direction"], "min_end");
    let got: Vec<usize> = report["result"]["indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(got, want.indices);
}

#[test]
fn select_window_uses_seed_from_env() {
    let (dir, real, _) = fixture();
    let args = [
        "select",
        s(&real),
        "--dim",
        "0",
        "--center",
        "0",
        "--half-width",
        "1.5",
        "--k",
        "5",
    ];
    let a = bin()
        .args(args)
        .env("ATTRDIFF_SEED", "7")
        .current_dir(dir.path())
        .output()
        .unwrap();
    let b = ok(&[&args[..], &["--seed", "7"]].concat(), dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_valid(&report);
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["result"]["mode"], "window");
}

#[test]
fn baseline_methods_emit_selection_reports() {
    let (dir, real, dev) = fixture();
    for method in ["lof", "kcenter", "fid", "random"] {
        let out = ok(
            &[
                "baseline",
                s(&real),
                s(&dev),
                "--method",
                method,
                "--k",
                "10",
                "--neighbors",
                "5",
            ],
            dir.path(),
        );
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_valid(&report);
        assert_eq!(report["result"]["indices"].as_array().unwrap().len(), 10);
        assert_eq!(report["config"]["options"]["method"], method);
    }
    let out = ok(
        &[
            "baseline",
            s(&real),
            s(&dev),
            "--method",
            "kcenter",
            "--k",
            "3",
            "--sample",
            "20",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["result"]["indices"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_u64().unwrap() < 60));
}

#[test]
fn hist_counts_and_svg() {
    let (dir, real, dev) = fixture();
    let out = ok(
        &[
            "hist",
            s(&real),
            s(&dev),
            "--dim",
            "1",
            "--bins",
            "7",
            "--count-above",
            "1.0",
            "--svg",
            "h.svg",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&report);
    let h = &report["result"]["histogram"];
    assert_eq!(h["edges"].as_array().unwrap().len(), 8);
    let total: u64 = h["counts_x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(total, 60);
    let r = attrdiff::load_matrix(&real, MatrixFormat::Binary).unwrap();
    let above = r.column(1).iter().filter(|&&v| v > 1.0).count() as u64;
    assert_eq!(report["result"]["count"]["real"], above);
    assert!(dir.path().join("h.svg").exists());
    let out = ok(
        &[
            "hist",
            s(&real),
            s(&dev),
            "--dim",
            "1",
            "--count-below",
            "-0.5",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["count"]["side"], "below");
}

#[test]
fn convert_round_trip_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let m = gaussian(12, &[0.0, 1e-7, 3e20], 4)
        .with_sample_ids((0..12).map(|i| format!("img_{i:02}.png")).collect())
        .unwrap();
    let csv = write(&m, dir.path(), "in.csv");
    ok(&["convert", s(&csv), "mid.adif"], dir.path());
    ok(&["convert", "mid.adif", "back.csv"], dir.path());
    assert_eq!(
        std::fs::read(&csv).unwrap(),
        std::fs::read(dir.path().join("back.csv")).unwrap()
    );
    ok(
        &["convert", "mid.adif", "small.adif", "--precision", "f32"],
        dir.path(),
    );
    let small =
        attrdiff::load_matrix(&dir.path().join("small.adif"), MatrixFormat::Binary).unwrap();
    assert_eq!(small.sample_ids(), m.sample_ids());
}

#[test]
fn pca_subcommand_writes_model() {
    let (dir, real, dev) = fixture();
    ok(
        &["pca", s(&real), s(&dev), "--out", "p", "--transform"],
        dir.path(),
    );
    let report = read_json(&dir.path().join("p/report.json"));
    assert_valid(&report);
    let model = attrdiff::spectral::load_pca(&dir.path().join("p/model.adpc")).unwrap();
    assert_eq!(report["result"]["n_components"], model.n_components());
    let t =
        attrdiff::load_matrix(&dir.path().join("p/real.pca.adif"), MatrixFormat::Binary).unwrap();
    assert_eq!(t.cols(), model.n_components());
    let out = ok(
        &[
            "select",
            "p/real.pca.adif",
            "--dev",
            "p/dev.pca.adif",
            "--dim",
            "0",
            "--k",
            "3",
        ],
        dir.path(),
    );
    let via_files: Value = serde_json::from_slice(&out.stdout).unwrap();
    let out = ok(
        &[
            "select",
            s(&real),
            "--dev",
            s(&dev),
            "--pca-model",
            "p/model.adpc",
            "--dim",
            "0",
            "--k",
            "3",
        ],
        dir.path(),
    );
    let via_model: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        via_files["result"]["indices"],
        via_model["result"]["indices"]
    );
}

#[test]
fn eval_small_synthetic_run() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "eval",
            "--methods",
            "stylediff,random",
            "--trials",
            "2",
            "--n-per-dataset",
            "60",
            "--synth-pool",
            "200",
            "--synth-d",
            "4",
            "--synth-planted",
            "0",
            "--synth-delta",
            "4",
            "--synth-scale",
            "uniform:1",
            "--out",
            "e",
        ],
        dir.path(),
    );
    let report = read_json(&dir.path().join("e/report.json"));
    assert_valid(&report);
    let csv = std::fs::read_to_string(dir.path().join("e/benchmark.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("config,method,mean,std,trial_0,trial_1\n"));
    assert!(report["result"]["entries"][0]["mean"].as_f64().unwrap() > 0.85);
}

#[test]
fn eval_external_pool_with_labels() {
    let dir = TempDir::new().unwrap();
    let synth = attrdiff::eval::synth_generate(&attrdiff::eval::SynthConfig {
        d: 3,
        n: 200,
        planted_dims: vec![2],
        delta: 3.0,
        scale_law: attrdiff::eval::ScaleLaw::Uniform { scale: 1.0 },
        rotation: None,
        seed: 1,
    })
    .unwrap();
    let attrs = write(&synth.matrix, dir.path(), "pool.adif");
    let labels: String = std::iter::once("label\n".to_string())
        .chain(synth.labels.labels.iter().map(|l| format!("{l}\n")))
        .collect();
    std::fs::write(dir.path().join("smile.csv"), labels).unwrap();
    ok(
        &[
            "eval",
            "--attrs",
            s(&attrs),
            "--labels",
            "smile.csv",
            "--methods",
            "stylediff",
            "--trials",
            "1",
            "--n-per-dataset",
            "50",
            "--out",
            "x",
        ],
        dir.path(),
    );
    let report = read_json(&dir.path().join("x/report.json"));
    assert_valid(&report);
    assert_eq!(report["result"]["entries"][0]["config"], "label");

    ok(
        &[
            "eval",
            "--attrs",
            s(&attrs),
            "--labels",
            "smile.csv",
            "--methods",
            "stylediff",
            "--trials",
            "1",
            "--n-per-dataset",
            "150",
            "--out",
            "y",
        ],
        dir.path(),
    );
    let report = read_json(&dir.path().join("y/report.json"));
    assert_eq!(report["result"]["skipped"].as_array().unwrap().len(), 1);
    assert!(report["result"]["entries"].as_array().unwrap().is_empty());
}

#[test]
fn help_documents_defaults() {
    let out = bin().args(["diff", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "[default: 3]",
        "[default: 60]",
        "[default: 2]",
        "ATTRDIFF_SEED",
    ] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}
