use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use csa_core::cca::CsaModel;
use csa_core::io::{save_manifest, write_feature_file, write_model, Dtype, Manifest, PairEntry, Split};
use csa_core::{FeatureMatrix, Matrix};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn csa_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_csa"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn csa(args: &[&str]) -> Output {
    csa_env(args, &[])
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = csa(args);
    assert!(out.status.success(), "csa {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn text(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_then_score_reproduces_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tiny.csam");
    let manifest = fixture("tiny/manifest.json");
    ok(&["fit", s(&manifest), "-o", s(&model)]);
    let scores = ok(&["score", s(&model), s(&manifest)]);
    assert_eq!(scores, fs::read(fixture("tiny/golden_scores.tsv")).unwrap());
    // The model on standard output is the same file.
    assert_eq!(ok(&["fit", s(&manifest), "-o", "-"]), fs::read(&model).unwrap());
    let to_file = dir.path().join("scores.tsv");
    ok(&["score", s(&model), s(&manifest), "-o", s(&to_file)]);
    assert_eq!(fs::read(to_file).unwrap(), scores);
}

#[test]
fn binary_scores_decode_to_the_tsv_values() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tiny.csam");
    let manifest = fixture("tiny/manifest.json");
    ok(&["fit", s(&manifest), "-o", s(&model)]);
    let bin = ok(&["score", s(&model), s(&manifest), "--format", "binary"]);
    let decoded = csa_core::io::decode_features(&bin).unwrap();
    let tsv = text(ok(&["score", s(&model), s(&manifest)]));
    for (j, line) in tsv.lines().skip(1).enumerate() {
        let values: Vec<f64> = line.split('\t').skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(decoded.item(j), values);
        assert_eq!(decoded.ids()[j], line.split('\t').next().unwrap());
    }
}

/// A 768-dim model with hand-set maps, a labeled test split and class features.
fn wide_setup(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let d = 768;
    let rho: Vec<f64> = (0..d).map(|i| 0.99 - 0.001 * i as f64).collect();
    let model = CsaModel::from_parts(Matrix::identity(d), Matrix::identity(d), rho, vec![0.0; d], vec![0.0; d], 1e-6, 20)
        .unwrap();
    let model_path = dir.join("wide.csam");
    write_model(&model_path, &model).unwrap();

    let class_vec = |c: usize| (0..d).map(|i| ((i * (c + 3)) as f64 * 0.37).sin()).collect::<Vec<f64>>();
    let classes: Vec<Vec<f64>> = (0..4).map(class_vec).collect();
    let class_ids: Vec<String> = (0..4).map(|c| format!("c{c}")).collect();
    let class_path = dir.join("classes.csaf");
    write_feature_file(&class_path, &FeatureMatrix::from_items(&classes, class_ids).unwrap(), Dtype::F64).unwrap();

    let n = 12;
    let items: Vec<Vec<f64>> = (0..n)
        .map(|k| class_vec(k % 4).iter().enumerate().map(|(i, v)| v + 0.1 * ((i * 7 + k * 13) as f64).cos()).collect())
        .collect();
    let ids: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    let feats = FeatureMatrix::from_items(&items, ids.clone()).unwrap();
    write_feature_file(dir.join("f1.csaf"), &feats, Dtype::F32).unwrap();
    write_feature_file(dir.join("f2.csaf"), &feats, Dtype::F32).unwrap();
    let pairs = ids
        .iter()
        .enumerate()
        .map(|(k, id)| PairEntry {
            id1: id.clone(),
            id2: id.clone(),
            label: Some(format!("c{}", k % 4)),
            split: Some(if k < 8 { Split::Train } else { Split::Test }),
        })
        .collect();
    let manifest = Manifest {
        dataset: "wide".into(),
        encoder1: "hand".into(),
        encoder2: "hand".into(),
        features1: "f1.csaf".into(),
        features2: "f2.csaf".into(),
        pairs,
    };
    let manifest_path = dir.join("manifest.json");
    save_manifest(&manifest_path, &manifest).unwrap();
    (model_path, manifest_path, class_path)
}

#[test]
fn classify_reports_fixed_s_of_700_on_a_768_dim_model() {
    let dir = tempfile::tempdir().unwrap();
    let (model, manifest, classes) = wide_setup(dir.path());
    let report = text(ok(&["classify", s(&model), s(&manifest), "--classes", s(&classes), "--s-fixed", "700"]));
    assert!(report.lines().any(|l| l == "# s: 700"), "{report}");
    assert!(report.contains("accuracy: 1\n"), "{report}");
    let json: serde_json::Value =
        serde_json::from_slice(&ok(&["classify", s(&model), s(&manifest), "--classes", s(&classes), "--s-fixed", "700", "--format", "json"]))
            .unwrap();
    assert_eq!(json["provenance"]["s"], 700);
    assert_eq!(json["metrics"]["accuracy"], 1.0);
    let hash = json["provenance"]["model_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    // Past the model's rank is a validation error.
    let out = csa(&["classify", s(&model), s(&manifest), "--classes", s(&classes), "--s-fixed", "769"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tradeoff_default_snr_is_non_increasing() {
    let out = text(ok(&["synth", "tradeoff"]));
    let mut lines = out.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("s\tsnr_db\tlambda_min_db\tp_value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1], "{w:?}");
    }
    let grid = text(ok(&["synth", "tradeoff", "--s-grid", "2,10", "--n", "300", "--seed", "3"]));
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

fn export(dir: &Path) -> (String, String) {
    ok(&["synth", "export", "--out-dir", s(dir), "--n-train", "300", "--n-test", "120", "--seed", "2"]);
    (s(&dir.join("manifest.json")).to_string(), s(&dir.join("classes.csaf")).to_string())
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, classes) = export(dir.path());
    let model = s(&dir.path().join("m.csam")).to_string();
    ok(&["fit", &manifest, "-o", &model]);
    for args in [
        vec!["score", &model, &manifest, "--format", "binary"],
        vec!["classify", &model, &manifest, "--classes", &classes, "--s-sweep"],
        vec!["retrieve", &model, &manifest, "--direction", "2to1", "--k", "10"],
        vec!["robustness", &manifest, "--reps", "2", "--seed", "4"],
    ] {
        let one = csa_env(&args, &[("CSA_THREADS", "1")]);
        let four = csa_env(&args, &[("CSA_THREADS", "4")]);
        let auto = csa_env(&args, &[("CSA_THREADS", "0")]);
        assert!(one.status.success(), "{args:?}");
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(one.stdout, auto.stdout, "{args:?}");
    }
    let bad = csa_env(&["synth", "tradeoff", "--n", "100"], &[("CSA_THREADS", "many")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reports_carry_provenance_and_metric_names() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, classes) = export(dir.path());
    let model = s(&dir.path().join("m.csam")).to_string();
    ok(&["fit", &manifest, "-o", &model, "--s-fixed", "10", "--eps", "0.001"]);
    let report = text(ok(&["retrieve", &model, &manifest]));
    for key in ["# model_sha256: ", "# manifest_sha256: ", "# seed: NA", "# s: 10", "# eps: 0.001", "precision_at_1: ", "precision_at_k: ", "map_at_k: ", "k: 5"] {
        assert!(report.contains(key), "{key} missing in\n{report}");
    }
    let json: serde_json::Value = serde_json::from_slice(&ok(&["robustness", &manifest, "--classes", &classes, "--fractions", "0,1", "--reps", "3", "--format", "json"])).unwrap();
    assert_eq!(json["provenance"]["seed"], 0);
    assert_eq!(json["details"]["metric"], "accuracy");
    assert_eq!(json["table"]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(json["table"]["columns"][1], "accuracy");
}

/// Pairs from the tiny fixture: the first half aligned, the second half
/// paired with a cyclic shift of partners.
fn detection_manifest(dir: &Path) -> PathBuf {
    for f in ["features1.csaf", "features2.csaf"] {
        fs::copy(fixture("tiny").join(f), dir.join(f)).unwrap();
    }
    let pairs = (0..40)
        .map(|i| {
            let partner = if i < 20 { i } else { 20 + (i - 20 + 1) % 20 };
            PairEntry {
                id1: format!("train_{i}"),
                id2: format!("train_{partner}"),
                label: Some(if i < 20 { "1".into() } else { "0".into() }),
                split: None,
            }
        })
        .collect();
    let manifest = Manifest {
        dataset: "detect".into(),
        encoder1: String::new(),
        encoder2: String::new(),
        features1: "features1.csaf".into(),
        features2: "features2.csaf".into(),
        pairs,
    };
    let path = dir.join("detect.json");
    save_manifest(&path, &manifest).unwrap();
    path
}

#[test]
fn detect_single_and_two_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tiny.csam");
    ok(&["fit", s(&fixture("tiny/manifest.json")), "-o", s(&model)]);
    let manifest = detection_manifest(dir.path());
    let json: serde_json::Value = serde_json::from_slice(&ok(&["detect", s(&model), s(&manifest), "--format", "json"])).unwrap();
    let auc = json["metrics"]["auc"].as_f64().unwrap();
    assert!(auc > 0.8 && auc <= 1.0, "auc {auc}");
    let rows = json["table"]["rows"].as_array().unwrap();
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][2], "inf");
    assert_eq!(rows.last().unwrap()[1], 1.0);

    // Second scores that separate perfectly: in two-threshold mode labels mark misinformative pairs.
    let mut tsv = String::from("id1\tid2\tscore\n");
    for i in 0..40 {
        let partner = if i < 20 { i } else { 20 + (i - 20 + 1) % 20 };
        tsv.push_str(&format!("train_{i}\ttrain_{partner}\t{}\n", if i < 20 { 0.1 } else { 0.9 }));
    }
    let second = dir.path().join("second.tsv");
    fs::write(&second, tsv).unwrap();
    let out = text(ok(&["detect", s(&model), s(&manifest), "--two-threshold", "--second-scores", s(&second)]));
    assert!(out.contains("mode: two-threshold"), "{out}");
    assert!(out.contains("fpr\ttpr\tt1\tt2"), "{out}");
    let auc2: f64 = out.lines().find_map(|l| l.strip_prefix("auc: ")).unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&auc2));

    // A missing pair in the second score file is a validation error.
    fs::write(&second, "id1\tid2\tscore\ntrain_0\ttrain_0\t0.5\n").unwrap();
    let out = csa(&["detect", s(&model), s(&manifest), "--two-threshold", "--second-scores", s(&second)]);
    assert_eq!(out.status.code(), Some(1));
    // Labels that are not binary.
    let out = csa(&["detect", s(&model), s(&fixture("tiny/manifest.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

fn assert_one_line_error(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "not one line: {err:?}");
    assert!(err.starts_with("csa: "), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture("tiny/manifest.json");
    let model = dir.path().join("m.csam");

    assert_eq!(csa(&["--help"]).status.code(), Some(0));
    assert_eq!(csa(&["fit", "--help"]).status.code(), Some(0));
    assert_one_line_error(&csa(&["fit", s(&manifest), "-o", s(&model), "--bogus"]), 1);
    assert_one_line_error(&csa(&["fit"]), 1);
    assert_one_line_error(&csa(&["nonsense"]), 1);
    assert_one_line_error(&csa(&["fit", "/no/such/manifest.json", "-o", s(&model)]), 1);
    assert_one_line_error(&csa(&["fit", s(&manifest), "-o", s(&model), "--s-fixed", "0"]), 1);
    assert_one_line_error(&csa(&["fit", s(&manifest), "-o", s(&model), "--eps", "-1"]), 1);
    assert_one_line_error(&csa(&["robustness", s(&manifest), "--fractions", "0,1.5"]), 1);
    assert!(!model.exists());

    // Rank-deficient modality without a ridge: numerical failure.
    let items: Vec<Vec<f64>> = (0..6).map(|k| vec![k as f64, 2.0 * k as f64, 1.0]).collect();
    let ids: Vec<String> = (0..6).map(|k| format!("i{k}")).collect();
    let feats = FeatureMatrix::from_items(&items, ids.clone()).unwrap();
    write_feature_file(dir.path().join("a.csaf"), &feats, Dtype::F64).unwrap();
    let other: Vec<Vec<f64>> = (0..6).map(|k| vec![(k * k) as f64, (k as f64).sin()]).collect();
    write_feature_file(dir.path().join("b.csaf"), &FeatureMatrix::from_items(&other, ids.clone()).unwrap(), Dtype::F64).unwrap();
    let m = Manifest {
        dataset: String::new(),
        encoder1: String::new(),
        encoder2: String::new(),
        features1: "a.csaf".into(),
        features2: "b.csaf".into(),
        pairs: ids.iter().map(|id| PairEntry { id1: id.clone(), id2: id.clone(), label: None, split: None }).collect(),
    };
    let mpath = dir.path().join("deficient.json");
    save_manifest(&mpath, &m).unwrap();
    let out = csa(&["fit", s(&mpath), "-o", s(&model), "--eps", "0"]);
    assert_one_line_error(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
    // The default ridge makes the same data fittable.
    ok(&["fit", s(&mpath), "-o", s(&model), "--s-fixed", "1"]);
}
