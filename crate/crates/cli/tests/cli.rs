use std::path::Path;
use std::process::{Command, Output};

use idmatrix::bounds::{self, BoundParams};
use idmatrix::ensemble::{EnsembleSpec, Pattern};
use idmatrix::experiments::{self, BoundRequest, Center, ExperimentConfig, FunctionalSpec, GridSpec, Side};
use idmatrix::levy::LevyModel;
use idmatrix::reference_laws::{LawKind, ReferenceLaw};
use idmatrix::sampler::UniformMethod;
use serde_json::Map;
use tempfile::TempDir;

fn idmatrix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idmatrix")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_config(tags: &[&str], replicas: usize) -> ExperimentConfig {
    ExperimentConfig {
        model: LevyModel::iid_atoms(16, &[(1.0, 1.0)]).unwrap(),
        ensemble: EnsembleSpec::new(4, Pattern::GuePattern),
        functional: FunctionalSpec::LambdaMax,
        replicas,
        master_seed: 5,
        delta_grid: GridSpec::Text("0.5:2:4".into()),
        bounds: tags.iter().map(|t| BoundRequest { theorem: (*t).into(), params: Map::new() }).collect(),
        center: Center::FZero,
        side: Side::Upper,
        confidence: 0.999,
        sampler: UniformMethod::default(),
    }
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["bound", "eval", "--help"], &["--version"]] {
        let o = idmatrix(args);
        assert!(o.status.success(), "{args:?}");
        assert!(!stdout(&o).is_empty());
    }
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [&["nope"][..], &["bound", "eval", "--grid", "1:2:3"], &["sample", "--count", "x", "--model", "m"]] {
        let o = idmatrix(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert!(err.starts_with("idmatrix: error[E_USAGE]: "), "{err}");
        assert_eq!(err.lines().count(), 1, "{err}");
    }
}

#[test]
fn runtime_errors_exit_one_with_a_code() {
    let o = idmatrix(&["bound", "eval", "--theorem", "no_such", "--grid", "1:2:2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("idmatrix: error[E_BOUND]: "));
    let o = idmatrix(&["sample", "--model", "/definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("idmatrix: error[E_IO]: "));
    let o = idmatrix(&["bound", "eval", "--theorem", "thm1.5ii", "--grid", "1:2:2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn bound_eval_prints_the_library_curve() {
    let o = idmatrix(&["bound", "eval", "--theorem", "thm1.5ii", "--alpha", "1", "--sigma", "1", "--N", "10", "--a", "1", "--grid", "1:100:10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("delta,bound,valid,reason\n"));
    let params: BoundParams =
        serde_json::from_value(serde_json::json!({"alpha": 1.0, "sigma": 1.0, "n": 10, "a": 1.0})).unwrap();
    let deltas = bounds::parse_grid("1:100:10").unwrap();
    let curve = bounds::evaluate("thm1.5ii", None, &params, &deltas).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 10);
    let valid: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[2] == "true")
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<f64>().unwrap(), curve.deltas[i]);
        assert_eq!(r[1].parse::<f64>().unwrap(), curve.values[i]);
        assert_eq!(r[2] == "true", curve.valid[i]);
    }
    // α = 1: δ·bound is constant and the validity threshold is twice that constant
    let k = valid[0].0 * valid[0].1;
    assert!(valid.iter().all(|(d, b)| (d * b / k - 1.0).abs() < 1e-12));
    let first_invalid = &rows[0];
    assert_eq!(first_invalid[2], "false");
    let th: f64 = first_invalid[3].trim_start_matches("needs δ > ").parse().unwrap();
    assert!((th / (2.0 * k) - 1.0).abs() < 1e-12);
}

#[test]
fn bound_list_names_every_tag() {
    let o = idmatrix(&["bound", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for (tag, _) in bounds::TAGS {
        assert!(text.lines().any(|l| l.starts_with(&format!("{tag},"))), "{tag}");
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let model = write_json(dir.path(), "model.json", &LevyModel::iid_stable(3, 1.5, 0.5, 0.5).unwrap());
    let run = |seed: &str| stdout(&idmatrix(&["--seed", seed, "sample", "--model", &model, "--count", "25"]));
    let a = run("7");
    assert_eq!(a, run("7"));
    assert_ne!(a, run("8"));
    assert!(a.starts_with("x1,x2,x3\n"));
    assert_eq!(a.lines().count(), 26);
    assert!(!a.contains('\r'));
    let lepage = stdout(&idmatrix(&["--seed", "7", "sample", "--model", &model, "--count", "3", "--method", "lepage", "--terms", "50"]));
    assert_eq!(lepage.lines().count(), 4);
}

#[test]
fn spectrum_writes_eigenvalues_and_histogram() {
    let dir = TempDir::new().unwrap();
    let model = write_json(dir.path(), "model.json", &LevyModel::iid_atoms(25, &[(1.0, 2.0)]).unwrap());
    let ensemble = write_json(dir.path(), "ensemble.json", &EnsembleSpec::new(5, Pattern::GuePattern));
    let out = dir.path().join("spec");
    let o = idmatrix(&[
        "--seed", "3", "--threads", "2", "--out", out.to_str().unwrap(),
        "spectrum", "--model", &model, "--ensemble", &ensemble, "--replicas", "6", "--bins", "8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eig = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert!(eig.starts_with("replica,index,eigenvalue\n"));
    let eig_rows = rows(&eig);
    assert_eq!(eig_rows.len(), 30);
    for r in eig_rows.iter().filter(|r| r[0] == "0") {
        let _: f64 = r[2].parse().unwrap();
    }
    let hist = rows(&std::fs::read_to_string(out.join("histogram.csv")).unwrap());
    assert_eq!(hist.len(), 8);
    let mass: f64 = hist
        .iter()
        .map(|r| (r[1].parse::<f64>().unwrap() - r[0].parse::<f64>().unwrap()) * r[2].parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
    // threads do not change the output
    let again = idmatrix(&["--seed", "3", "spectrum", "--model", &model, "--ensemble", &ensemble, "--replicas", "6"]);
    assert_eq!(stdout(&again), eig);
}

#[test]
fn distance_against_law_and_other_esd() {
    let dir = TempDir::new().unwrap();
    let law = ReferenceLaw::new(LawKind::Semicircle { scale: 1.0 }).unwrap();
    let n = 400;
    let mut text = String::from("eigenvalue\n");
    for i in 0..n {
        text.push_str(&format!("{}\n", law.quantile((i as f64 + 0.5) / n as f64)));
    }
    let esd = dir.path().join("esd.csv");
    std::fs::write(&esd, text).unwrap();
    let esd = esd.to_str().unwrap();
    let o = idmatrix(&["distance", "--esd", esd, "--law", "semicircle", "--b", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!((r[0][0].as_str(), r[1][0].as_str()), ("w1", "bl"));
    let (w1, bl): (f64, f64) = (r[0][1].parse().unwrap(), r[1][1].parse().unwrap());
    // midpoint quantiles of a law with support length 4: W₁ ≤ 4 / (2n)
    assert!(w1 > 0.0 && w1 < 2.0 / n as f64, "{w1}");
    // the law is cut into 4096 cells over a support of length 4
    assert!(bl <= w1 + 2.0 / 4096.0, "{bl} {w1}");
    let same = idmatrix(&["distance", "--esd", esd, "--other", esd]);
    assert_eq!(rows(&stdout(&same))[0][1], "0");
    let missing = idmatrix(&["distance", "--esd", esd]);
    assert_eq!(missing.status.code(), Some(2));
    let mp = idmatrix(&["distance", "--esd", esd, "--law", "marchenko-pastur"]);
    assert_eq!(mp.status.code(), Some(1));
    assert!(stderr(&mp).contains("gamma-aspect"));
}

#[test]
fn verify_writes_reports_and_sets_the_status() {
    let dir = TempDir::new().unwrap();
    let config = small_config(&["prop2.1ii", "trivial"], 200);
    let path = write_json(dir.path(), "ok.json", &config);
    let out = dir.path().join("ok");
    let o = idmatrix(&["--out", out.to_str().unwrap(), "verify", "--config", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv, experiments::run(&config).unwrap().to_csv());
    assert!(out.join("report.json").is_file());
    assert!(stderr(&o).starts_with("verify: "));

    let mut bad = small_config(&["prop2.1ii"], 2000);
    bad.delta_grid = GridSpec::List(vec![0.01]);
    bad.bounds[0].params.insert("a".into(), serde_json::json!(1e-6));
    let path = write_json(dir.path(), "bad.json", &bad);
    let o = idmatrix(&["verify", "--config", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",FAIL"));
    assert!(stderr(&o).contains("1 FAIL"));

    // the command-line seed overrides the config
    let a = stdout(&idmatrix(&["--seed", "99", "verify", "--config", &path]));
    let mut reseeded = bad.clone();
    reseeded.master_seed = 99;
    assert_eq!(a, experiments::run(&reseeded).unwrap().to_csv());
}
