use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mf_infer_cli::commands::analyze::{analyze, parse_log, parse_trace};
use mf_infer_cli::RunConfig;
use mf_infer::inference::MLaw;
use mf_infer::models::CoinModel;

const BIN: &str = env!("CARGO_BIN_EXE_mf-infer");

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn mf(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("MF_INFER_WORKERS").output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const COIN_IS: &str = r#"
schema_version = 1
seed = 42
[model]
kind = "coin"
[weighting]
kind = "abc"
[algorithm]
kind = "is"
[stop]
iterations = 1000
"#;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_is_deterministic_and_headed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coin.toml", COIN_IS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = mf(&["run", "--config", s(&cfg), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let c = dir.path().join("c");
    let o = Command::new(BIN)
        .args(["run", "--config", s(&cfg), "--out", s(&c)])
        .env("MF_INFER_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["summary.csv", "samples.jsonl"] {
        let x = fs::read(a.join(f)).unwrap();
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, fs::read(c.join(f)).unwrap(), "{f} with two workers");
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert!(lines[0].starts_with("# mf-infer ") && lines[0].contains("config=") && lines[0].ends_with("seed=42"));
    assert_eq!(lines[1], "n,g_hat,mse_hat,j_hat,total_cost");
    assert!(lines[2].starts_with("1000,"));
    assert!(lines[2].ends_with(",10000.0"));

    let other = dir.path().join("seeded");
    assert!(mf(&["run", "--config", s(&cfg), "--out", s(&other), "--seed", "43"]).status.success());
    let seeded = fs::read_to_string(other.join("summary.csv")).unwrap();
    assert!(seeded.lines().next().unwrap().ends_with("seed=43"));
    assert_ne!(seeded.lines().nth(2), summary.lines().nth(2));
}

#[test]
fn invalid_configs_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &COIN_IS.replace("seed = 42", "seed = 42\ncolour = 1"));
    let o = mf(&["run", "--config", s(&bad), "--out", s(&dir.path().join("o"))]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("colour") && err.contains("line"), "{err}");

    let neg = write_config(dir.path(), "neg.toml", &COIN_IS.replace("kind = \"abc\"", "kind = \"abc\"\nepsilon = -1.0"));
    let o = mf(&["run", "--config", s(&neg)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
}

#[test]
fn shipped_configs_use_the_published_settings() {
    let abc = RunConfig::load(&repo_file("configs/enzyme_abc.toml")).unwrap();
    assert_eq!(abc.epsilon(), Some(5.0));
    assert_eq!(abc.adaptive_defaults(), (10_000, 1e3));
    assert_eq!(abc.m_law, MLaw::Poisson);
    assert!(abc.warnings().is_empty(), "{:?}", abc.warnings());
    let bsl = RunConfig::load(&repo_file("configs/enzyme_bsl.toml")).unwrap();
    assert_eq!(bsl.weighting.replicates(), 100);
    assert_eq!(bsl.adaptive_defaults(), (2000, 1e8));
    assert!(bsl.warnings().is_empty(), "{:?}", bsl.warnings());
    for name in ["coin_is.toml", "coin_mf.toml", "birth_death_is.toml"] {
        RunConfig::load(&repo_file(&format!("configs/{name}"))).unwrap();
    }
}

#[test]
fn sweep_rows_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coin.toml", COIN_IS);
    let out = dir.path().join("one");
    let o = mf(&["sweep", "--config", s(&cfg), "--budget-list", "1000", "--replicates", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert!(!summary.contains("slope"));
    assert!(summary.lines().nth(1).unwrap().contains("across_variance"));

    let o = mf(&["sweep", "--config", s(&cfg), "--budget-list", "1000", "--replicates", "1", "--out", s(&out)]);
    assert!(!o.status.success());

    let three = dir.path().join("three");
    let args = ["sweep", "--config", s(&cfg), "--budget-list", "1000,2000", "--replicates", "4", "--out", s(&three)];
    assert!(mf(&args).status.success());
    let first = fs::read(three.join("sweep.csv")).unwrap();
    let o = Command::new(BIN).args(args).env("MF_INFER_WORKERS", "3").output().unwrap();
    assert!(o.status.success());
    assert_eq!(first, fs::read(three.join("sweep.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    let keys: Vec<(String, String)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let expected: Vec<(String, String)> = ["1000.0", "2000.0"]
        .iter()
        .flat_map(|b| (0..4).map(move |r| (b.to_string(), r.to_string())))
        .collect();
    assert_eq!(keys, expected);
    assert!(fs::read_to_string(three.join("sweep_summary.csv")).unwrap().contains("# slope mean_mse_hat"));
}

#[test]
fn analyze_coin_log_against_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coin.toml", &COIN_IS.replace("iterations = 1000", "iterations = 100000"));
    let out = dir.path().join("run");
    assert!(mf(&["run", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let log = out.join("samples.jsonl");
    let o = mf(&["analyze", s(&log)]);
    assert!(o.status.success());
    let report = String::from_utf8(o.stdout).unwrap();
    let value = |k: &str| -> f64 {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k},")))
            .unwrap_or_else(|| panic!("{k} missing from {report}"))
            .parse()
            .unwrap()
    };
    let e = CoinModel::default().finite_model([0.5, 0.5]).enumerate().unwrap();
    let j_hi = e.constants.c_bar_hi * e.constants.v_hi;

    // standard error of the plug-in from the per-row summands
    let rows = parse_log(&fs::read_to_string(&log).unwrap()).unwrap();
    let terms: Vec<f64> = rows
        .iter()
        .map(|r| r.cost_hi_total * (r.w * (r.g - e.g_bar_hi)).powi(2))
        .collect();
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let se = (terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((value("j_hi_hat") - j_hi).abs() < 3.0 * se, "{} vs {j_hi} (se {se})", value("j_hi_hat"));
    let z2 = e.evidence * e.evidence;
    assert!((value("j_hat") - j_hi / z2).abs() < 3.0 * se / z2 + 0.01 * j_hi / z2);
    assert!(!report.contains("j_mf_hat"));
}

#[test]
fn analyze_rejects_empty_and_malformed_logs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "# mf-infer 0.1.0 config=0 seed=0\n").unwrap();
    let o = mf(&["analyze", s(&empty)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "# header\n{\"i\":0,\"theta\":[0.25]}\n").unwrap();
    let o = mf(&["analyze", s(&bad)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn adaptive_run_reports_a_clamped_nu_tail() {
    let dir = tempfile::tempdir().unwrap();
    let text = COIN_IS
        .replace("kind = \"is\"", "kind = \"mf-adaptive\"\nn0 = 2000\ndelta = 5.0\nnu_max = 4.0\n[algorithm.tree]\nmin_leaf = 200")
        .replace("iterations = 1000", "iterations = 8000");
    let cfg = write_config(dir.path(), "mf.toml", &text);
    let out = dir.path().join("run");
    let o = mf(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["samples.jsonl", "summary.csv", "nu_trace.csv", "mean_function.txt"] {
        let t = fs::read_to_string(out.join(f)).unwrap();
        assert!(t.starts_with("# mf-infer "), "{f}");
    }
    let trace = parse_trace(&fs::read_to_string(out.join("nu_trace.csv")).unwrap()).unwrap();
    assert_eq!(trace.last().unwrap().i, 7999);
    let rows = parse_log(&fs::read_to_string(out.join("samples.jsonl")).unwrap()).unwrap();
    let a = analyze(&rows, MLaw::Poisson, Some(&trace)).unwrap();
    let tail = a.nu_tail.clone().unwrap();
    assert!(tail.iter().all(|&v| (1e-3..=4.0).contains(&v)));
    let o = mf(&["analyze", s(&out.join("samples.jsonl"))]);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("j_mf_hat") && report.contains("lhs_margin") && report.contains("nu_1,"));

    let tree = mf(&["tree", s(&out.join("mean_function.txt"))]);
    assert!(tree.status.success());
    let rendered = String::from_utf8(tree.stdout).unwrap();
    let body: String = fs::read_to_string(out.join("mean_function.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(rendered, body);
}

#[test]
fn tree_command() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = repo_file("crates/core/tests/data/enzyme_abc_tree.txt");
    let o = mf(&["tree", s(&fixture)]);
    assert!(o.status.success());
    let first = String::from_utf8(o.stdout).unwrap();
    assert_eq!(first.matches("return nu[").count(), 12);
    let again = write_config(dir.path(), "again.txt", &first);
    assert_eq!(String::from_utf8(mf(&["tree", s(&again)]).stdout).unwrap(), first);

    let leaf = write_config(dir.path(), "leaf.txt", "mean_function features=2 nu_min=0.001 nu_max=1000.0\nreturn nu[1] = 0.5\n");
    let o = String::from_utf8(mf(&["tree", s(&leaf)]).stdout).unwrap();
    assert_eq!(o.lines().filter(|l| l.contains("return")).count(), 1);

    let bad = write_config(dir.path(), "bad.txt", "mean_function features=2 nu_min=0.001 nu_max=1000.0\nif x[7] <= 1 {\n");
    let o = mf(&["tree", s(&bad)]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}
