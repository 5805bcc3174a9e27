//! The `mner` binary: exit codes, determinism and file outputs.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use mner::corpus::parse_iob;

fn mner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mner"))
        .args(args)
        .output()
        .unwrap()
}

fn mner_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mner"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const FAST: &[&str] = &[
    "--max-len",
    "12",
    "--units",
    "6",
    "--embedding-dim",
    "6",
    "--epochs",
    "2",
];

fn synth(dir: &Path, n: usize) -> std::path::PathBuf {
    let path = dir.join("synth.iob");
    let out = mner(&[
        "synth",
        "--seed",
        "1",
        "--n",
        &n.to_string(),
        "--out",
        p(&path),
    ]);
    assert!(out.status.success());
    path
}

fn train_model(dir: &Path, corpus: &Path, name: &str) -> std::path::PathBuf {
    let model = dir.join(name);
    let mut args = vec![
        "train",
        "--corpus",
        p(corpus),
        "--out",
        p(&model),
        "--seed",
        "7",
    ];
    args.extend_from_slice(FAST);
    let out = mner(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    model
}

#[test]
fn synth_is_deterministic_and_parses() {
    let a = mner(&["synth", "--seed", "3", "--n", "40"]);
    let b = mner(&["synth", "--seed", "3", "--n", "40"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        parse_iob(&String::from_utf8(a.stdout).unwrap())
            .unwrap()
            .len(),
        40
    );
    assert_eq!(mner(&["synth", "--n", "0"]).status.code(), Some(1));
}

#[test]
fn train_twice_gives_identical_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 40);
    let a = train_model(dir.path(), &corpus, "a.bundle");
    let b = train_model(dir.path(), &corpus, "b.bundle");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for suffix in [".history.jsonl", ".config", ".report"] {
        assert!(
            Path::new(&format!("{}{suffix}", p(&a))).exists(),
            "{suffix}"
        );
    }
    let history = std::fs::read_to_string(format!("{}.history.jsonl", p(&a))).unwrap();
    assert_eq!(history.lines().count(), 2);
    for line in history.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["train_loss"].is_f64());
    }
    let report = std::fs::read_to_string(format!("{}.report", p(&a))).unwrap();
    assert!(report.starts_with("tool_version\tmner "));
    assert!(report.contains("config.seed\t7\n"));
    assert!(report.contains("config_source.seed\tflag\n"));
    assert!(report.contains("test.f1\t"));
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 30);
    let a = train_model(dir.path(), &corpus, "a.bundle");
    let cfg = format!("{}.config", p(&a));
    let b = dir.path().join("b.bundle");
    let out = mner(&[
        "train",
        "--corpus",
        p(&corpus),
        "--out",
        p(&b),
        "--config",
        &cfg,
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn checkpoints_are_written_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 30);
    let model = dir.path().join("m.bundle");
    let mut args = vec![
        "train",
        "--corpus",
        p(&corpus),
        "--out",
        p(&model),
        "--checkpoints",
        "--patience",
        "none",
    ];
    args.extend_from_slice(FAST);
    assert!(mner(&args).status.success());
    for e in 1..=2 {
        let ck = format!("{}.epoch-{e:03}", p(&model));
        mner::model::ModelBundle::load(&ck).unwrap();
    }
}

#[test]
fn preset_values_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 30);
    let model = dir.path().join("m.bundle");
    let out = mner(&[
        "train",
        "--corpus",
        p(&corpus),
        "--out",
        p(&model),
        "--preset",
        "paper-algo",
        "--epochs",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(format!("{}.report", p(&model))).unwrap();
    for line in [
        "preset\tpaper-algo",
        "config.max_len\t90",
        "config.test_fraction\t0.1",
        "config.batch_size\t16",
        "config.lstm_units\t200",
    ] {
        assert!(report.contains(line), "{line}");
    }
    let bundle = mner::model::ModelBundle::load(&model).unwrap();
    assert_eq!(
        (bundle.config.max_len, bundle.config.embedding_dim),
        (90, 90)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 20);
    let missing = dir.path().join("missing.iob");
    let empty = dir.path().join("empty.iob");
    std::fs::write(&empty, "").unwrap();
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "colour = red\n").unwrap();
    let out = p(&dir.path().join("x")).to_string();

    assert_eq!(
        mner(&["train", "--corpus", p(&missing), "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mner(&["stats", "--corpus", p(&empty)]).status.code(),
        Some(2)
    );
    assert_eq!(
        mner(&["crossval", "--corpus", p(&corpus), "-k", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        mner(&[
            "train",
            "--corpus",
            p(&corpus),
            "--out",
            &out,
            "--config",
            p(&bad_cfg)
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        mner(&["train", "--corpus", p(&corpus)]).status.code(),
        Some(1)
    );
    assert_eq!(mner(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mner(&["--help"]).status.code(), Some(0));
    assert_eq!(
        mner(&["eval", "--model", p(&corpus), "--corpus", p(&corpus)])
            .status
            .code(),
        Some(2)
    );
    let err = mner(&["stats", "--corpus", p(&missing)]);
    let last = String::from_utf8(err.stderr).unwrap();
    let record = last.lines().find(|l| l.starts_with('{')).unwrap();
    let v: serde_json::Value = serde_json::from_str(record).unwrap();
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn predict_outputs_valid_iob() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 30);
    let model = train_model(dir.path(), &corpus, "m.bundle");

    let out = mner_stdin(&["predict", "--model", p(&model)], "");
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let out = mner_stdin(
        &["predict", "--model", p(&model)],
        "carbon black was\n\nNiO foam\n",
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3 + 1 + 2 + 1);
    assert_eq!(lines[3], "");
    let parsed = parse_iob(&text).unwrap();
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed.sentences[0].tokens, ["carbon", "black", "was"]);

    let missing = dir.path().join("none.txt");
    assert_eq!(
        mner(&["predict", "--model", p(&model), "--input", p(&missing)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_report_keys_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 30);
    let model = train_model(dir.path(), &corpus, "m.bundle");
    let keys = |mode: &str| -> Vec<String> {
        let out = mner(&[
            "eval",
            "--model",
            p(&model),
            "--corpus",
            p(&corpus),
            "--match",
            mode,
        ]);
        assert!(out.status.success());
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|l| l.split('\t').next().unwrap().to_string())
            .collect()
    };
    let a = keys("strict");
    assert_eq!(a, keys("strict"));
    assert_eq!(a, keys("first-token"));
    for k in [
        "precision",
        "recall",
        "f1",
        "tp",
        "fp",
        "fn",
        "token_accuracy.masked",
        "token_accuracy.unmasked",
    ] {
        assert!(a.iter().any(|x| x == k), "{k}");
    }
}

#[test]
fn crossval_reports_every_fold() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), 25);
    let run = || {
        let mut args = vec!["crossval", "--corpus", p(&corpus), "-k", "5"];
        args.extend_from_slice(FAST);
        let out = mner(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };
    let text = run();
    assert_eq!(text, run());
    for f in 1..=5 {
        assert!(text.contains(&format!("fold.{f}.model.f1\t")));
    }
    assert!(!text.contains("fold.6."));
    assert!(text.contains("model.f1.mean\t"));
    assert!(text.contains("model.f1.std\t"));
}

#[test]
fn stats_on_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.iob");
    assert!(
        mner(&["synth", "--seed", "1", "--n", "100", "--out", p(&corpus)])
            .status
            .success()
    );
    let a = mner(&["stats", "--corpus", p(&corpus)]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("documents\t5\n"));
    assert!(text.contains("sentences\t100\n"));
    assert_eq!(
        text,
        String::from_utf8(mner(&["stats", "--corpus", p(&corpus)]).stdout).unwrap()
    );
}
