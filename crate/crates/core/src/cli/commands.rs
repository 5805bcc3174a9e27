use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::corpus::{
    dataset_stats, generate_synthetic_corpus, parse_iob, serialize_iob, split, Corpus, SynthConfig,
};
use crate::eval::{comparison_report, evaluate_baseline, evaluate_model, MostFrequentTag};
use crate::model::ModelBundle;
use crate::training::{cross_validate, train_with_observer, TrainError};

use super::{log, CliError, Command, RunConfig, VERSION};

pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train {
            corpus,
            out,
            report,
            checkpoints,
            config,
        } => {
            let rc = config.resolve()?;
            let report = report.unwrap_or_else(|| with_suffix(&out, ".report"));
            cmd_train(&rc, &corpus, &out, &report, checkpoints)
        }
        Command::Eval {
            model,
            corpus,
            out,
            config,
        } => {
            let rc = config.resolve()?;
            let text = cmd_eval(&rc, &model, &corpus)?;
            emit(&text, out.as_deref(), stdout)
        }
        Command::Predict { model, input, out } => {
            let bundle = ModelBundle::load(&model)?;
            let text = match &input {
                Some(p) => read_text(p)?,
                None => {
                    let mut s = String::new();
                    std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
                        .map_err(|e| CliError::Data(format!("cannot read standard input: {e}")))?;
                    s
                }
            };
            emit(&predict_text(&bundle, &text)?, out.as_deref(), stdout)
        }
        Command::Crossval {
            corpus,
            out,
            config,
        } => {
            let rc = config.resolve()?;
            let text = cmd_crossval(&rc, &corpus)?;
            emit(&text, out.as_deref(), stdout)
        }
        Command::Stats { corpus, out } => {
            let c = read_corpus(&corpus)?;
            let mut text = header("stats");
            writeln!(text, "input.corpus\t{}", corpus.display()).unwrap();
            text.push_str(&dataset_stats(&c).to_tsv());
            emit(&text, out.as_deref(), stdout)
        }
        Command::Synth {
            seed,
            n,
            out,
            ambiguous_fraction,
            distractor_rate,
            sentences_per_document,
        } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            if !(0.0..=1.0).contains(&ambiguous_fraction) || !(0.0..=1.0).contains(&distractor_rate)
            {
                return Err(CliError::Usage("fractions must lie in [0, 1]".into()));
            }
            if sentences_per_document == 0 {
                return Err(CliError::Usage(
                    "--sentences-per-document must be at least 1".into(),
                ));
            }
            let cfg = SynthConfig {
                n_sentences: n,
                sentences_per_document,
                ambiguous_fraction,
                distractor_rate,
            };
            emit(
                &serialize_iob(&generate_synthetic_corpus(seed, &cfg)),
                out.as_deref(),
                stdout,
            )
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn read_corpus(path: &Path) -> Result<Corpus, CliError> {
    parse_iob(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("cannot write output: {e}"))),
    }
}

fn header(command: &str) -> String {
    format!("tool_version\t{VERSION}\ncommand\t{command}\n")
}

fn report_header(command: &str, rc: &RunConfig) -> String {
    header(command) + &rc.provenance()
}

fn prefixed(prefix: &str, kv: &str) -> String {
    kv.lines().map(|l| format!("{prefix}.{l}\n")).collect()
}

fn cmd_train(
    rc: &RunConfig,
    corpus_path: &Path,
    out: &Path,
    report_path: &Path,
    checkpoints: bool,
) -> Result<(), CliError> {
    let mc = rc.model_config()?;
    let tc = rc.train_config()?;
    let mode = rc.match_mode()?;
    let corpus = read_corpus(corpus_path)?;
    let (train_set, test_set) = split(&corpus, tc.test_fraction, tc.seed)?;
    log(
        "train_start",
        json!({ "sentences": corpus.len(), "train": train_set.len(), "test": test_set.len(), "seed": tc.seed }),
    );
    let (bundle, history) = train_with_observer(&mc, &tc, &train_set, |view| {
        let r = view.record;
        log(
            "epoch",
            json!({
                "epoch": r.epoch, "train_loss": r.train_loss, "val_loss": r.val_loss,
                "train_accuracy_masked": r.train_accuracy_masked, "seconds": r.seconds,
            }),
        );
        if checkpoints {
            let snapshot = ModelBundle {
                config: view.config.clone(),
                params: view.params.clone(),
                vocab: view.vocab.clone(),
                tagset: crate::corpus::TagSet::standard(),
            };
            let path = with_suffix(out, &format!(".epoch-{:03}", r.epoch));
            std::fs::write(&path, snapshot.to_bytes())
                .map_err(|e| TrainError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    })?;
    if history.truncated_sentences > 0 {
        log(
            "warning",
            json!({ "message": "sentences truncated to max_len", "count": history.truncated_sentences }),
        );
    }
    write_file(out, &bundle.to_bytes())?;
    write_file(
        &with_suffix(out, ".history.jsonl"),
        history.to_jsonl().as_bytes(),
    )?;
    write_file(&with_suffix(out, ".config"), rc.to_config_file().as_bytes())?;

    let mut text = report_header("train", rc);
    writeln!(text, "input.corpus\t{}", corpus_path.display()).unwrap();
    writeln!(
        text,
        "sentences.train\t{}",
        train_set.len() - history.validation_sentences
    )
    .unwrap();
    writeln!(
        text,
        "sentences.validation\t{}",
        history.validation_sentences
    )
    .unwrap();
    writeln!(text, "sentences.test\t{}", test_set.len()).unwrap();
    writeln!(text, "sentences.truncated\t{}", history.truncated_sentences).unwrap();
    writeln!(text, "epochs_run\t{}", history.epochs.len()).unwrap();
    writeln!(text, "stopped_early\t{}", history.stopped_early).unwrap();
    match history.best_epoch {
        Some(b) => writeln!(text, "best_epoch\t{b}").unwrap(),
        None => writeln!(text, "best_epoch\tnone").unwrap(),
    }
    writeln!(text, "parameters\t{}", bundle.params.param_count()).unwrap();
    if !test_set.is_empty() {
        let model = evaluate_model(&bundle, &test_set, "bilstm", mode, tc.execution)?;
        let baseline = evaluate_baseline(
            &MostFrequentTag::train(&train_set)?,
            &test_set,
            "most-frequent-tag",
            mode,
        )?;
        text.push_str(&prefixed("test", &model.to_kv()));
        text.push_str(&prefixed("baseline", &baseline.to_kv()));
        text.push('\n');
        text.push_str(&comparison_report(&[model, baseline])?.render_text());
    }
    write_file(report_path, text.as_bytes())?;
    log(
        "train_done",
        json!({ "out": out.display().to_string(), "epochs": history.epochs.len() }),
    );
    Ok(())
}

fn cmd_eval(rc: &RunConfig, model_path: &Path, corpus_path: &Path) -> Result<String, CliError> {
    let mode = rc.match_mode()?;
    let tc = rc.train_config()?;
    let bundle = ModelBundle::load(model_path)?;
    let corpus = read_corpus(corpus_path)?;
    let report = evaluate_model(&bundle, &corpus, "bilstm", mode, tc.execution)?;
    let mut text = header("eval");
    writeln!(text, "input.model\t{}", model_path.display()).unwrap();
    writeln!(text, "input.corpus\t{}", corpus_path.display()).unwrap();
    let c = &bundle.config;
    writeln!(text, "model_config.max_len\t{}", c.max_len).unwrap();
    writeln!(text, "model_config.embedding_dim\t{}", c.embedding_dim).unwrap();
    writeln!(text, "model_config.lstm_units\t{}", c.lstm_units).unwrap();
    writeln!(text, "model_config.num_words\t{}", c.num_words).unwrap();
    writeln!(text, "config.match_mode\t{}", rc.get("match_mode")).unwrap();
    text.push_str(&report.to_kv());
    Ok(text)
}

fn cmd_crossval(rc: &RunConfig, corpus_path: &Path) -> Result<String, CliError> {
    let mc = rc.model_config()?;
    let tc = rc.train_config()?;
    let corpus = read_corpus(corpus_path)?;
    log(
        "crossval_start",
        json!({ "sentences": corpus.len(), "k": tc.folds }),
    );
    let report = cross_validate(&mc, &tc, &corpus, tc.folds, rc.match_mode()?, rc.jobs()?)?;
    let mut text = report_header("crossval", rc);
    writeln!(text, "input.corpus\t{}", corpus_path.display()).unwrap();
    text.push_str(&report.to_kv());
    text.push('\n');
    text.push_str(&report.render_text());
    Ok(text)
}

/// Tags each non-empty line and renders the result as IOB.
pub fn predict_text(bundle: &ModelBundle, text: &str) -> Result<String, CliError> {
    let mut out = String::new();
    for line in text.lines() {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            continue;
        }
        for (tok, tag) in bundle.predict(&tokens)? {
            writeln!(out, "{tok}\t{}", tag.as_str()).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
