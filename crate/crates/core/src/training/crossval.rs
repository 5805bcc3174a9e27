use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{kfold, Corpus};
use crate::eval::{
    comparison_report, evaluate_baseline, evaluate_model, ComparisonTable, MatchMode,
    MetricsReport, MostFrequentTag,
};
use crate::model::ModelConfig;
use crate::parallel::{map_indexed, with_pool, Execution};

use super::{train, TrainConfig, TrainError, TrainHistory};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldResult {
    /// 1-based.
    pub fold: usize,
    pub train_sentences: usize,
    pub validation_sentences: usize,
    pub model: MetricsReport,
    pub baseline: MetricsReport,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation.
    pub fn of(values: &[f64]) -> MeanStd {
        if values.is_empty() {
            return MeanStd::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Aggregate {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
}

impl Aggregate {
    fn of(reports: &[&MetricsReport]) -> Aggregate {
        let col = |f: fn(&MetricsReport) -> f64| {
            MeanStd::of(&reports.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        Aggregate {
            precision: col(|r| r.overall.precision),
            recall: col(|r| r.overall.recall),
            f1: col(|r| r.overall.f1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValReport {
    pub k: usize,
    pub match_mode: MatchMode,
    pub folds: Vec<FoldResult>,
    pub model: Aggregate,
    pub baseline: Aggregate,
}

impl CrossValReport {
    /// `key<TAB>value` lines: one group per fold, then the aggregates.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "k\t{}", self.k).unwrap();
        writeln!(out, "match_mode\t{}", self.match_mode.as_str()).unwrap();
        for f in &self.folds {
            let p = format!("fold.{}", f.fold);
            writeln!(out, "{p}.train_sentences\t{}", f.train_sentences).unwrap();
            writeln!(out, "{p}.validation_sentences\t{}", f.validation_sentences).unwrap();
            writeln!(out, "{p}.epochs_run\t{}", f.epochs_run).unwrap();
            for (name, r) in [("model", &f.model), ("baseline", &f.baseline)] {
                writeln!(out, "{p}.{name}.precision\t{}", r.overall.precision).unwrap();
                writeln!(out, "{p}.{name}.recall\t{}", r.overall.recall).unwrap();
                writeln!(out, "{p}.{name}.f1\t{}", r.overall.f1).unwrap();
            }
        }
        for (name, a) in [("model", &self.model), ("baseline", &self.baseline)] {
            for (metric, ms) in [
                ("precision", a.precision),
                ("recall", a.recall),
                ("f1", a.f1),
            ] {
                writeln!(out, "{name}.{metric}.mean\t{}", ms.mean).unwrap();
                writeln!(out, "{name}.{metric}.std\t{}", ms.std).unwrap();
            }
        }
        out
    }

    /// Fold rows plus a mean row and a std row, formatted like the comparison table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<12} {:>9} {:>9} {:>9} {:>9}",
            "fold", "precision", "recall", "f1", "base_f1"
        )
        .unwrap();
        for f in &self.folds {
            writeln!(
                out,
                "{:<12} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                f.fold,
                f.model.overall.precision,
                f.model.overall.recall,
                f.model.overall.f1,
                f.baseline.overall.f1
            )
            .unwrap();
        }
        let m = &self.model;
        writeln!(
            out,
            "{:<12} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            "mean", m.precision.mean, m.recall.mean, m.f1.mean, self.baseline.f1.mean
        )
        .unwrap();
        writeln!(
            out,
            "{:<12} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            "std", m.precision.std, m.recall.std, m.f1.std, self.baseline.f1.std
        )
        .unwrap();
        out
    }

    /// Mean scores of the network and the baseline as a comparison table.
    pub fn comparison(&self) -> ComparisonTable {
        let mean = |name: &str, a: &Aggregate, base: &MetricsReport| {
            let mut r = base.clone();
            r.model = name.into();
            r.overall.precision = a.precision.mean;
            r.overall.recall = a.recall.mean;
            r.overall.f1 = a.f1.mean;
            r
        };
        let first = &self.folds[0];
        comparison_report(&[
            mean("bilstm", &self.model, &first.model),
            mean("most-frequent-tag", &self.baseline, &first.baseline),
        ])
        .expect("two reports")
    }
}

/// Trains one model per fold of `kfold(corpus, k, seed)` and scores it on the
/// held-out fold, alongside the most-frequent-tag baseline. Folds run on a pool
/// of `jobs` workers; results do not depend on `jobs`.
pub fn cross_validate(
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    corpus: &Corpus,
    k: usize,
    mode: MatchMode,
    jobs: usize,
) -> Result<CrossValReport, TrainError> {
    let folds = kfold(corpus, k, train_config.seed)?;
    let fold_exec = if jobs > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let results = with_pool(jobs, || {
        map_indexed(
            fold_exec,
            folds.len(),
            |i| -> Result<(FoldResult, TrainHistory), TrainError> {
                let fold = &folds[i];
                let (bundle, history) = train(model_config, train_config, &fold.train)?;
                let model = evaluate_model(
                    &bundle,
                    &fold.validation,
                    "bilstm",
                    mode,
                    train_config.execution,
                )?;
                let baseline_tagger = MostFrequentTag::train(&fold.train)?;
                let baseline = evaluate_baseline(
                    &baseline_tagger,
                    &fold.validation,
                    "most-frequent-tag",
                    mode,
                )?;
                Ok((
                    FoldResult {
                        fold: i + 1,
                        train_sentences: fold.train.len(),
                        validation_sentences: fold.validation.len(),
                        model,
                        baseline,
                        epochs_run: history.epochs.len(),
                        best_epoch: history.best_epoch,
                    },
                    history,
                ))
            },
        )
    });
    let folds: Vec<FoldResult> = results
        .into_iter()
        .map(|r| r.map(|(f, _)| f))
        .collect::<Result<_, _>>()?;
    let model = Aggregate::of(&folds.iter().map(|f| &f.model).collect::<Vec<_>>());
    let baseline = Aggregate::of(&folds.iter().map(|f| &f.baseline).collect::<Vec<_>>());
    Ok(CrossValReport {
        k,
        match_mode: mode,
        folds,
        model,
        baseline,
    })
}
