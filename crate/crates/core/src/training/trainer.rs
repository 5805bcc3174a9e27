use std::time::Instant;

use serde::Serialize;

use crate::corpus::{Corpus, EncodedBatch, EncodedRow, TagSet, Vocabulary};
use crate::model::{
    batch_loss, infer_sentence, loss_and_gradients, DropoutMasks, ModelBundle, ModelConfig,
    ModelParams,
};
use crate::parallel::map_indexed;
use crate::tensor::{argmax, AdamConfig, AdamState, RngState};

use super::{early_stop_check, EarlyStop, TrainConfig, TrainError};

/// Random streams derived from the training seed. Initialization uses its own
/// stream inside `ModelParams::init`.
const SHUFFLE_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub train_accuracy_masked: f64,
    pub train_accuracy_unmasked: f64,
    pub val_accuracy_masked: Option<f64>,
    pub val_accuracy_unmasked: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// 1-based epoch whose parameters were returned; `None` if no epoch ran.
    pub best_epoch: Option<usize>,
    /// Sentences that contributed a gradient, summed over all steps.
    pub gradient_sentences: usize,
    /// Sentences held out for validation.
    pub validation_sentences: usize,
    pub truncated_sentences: usize,
}

impl TrainHistory {
    pub fn val_losses(&self) -> Vec<f64> {
        self.epochs.iter().filter_map(|e| e.val_loss).collect()
    }

    /// One JSON object per epoch.
    pub fn to_jsonl(&self) -> String {
        self.epochs
            .iter()
            .map(|e| serde_json::to_string(e).expect("epoch record serializes") + "\n")
            .collect()
    }
}

/// Minimum corpus size for a given validation split.
pub fn min_sentences(validation_split: f64) -> usize {
    if validation_split <= 0.0 {
        return 1;
    }
    let mut n = 2;
    loop {
        let (fit, val) = split_sizes(n, validation_split);
        if fit > 0 && val > 0 {
            return n;
        }
        n += 1;
    }
}

/// `(fit, validation)` sizes: the validation share is the trailing
/// `N - floor(N * (1 - split))` sentences.
fn split_sizes(n: usize, validation_split: f64) -> (usize, usize) {
    if validation_split <= 0.0 {
        return (n, 0);
    }
    let fit = (n as f64 * (1.0 - validation_split)).floor() as usize;
    (fit, n - fit)
}

/// State of a run after one epoch, handed to observers.
pub struct EpochView<'a> {
    pub record: &'a EpochRecord,
    pub params: &'a ModelParams,
    pub config: &'a ModelConfig,
    pub vocab: &'a Vocabulary,
}

pub fn train(
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    corpus: &Corpus,
) -> Result<(ModelBundle, TrainHistory), TrainError> {
    train_with_observer(model_config, train_config, corpus, |_| Ok(()))
}

/// Trains a tagger on `corpus`. The trailing `validation_split` share is used
/// only for validation loss, early stopping and selecting the returned epoch.
pub fn train_with_observer(
    model_config: &ModelConfig,
    tc: &TrainConfig,
    corpus: &Corpus,
    mut observer: impl FnMut(EpochView<'_>) -> Result<(), TrainError>,
) -> Result<(ModelBundle, TrainHistory), TrainError> {
    tc.validate()?;
    let required = min_sentences(tc.validation_split);
    if corpus.len() < required {
        return Err(TrainError::TooSmall {
            required,
            found: corpus.len(),
        });
    }
    let (n_fit, n_val) = split_sizes(corpus.len(), tc.validation_split);

    let vocab = Vocabulary::build(corpus)?;
    let tagset = TagSet::standard();
    let cfg = ModelConfig {
        num_words: vocab.len(),
        num_tags: tagset.len(),
        ..model_config.clone()
    };
    cfg.validate()?;
    let mut params = ModelParams::init(&cfg)?;

    let fit = EncodedBatch::encode(&corpus.sentences[..n_fit], &vocab, &tagset, cfg.max_len);
    let val = EncodedBatch::encode(
        &corpus.sentences[n_fit..n_fit + n_val],
        &vocab,
        &tagset,
        cfg.max_len,
    );
    let mut history = TrainHistory {
        validation_sentences: n_val,
        truncated_sentences: fit.truncated_count() + val.truncated_count(),
        ..Default::default()
    };

    let adam_cfg = AdamConfig {
        learning_rate: tc.learning_rate,
        ..AdamConfig::default()
    };
    let mut adam: Vec<AdamState> = params
        .tensors()
        .iter()
        .map(|t| AdamState::for_param(t, adam_cfg))
        .collect();
    let mut shuffle_rng = RngState::derive(tc.seed, SHUFFLE_STREAM);
    let mut dropout_rng = RngState::derive(tc.seed, DROPOUT_STREAM);
    let mut best: Option<(f64, ModelParams)> = None;
    let mut order: Vec<usize> = (0..n_fit).collect();

    for epoch in 1..=tc.max_epochs {
        let started = Instant::now();
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut positions = 0usize;
        for batch in order.chunks(tc.batch_size) {
            let rows: Vec<&EncodedRow> = batch.iter().map(|&i| &fit.rows[i]).collect();
            let masks: Vec<DropoutMasks> = rows
                .iter()
                .map(|_| DropoutMasks::sample(&cfg, &mut dropout_rng))
                .collect();
            let (loss, mut grads) =
                loss_and_gradients(&params, &rows, &masks, tc.mask_padding, tc.execution)?;
            let counted: usize = rows
                .iter()
                .map(|r| {
                    if tc.mask_padding {
                        r.length
                    } else {
                        r.max_len()
                    }
                })
                .sum();
            if !loss.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
            loss_sum += loss * counted as f64;
            positions += counted;
            history.gradient_sentences += rows.len();
            if let Some(c) = tc.clip_norm {
                grads.clip_global_norm(c);
            }
            for ((p, g), st) in params
                .tensors_mut()
                .into_iter()
                .zip(grads.tensors())
                .zip(&mut adam)
            {
                st.step(p, g)?;
            }
        }
        if !params.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }

        let train_stats = evaluate_rows(&params, &fit.rows, tc);
        let val_stats = (n_val > 0).then(|| evaluate_rows(&params, &val.rows, tc));
        let record = EpochRecord {
            epoch,
            train_loss: if positions == 0 {
                0.0
            } else {
                loss_sum / positions as f64
            },
            val_loss: val_stats.map(|s| s.loss),
            train_accuracy_masked: train_stats.acc_masked,
            train_accuracy_unmasked: train_stats.acc_unmasked,
            val_accuracy_masked: val_stats.map(|s| s.acc_masked),
            val_accuracy_unmasked: val_stats.map(|s| s.acc_unmasked),
            seconds: started.elapsed().as_secs_f64(),
        };
        observer(EpochView {
            record: &record,
            params: &params,
            config: &cfg,
            vocab: &vocab,
        })?;

        if let Some(vl) = record.val_loss {
            if best.as_ref().is_none_or(|(b, _)| vl < *b) {
                best = Some((vl, params.clone()));
                history.best_epoch = Some(epoch);
            }
        } else {
            history.best_epoch = Some(epoch);
        }
        history.epochs.push(record);

        if let Some(patience) = tc.patience {
            if n_val > 0 {
                if let EarlyStop::Stop { .. } =
                    early_stop_check(&history.val_losses(), patience, tc.min_delta)
                {
                    history.stopped_early = epoch < tc.max_epochs;
                    break;
                }
            }
        }
    }

    if let Some((_, best_params)) = best {
        params = best_params;
    }
    Ok((
        ModelBundle {
            config: cfg,
            params,
            vocab,
            tagset,
        },
        history,
    ))
}

#[derive(Clone, Copy, Debug)]
struct RowStats {
    loss: f64,
    acc_masked: f64,
    acc_unmasked: f64,
}

/// Inference-mode loss and token accuracy over encoded rows.
fn evaluate_rows(params: &ModelParams, rows: &[EncodedRow], tc: &TrainConfig) -> RowStats {
    let probs: Vec<_> = map_indexed(tc.execution, rows.len(), |i| {
        infer_sentence(params, &rows[i].word_ids)
    })
    .into_iter()
    .map(|p| p.expect("encoded rows hold valid word ids"))
    .collect();
    let targets: Vec<Vec<usize>> = rows.iter().map(|r| r.tag_ids.clone()).collect();
    let lengths: Vec<usize> = rows.iter().map(|r| r.length).collect();
    let loss = batch_loss(&probs, &targets, &lengths, tc.mask_padding);
    let (mut cm, mut tm, mut cu, mut tu) = (0usize, 0usize, 0usize, 0usize);
    for ((p, r), &len) in probs.iter().zip(rows).zip(&lengths) {
        for t in 0..r.max_len() {
            let ok = argmax(p.row(t)) == r.tag_ids[t];
            cu += usize::from(ok);
            tu += 1;
            if t < len {
                cm += usize::from(ok);
                tm += 1;
            }
        }
    }
    let frac = |c: usize, t: usize| if t == 0 { 0.0 } else { c as f64 / t as f64 };
    RowStats {
        loss,
        acc_masked: frac(cm, tm),
        acc_unmasked: frac(cu, tu),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SynthConfig};
    use crate::parallel::Execution;

    fn tiny() -> (ModelConfig, TrainConfig, Corpus) {
        let mc = ModelConfig {
            max_len: 8,
            embedding_dim: 6,
            lstm_units: 5,
            ..ModelConfig::default()
        };
        let tc = TrainConfig {
            max_epochs: 3,
            batch_size: 4,
            execution: Execution::Sequential,
            ..TrainConfig::default()
        };
        (
            mc,
            tc,
            generate_synthetic_corpus(3, &SynthConfig::with_sentences(12)),
        )
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let (mc, mut tc, corpus) = tiny();
        tc.max_epochs = 0;
        let (bundle, history) = train(&mc, &tc, &corpus).unwrap();
        assert!(history.epochs.is_empty());
        assert_eq!(history.best_epoch, None);
        assert_eq!(bundle.params, ModelParams::init(&bundle.config).unwrap());
    }

    #[test]
    fn validation_never_contributes_gradients() {
        let (mc, tc, corpus) = tiny();
        let (_, history) = train(&mc, &tc, &corpus).unwrap();
        let n_fit = (12.0f64 * 0.8).floor() as usize;
        assert_eq!(history.validation_sentences, 12 - n_fit);
        assert_eq!(history.gradient_sentences, n_fit * history.epochs.len());
    }

    #[test]
    fn too_small_corpus_names_minimum() {
        let (mc, tc, corpus) = tiny();
        let err = train(&mc, &tc, &corpus.subset(&[0])).unwrap_err();
        assert_eq!(
            err,
            TrainError::TooSmall {
                required: 2,
                found: 1
            }
        );
    }

    #[test]
    fn best_epoch_has_minimal_validation_loss() {
        let (mc, mut tc, corpus) = tiny();
        tc.patience = None;
        tc.max_epochs = 6;
        let (_, history) = train(&mc, &tc, &corpus).unwrap();
        assert_eq!(
            history.best_epoch,
            super::super::best_epoch(&history.val_losses())
        );
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let (mc, tc, corpus) = tiny();
        let (a, ha) = train(&mc, &tc, &corpus).unwrap();
        let par = TrainConfig {
            execution: Execution::Parallel,
            ..tc
        };
        let (b, hb) = train(&mc, &par, &corpus).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_eq!(ha.val_losses(), hb.val_losses());
    }
}
