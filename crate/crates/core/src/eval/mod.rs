//! Span decoding, entity-level precision/recall/F1, token accuracy, the
//! most-frequent-tag baseline and comparison tables.

mod baseline;
mod metrics;
mod report;
mod spans;

pub use baseline::MostFrequentTag;
pub use metrics::{
    entity_counts, f1_score, token_accuracy, ConfusionCounts, Counts, MatchMode, MetricsReport, Prf,
};
pub use report::{comparison_report, ComparisonRow, ComparisonTable};
pub use spans::{decode_entities, decode_tag_strings, EntitySpan};

use thiserror::Error;

use crate::corpus::{encode_and_pad, Corpus, Sentence, Tag};
use crate::model::{infer_sentence, ModelBundle, ModelError};
use crate::parallel::{map_indexed, Execution};
use crate::tensor::argmax;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but predictions have {predicted}")]
    Length { gold: usize, predicted: usize },
    #[error("misaligned sequences: {0}")]
    Misaligned(String),
    #[error("{0}")]
    Tag(String),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Entity metrics from gold and predicted tag sequences.
pub fn entity_prf(
    model: &str,
    gold: &[Vec<Tag>],
    predicted: &[Vec<Tag>],
    mode: MatchMode,
) -> Result<MetricsReport, EvalError> {
    let g: Vec<_> = gold.iter().map(|t| decode_entities(t)).collect();
    let p: Vec<_> = predicted.iter().map(|t| decode_entities(t)).collect();
    Ok(MetricsReport::from_counts(
        model,
        mode,
        entity_counts(&g, &p, mode)?,
    ))
}

/// Tags every sentence of `corpus` with `bundle` and scores it. Token accuracy
/// is reported over real tokens (masked) and over every padded window position
/// (unmasked); entity metrics never see padding.
pub fn evaluate_model(
    bundle: &ModelBundle,
    corpus: &Corpus,
    name: &str,
    mode: MatchMode,
    exec: Execution,
) -> Result<MetricsReport, EvalError> {
    struct Scored {
        predicted: Vec<Tag>,
        gold_windows: Vec<Vec<usize>>,
        pred_windows: Vec<Vec<usize>>,
        lengths: Vec<usize>,
    }
    let max_len = bundle.config.max_len;
    let scored = map_indexed(exec, corpus.len(), |i| -> Result<Scored, ModelError> {
        let s = &corpus.sentences[i];
        let mut out = Scored {
            predicted: Vec::with_capacity(s.len()),
            gold_windows: Vec::new(),
            pred_windows: Vec::new(),
            lengths: Vec::new(),
        };
        for (tokens, tags) in s.tokens.chunks(max_len).zip(s.tags.chunks(max_len)) {
            let window = Sentence {
                tokens: tokens.to_vec(),
                tags: tags.to_vec(),
                doc_id: None,
            };
            let row = encode_and_pad(&window, &bundle.vocab, &bundle.tagset, max_len);
            let probs = infer_sentence(&bundle.params, &row.word_ids)?;
            let ids: Vec<usize> = (0..max_len).map(|t| argmax(probs.row(t))).collect();
            out.predicted.extend(
                ids[..row.length]
                    .iter()
                    .map(|&id| Tag::from_id(id).unwrap_or(Tag::O)),
            );
            out.gold_windows.push(row.tag_ids);
            out.pred_windows.push(ids);
            out.lengths.push(row.length);
        }
        Ok(out)
    });

    let mut gold_tags = Vec::with_capacity(corpus.len());
    let mut pred_tags = Vec::with_capacity(corpus.len());
    let (mut gw, mut pw, mut lens) = (Vec::new(), Vec::new(), Vec::new());
    for (s, r) in corpus.sentences.iter().zip(scored) {
        let r = r?;
        gold_tags.push(s.tags.clone());
        pred_tags.push(r.predicted);
        gw.extend(r.gold_windows);
        pw.extend(r.pred_windows);
        lens.extend(r.lengths);
    }
    let mut report = entity_prf(name, &gold_tags, &pred_tags, mode)?;
    report.token_accuracy_masked = Some(token_accuracy(&gw, &pw, &lens, true)?);
    report.token_accuracy_unmasked = Some(token_accuracy(&gw, &pw, &lens, false)?);
    Ok(report)
}

/// Scores the most-frequent-tag baseline on `corpus`.
pub fn evaluate_baseline(
    baseline: &MostFrequentTag,
    corpus: &Corpus,
    name: &str,
    mode: MatchMode,
) -> Result<MetricsReport, EvalError> {
    let gold: Vec<Vec<Tag>> = corpus.sentences.iter().map(|s| s.tags.clone()).collect();
    let pred: Vec<Vec<Tag>> = corpus
        .sentences
        .iter()
        .map(|s| baseline.predict(&s.tokens))
        .collect();
    let mut report = entity_prf(name, &gold, &pred, mode)?;
    let ids = |v: &[Vec<Tag>]| -> Vec<Vec<usize>> {
        v.iter()
            .map(|t| t.iter().map(|x| x.id()).collect())
            .collect()
    };
    let lens: Vec<usize> = gold.iter().map(Vec::len).collect();
    report.token_accuracy_masked = Some(token_accuracy(&ids(&gold), &ids(&pred), &lens, true)?);
    Ok(report)
}
