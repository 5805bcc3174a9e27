//! Full tagger: embedding, spatial dropout, Bi-LSTM, time-distributed softmax.

use crate::corpus::EncodedRow;
use crate::parallel::{map_indexed, Execution};
use crate::tensor::{axpy, mat_vec_acc, one_hot_index, outer_acc, Matrix, RngState, PROB_FLOOR};

use super::layers::{
    apply_channel_mask, bilstm_forward_masked, dense_softmax, embed, lstm_direction_backward,
    sample_keep_mask, BiLstmCache, Mode,
};
use super::params::GATES;
use super::{LstmParams, ModelConfig, ModelError, ModelParams};

/// Dropout masks for one sentence. `None` means no dropout on that path.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DropoutMasks {
    pub spatial: Option<Vec<f64>>,
    pub recurrent_forward: Option<Vec<f64>>,
    pub recurrent_backward: Option<Vec<f64>>,
}

impl DropoutMasks {
    pub fn none() -> Self {
        Self::default()
    }

    /// Draws spatial, forward-recurrent and backward-recurrent masks, in that order.
    pub fn sample(cfg: &ModelConfig, rng: &mut RngState) -> Self {
        let draw = |rng: &mut RngState, len, p| (p > 0.0).then(|| sample_keep_mask(rng, len, p));
        let spatial = draw(rng, cfg.embedding_dim, cfg.spatial_dropout);
        let recurrent_forward = draw(rng, GATES * cfg.lstm_units, cfg.recurrent_dropout);
        let recurrent_backward = draw(rng, GATES * cfg.lstm_units, cfg.recurrent_dropout);
        DropoutMasks {
            spatial,
            recurrent_forward,
            recurrent_backward,
        }
    }
}

/// Everything the backward pass needs for one sentence.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub word_ids: Vec<usize>,
    pub masks: DropoutMasks,
    /// Embedded inputs after spatial dropout, `T x d`.
    pub embedded: Matrix,
    pub bilstm: BiLstmCache,
    /// `T x 2u`.
    pub hidden: Matrix,
    /// `T x num_tags`.
    pub probs: Matrix,
}

/// Forward pass for one sentence with explicit masks.
pub fn forward_sentence(
    params: &ModelParams,
    word_ids: &[usize],
    masks: DropoutMasks,
) -> Result<ForwardCache, ModelError> {
    let mut embedded = embed(&params.embedding, word_ids)?;
    if let Some(m) = &masks.spatial {
        apply_channel_mask(&mut embedded, m);
    }
    let (hidden, bilstm) = bilstm_forward_masked(
        &params.forward,
        &params.backward,
        &embedded,
        masks.recurrent_forward.clone(),
        masks.recurrent_backward.clone(),
    )?;
    let probs = dense_softmax(&params.dense_w, &params.dense_b, &hidden)?;
    Ok(ForwardCache {
        word_ids: word_ids.to_vec(),
        masks,
        embedded,
        bilstm,
        hidden,
        probs,
    })
}

/// Per-token distributions in inference mode (no dropout, no cache kept).
pub fn infer_sentence(params: &ModelParams, word_ids: &[usize]) -> Result<Matrix, ModelError> {
    Ok(forward_sentence(params, word_ids, DropoutMasks::none())?.probs)
}

/// Output of a batch forward pass. `caches` is present only in train mode.
pub struct BatchForward {
    pub probs: Vec<Matrix>,
    pub caches: Option<Vec<ForwardCache>>,
}

/// Batch forward. In train mode masks are drawn from `rng` sentence by sentence
/// before any parallel work, so results do not depend on the execution mode.
pub fn forward(
    params: &ModelParams,
    cfg: &ModelConfig,
    rows: &[EncodedRow],
    mode: Mode,
    rng: &mut RngState,
    exec: Execution,
) -> Result<BatchForward, ModelError> {
    match mode {
        Mode::Infer => {
            let probs = map_indexed(exec, rows.len(), |i| {
                infer_sentence(params, &rows[i].word_ids)
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            Ok(BatchForward {
                probs,
                caches: None,
            })
        }
        Mode::Train => {
            let masks: Vec<DropoutMasks> = rows
                .iter()
                .map(|_| DropoutMasks::sample(cfg, rng))
                .collect();
            let caches = map_indexed(exec, rows.len(), |i| {
                forward_sentence(params, &rows[i].word_ids, masks[i].clone())
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            Ok(BatchForward {
                probs: caches.iter().map(|c| c.probs.clone()).collect(),
                caches: Some(caches),
            })
        }
    }
}

/// Number of positions of a sentence that enter the loss.
fn counted_positions(len: usize, max_len: usize, mask_padding: bool) -> usize {
    if mask_padding {
        len
    } else {
        max_len
    }
}

/// Mean clamped cross-entropy over all counted positions of the batch.
pub fn batch_loss(
    probs: &[Matrix],
    targets: &[Vec<usize>],
    lengths: &[usize],
    mask_padding: bool,
) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for ((p, tags), &len) in probs.iter().zip(targets).zip(lengths) {
        let n = counted_positions(len, p.rows(), mask_padding);
        for (t, &tag) in tags.iter().enumerate().take(n) {
            total += -p.get(t, tag).clamp(PROB_FLOOR, 1.0).ln();
        }
        count += n;
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Gradients of one sentence. Embedding gradients are kept as `(word id, row)`
/// pairs in position order so the batch reduction can stay sparse.
pub struct SentenceGrads {
    pub embedding_rows: Vec<(usize, Vec<f64>)>,
    pub forward: LstmParams,
    pub backward: LstmParams,
    pub dense_w: Matrix,
    pub dense_b: Matrix,
}

/// Backward pass for one sentence. `dlogits` already includes the loss scaling.
fn backward_sentence(
    params: &ModelParams,
    cache: &ForwardCache,
    dlogits: &Matrix,
) -> SentenceGrads {
    let (d, u) = (params.forward.input_dim(), params.forward.units());
    let len = cache.word_ids.len();

    let mut dense_w = Matrix::zeros(params.dense_w.rows(), params.dense_w.cols());
    let mut dense_b = Matrix::zeros(1, params.dense_b.cols());
    let mut dhidden = Matrix::zeros(len, 2 * u);
    for t in 0..len {
        let dl = dlogits.row(t);
        outer_acc(cache.hidden.row(t), dl, &mut dense_w);
        axpy(1.0, dl, dense_b.as_mut_slice());
        mat_vec_acc(&params.dense_w, dl, dhidden.row_mut(t));
    }

    let mut dh_fwd = Matrix::zeros(len, u);
    let mut dh_bwd = Matrix::zeros(len, u);
    for t in 0..len {
        let row = dhidden.row(t);
        dh_fwd.row_mut(t).copy_from_slice(&row[..u]);
        dh_bwd.row_mut(t).copy_from_slice(&row[u..]);
    }

    let mut g_fwd = LstmParams::zeros(d, u);
    let mut g_bwd = LstmParams::zeros(d, u);
    let mut dx = Matrix::zeros(len, d);
    lstm_direction_backward(
        &params.forward,
        &cache.embedded,
        &cache.bilstm.forward,
        &dh_fwd,
        &mut g_fwd,
        &mut dx,
    );
    lstm_direction_backward(
        &params.backward,
        &cache.embedded,
        &cache.bilstm.backward,
        &dh_bwd,
        &mut g_bwd,
        &mut dx,
    );

    if let Some(mask) = &cache.masks.spatial {
        apply_channel_mask(&mut dx, mask);
    }
    let embedding_rows = cache
        .word_ids
        .iter()
        .enumerate()
        .map(|(t, &id)| (id, dx.row(t).to_vec()))
        .collect();

    SentenceGrads {
        embedding_rows,
        forward: g_fwd,
        backward: g_bwd,
        dense_w,
        dense_b,
    }
}

/// `(probs - onehot) * scale` on counted positions, zero elsewhere.
fn output_gradient(probs: &Matrix, tags: &[usize], counted: usize, scale: f64) -> Matrix {
    let mut g = Matrix::zeros(probs.rows(), probs.cols());
    for t in 0..counted {
        let row = g.row_mut(t);
        row.copy_from_slice(probs.row(t));
        row[tags[t]] -= 1.0;
        row.iter_mut().for_each(|v| *v *= scale);
    }
    g
}

fn reduce(params: &ModelParams, per_sentence: Vec<SentenceGrads>) -> ModelParams {
    let mut grads = ModelParams {
        embedding: Matrix::zeros(params.embedding.rows(), params.embedding.cols()),
        forward: LstmParams::zeros(params.forward.input_dim(), params.forward.units()),
        backward: LstmParams::zeros(params.backward.input_dim(), params.backward.units()),
        dense_w: Matrix::zeros(params.dense_w.rows(), params.dense_w.cols()),
        dense_b: Matrix::zeros(1, params.dense_b.cols()),
    };
    // Fixed summation order: sentence index, then position.
    for sg in per_sentence {
        for (id, row) in &sg.embedding_rows {
            axpy(1.0, row, grads.embedding.row_mut(*id));
        }
        let add = |dst: &mut LstmParams, src: &LstmParams| {
            axpy(1.0, src.w.as_slice(), dst.w.as_mut_slice());
            axpy(1.0, src.u.as_slice(), dst.u.as_mut_slice());
            axpy(1.0, src.b.as_slice(), dst.b.as_mut_slice());
        };
        add(&mut grads.forward, &sg.forward);
        add(&mut grads.backward, &sg.backward);
        axpy(1.0, sg.dense_w.as_slice(), grads.dense_w.as_mut_slice());
        axpy(1.0, sg.dense_b.as_slice(), grads.dense_b.as_mut_slice());
    }
    grads
}

/// Exact gradients of [`batch_loss`] given train-mode caches and one-hot targets
/// (`T x num_tags` per sentence). Masks stored in the caches are reused.
pub fn backward(
    params: &ModelParams,
    caches: &[ForwardCache],
    targets: &[Matrix],
    lengths: &[usize],
    mask_padding: bool,
    exec: Execution,
) -> Result<ModelParams, ModelError> {
    if caches.len() != targets.len() || caches.len() != lengths.len() {
        return Err(ModelError::Shape(format!(
            "{} caches, {} targets, {} lengths",
            caches.len(),
            targets.len(),
            lengths.len()
        )));
    }
    let mut tag_ids = Vec::with_capacity(targets.len());
    for (i, (cache, target)) in caches.iter().zip(targets).enumerate() {
        if target.shape() != cache.probs.shape() {
            return Err(ModelError::Shape(format!(
                "sentence {i}: target {}x{} vs output {}x{}",
                target.rows(),
                target.cols(),
                cache.probs.rows(),
                cache.probs.cols()
            )));
        }
        let ids = (0..target.rows())
            .map(|t| {
                one_hot_index(target.row(t)).ok_or(ModelError::Target {
                    sentence: i,
                    position: t,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        tag_ids.push(ids);
    }
    let total: usize = caches
        .iter()
        .zip(lengths)
        .map(|(c, &l)| counted_positions(l, c.word_ids.len(), mask_padding))
        .sum();
    let scale = if total == 0 { 0.0 } else { 1.0 / total as f64 };
    let per_sentence = map_indexed(exec, caches.len(), |i| {
        let c = &caches[i];
        let n = counted_positions(lengths[i], c.word_ids.len(), mask_padding);
        backward_sentence(params, c, &output_gradient(&c.probs, &tag_ids[i], n, scale))
    });
    Ok(reduce(params, per_sentence))
}

/// Loss and gradients for a batch of encoded rows with pre-drawn masks. Forward
/// caches live only inside each sentence's task.
pub fn loss_and_gradients(
    params: &ModelParams,
    rows: &[&EncodedRow],
    masks: &[DropoutMasks],
    mask_padding: bool,
    exec: Execution,
) -> Result<(f64, ModelParams), ModelError> {
    if rows.len() != masks.len() {
        return Err(ModelError::Shape(format!(
            "{} rows but {} masks",
            rows.len(),
            masks.len()
        )));
    }
    let total: usize = rows
        .iter()
        .map(|r| counted_positions(r.length, r.max_len(), mask_padding))
        .sum();
    let scale = if total == 0 { 0.0 } else { 1.0 / total as f64 };
    let results = map_indexed(
        exec,
        rows.len(),
        |i| -> Result<(f64, SentenceGrads), ModelError> {
            let row = rows[i];
            let cache = forward_sentence(params, &row.word_ids, masks[i].clone())?;
            let n = counted_positions(row.length, row.max_len(), mask_padding);
            let loss: f64 = (0..n)
                .map(|t| {
                    -cache
                        .probs
                        .get(t, row.tag_ids[t])
                        .clamp(PROB_FLOOR, 1.0)
                        .ln()
                })
                .sum();
            let g = backward_sentence(
                params,
                &cache,
                &output_gradient(&cache.probs, &row.tag_ids, n, scale),
            );
            Ok((loss, g))
        },
    );
    let mut loss = 0.0;
    let mut per_sentence = Vec::with_capacity(results.len());
    for r in results {
        let (l, g) = r?;
        loss += l;
        per_sentence.push(g);
    }
    Ok((loss * scale, reduce(params, per_sentence)))
}

/// Scalar batch loss for fixed masks; used by gradient checks.
pub fn loss_with_masks(
    params: &ModelParams,
    rows: &[&EncodedRow],
    masks: &[DropoutMasks],
    mask_padding: bool,
) -> Result<f64, ModelError> {
    let mut probs = Vec::with_capacity(rows.len());
    for (row, m) in rows.iter().zip(masks) {
        probs.push(forward_sentence(params, &row.word_ids, m.clone())?.probs);
    }
    let targets: Vec<Vec<usize>> = rows.iter().map(|r| r.tag_ids.clone()).collect();
    let lengths: Vec<usize> = rows.iter().map(|r| r.length).collect();
    Ok(batch_loss(&probs, &targets, &lengths, mask_padding))
}
