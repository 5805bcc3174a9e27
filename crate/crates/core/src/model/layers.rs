//! Individual layers with their hand-derived backward passes.

use crate::tensor::{
    axpy, dot, mat_vec_acc, outer_acc, sigmoid_scalar, softmax_in_place, vec_mat_acc, Matrix,
    RngState,
};

use super::params::{GATES, GATE_CANDIDATE, GATE_FORGET, GATE_INPUT, GATE_OUTPUT};
use super::{LstmParams, ModelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Looks up one embedding row per id.
pub fn embed(embedding: &Matrix, ids: &[usize]) -> Result<Matrix, ModelError> {
    let d = embedding.cols();
    let mut out = Matrix::zeros(ids.len(), d);
    for (t, &id) in ids.iter().enumerate() {
        if id >= embedding.rows() {
            return Err(ModelError::WordId {
                id,
                num_words: embedding.rows(),
            });
        }
        out.row_mut(t).copy_from_slice(embedding.row(id));
    }
    Ok(out)
}

/// Inverted-dropout keep mask: each entry is `0` with probability `p`, else `1/(1-p)`.
pub fn sample_keep_mask(rng: &mut RngState, len: usize, p: f64) -> Vec<f64> {
    let scale = 1.0 / (1.0 - p);
    (0..len)
        .map(|_| if rng.bernoulli(p) { 0.0 } else { scale })
        .collect()
}

/// Multiplies every timestep by the same per-channel mask.
pub fn apply_channel_mask(x: &mut Matrix, mask: &[f64]) {
    debug_assert_eq!(mask.len(), x.cols());
    for t in 0..x.rows() {
        for (v, m) in x.row_mut(t).iter_mut().zip(mask) {
            *v *= m;
        }
    }
}

/// Drops whole embedding channels across all timesteps in train mode; identity
/// in infer mode or when `p == 0`. Returns the mask that was applied.
pub fn spatial_dropout(
    embedded: &Matrix,
    p: f64,
    rng: &mut RngState,
    mode: Mode,
) -> (Matrix, Option<Vec<f64>>) {
    let mut out = embedded.clone();
    if mode == Mode::Infer || p == 0.0 {
        return (out, None);
    }
    let mask = sample_keep_mask(rng, embedded.cols(), p);
    apply_channel_mask(&mut out, &mask);
    (out, Some(mask))
}

/// Activations kept from one LSTM step for the backward pass.
#[derive(Clone, Debug)]
pub struct StepCache {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`, each `units` long.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One LSTM step.
///
/// `recurrent_mask`, when present, has `4*units` entries: a separate keep-mask
/// per gate applied to `h_prev` before it meets that gate's recurrent weights.
pub fn lstm_cell_step(
    p: &LstmParams,
    x_t: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    recurrent_mask: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>, StepCache), ModelError> {
    let u = p.units();
    if x_t.len() != p.input_dim() || h_prev.len() != u || c_prev.len() != u {
        return Err(ModelError::Shape(format!(
            "lstm step expects x:{} h:{u} c:{u}, got x:{} h:{} c:{}",
            p.input_dim(),
            x_t.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    if recurrent_mask.is_some_and(|m| m.len() != GATES * u) {
        return Err(ModelError::Shape(
            "recurrent mask must have 4*units entries".into(),
        ));
    }

    let mut z = p.b.as_slice().to_vec();
    vec_mat_acc(x_t, &p.w, &mut z);
    match recurrent_mask {
        None => vec_mat_acc(h_prev, &p.u, &mut z),
        Some(mask) => {
            for (j, &h) in h_prev.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                let urow = p.u.row(j);
                for k in 0..GATES {
                    let a = h * mask[k * u + j];
                    if a != 0.0 {
                        axpy(a, &urow[k * u..(k + 1) * u], &mut z[k * u..(k + 1) * u]);
                    }
                }
            }
        }
    }

    let mut gates = z;
    for k in 0..GATES {
        let block = &mut gates[k * u..(k + 1) * u];
        if k == GATE_CANDIDATE {
            block.iter_mut().for_each(|v| *v = v.tanh());
        } else {
            block.iter_mut().for_each(|v| *v = sigmoid_scalar(*v));
        }
    }

    let mut c = vec![0.0; u];
    let mut tanh_c = vec![0.0; u];
    let mut h = vec![0.0; u];
    for j in 0..u {
        let i = gates[GATE_INPUT * u + j];
        let f = gates[GATE_FORGET * u + j];
        let g = gates[GATE_CANDIDATE * u + j];
        let o = gates[GATE_OUTPUT * u + j];
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
    let cache = StepCache {
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates,
        c: c.clone(),
        tanh_c,
    };
    Ok((h, c, cache))
}

/// Backward through one LSTM step. Accumulates weight gradients into `grads`
/// and the input gradient into `dx`; returns `(dh_prev, dc_prev)`.
#[allow(clippy::too_many_arguments)]
pub fn lstm_cell_backward(
    p: &LstmParams,
    x_t: &[f64],
    cache: &StepCache,
    recurrent_mask: Option<&[f64]>,
    dh: &[f64],
    dc_next: &[f64],
    grads: &mut LstmParams,
    dx: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let u = p.units();
    let g = &cache.gates;
    let mut dz = vec![0.0; GATES * u];
    let mut dc_prev = vec![0.0; u];
    for j in 0..u {
        let i = g[GATE_INPUT * u + j];
        let f = g[GATE_FORGET * u + j];
        let cand = g[GATE_CANDIDATE * u + j];
        let o = g[GATE_OUTPUT * u + j];
        let tc = cache.tanh_c[j];
        let dc = dc_next[j] + dh[j] * o * (1.0 - tc * tc);
        dz[GATE_INPUT * u + j] = dc * cand * i * (1.0 - i);
        dz[GATE_FORGET * u + j] = dc * cache.c_prev[j] * f * (1.0 - f);
        dz[GATE_CANDIDATE * u + j] = dc * i * (1.0 - cand * cand);
        dz[GATE_OUTPUT * u + j] = dh[j] * tc * o * (1.0 - o);
        dc_prev[j] = dc * f;
    }

    axpy(1.0, &dz, grads.b.as_mut_slice());
    outer_acc(x_t, &dz, &mut grads.w);
    mat_vec_acc(&p.w, &dz, dx);

    let mut dh_prev = vec![0.0; u];
    match recurrent_mask {
        None => {
            outer_acc(&cache.h_prev, &dz, &mut grads.u);
            mat_vec_acc(&p.u, &dz, &mut dh_prev);
        }
        Some(mask) => {
            for j in 0..u {
                let urow = p.u.row(j);
                let h = cache.h_prev[j];
                let mut acc = 0.0;
                for k in 0..GATES {
                    let m = mask[k * u + j];
                    if m == 0.0 {
                        continue;
                    }
                    let dzk = &dz[k * u..(k + 1) * u];
                    acc += m * dot(&urow[k * u..(k + 1) * u], dzk);
                    if h != 0.0 {
                        axpy(h * m, dzk, &mut grads.u.row_mut(j)[k * u..(k + 1) * u]);
                    }
                }
                dh_prev[j] = acc;
            }
        }
    }
    (dh_prev, dc_prev)
}

/// Cached state of one direction over a sequence, in processing order.
#[derive(Clone, Debug)]
pub struct DirectionCache {
    pub reverse: bool,
    pub mask: Option<Vec<f64>>,
    pub steps: Vec<StepCache>,
}

/// Runs one direction over `x` (`T x d`); returns hidden states aligned to input
/// positions (`T x units`).
pub fn lstm_direction(
    p: &LstmParams,
    x: &Matrix,
    reverse: bool,
    mask: Option<Vec<f64>>,
) -> Result<(Matrix, DirectionCache), ModelError> {
    let u = p.units();
    let len = x.rows();
    let mut out = Matrix::zeros(len, u);
    let mut h = vec![0.0; u];
    let mut c = vec![0.0; u];
    let mut steps = Vec::with_capacity(len);
    for s in 0..len {
        let t = if reverse { len - 1 - s } else { s };
        let (h_next, c_next, cache) = lstm_cell_step(p, x.row(t), &h, &c, mask.as_deref())?;
        out.row_mut(t).copy_from_slice(&h_next);
        h = h_next;
        c = c_next;
        steps.push(cache);
    }
    Ok((
        out,
        DirectionCache {
            reverse,
            mask,
            steps,
        },
    ))
}

/// BPTT for one direction. `dh_out` is `T x units` aligned to input positions;
/// the input gradient is accumulated into `dx` (`T x d`).
pub fn lstm_direction_backward(
    p: &LstmParams,
    x: &Matrix,
    cache: &DirectionCache,
    dh_out: &Matrix,
    grads: &mut LstmParams,
    dx: &mut Matrix,
) {
    let u = p.units();
    let len = x.rows();
    let mut dh_next = vec![0.0; u];
    let mut dc_next = vec![0.0; u];
    for s in (0..len).rev() {
        let t = if cache.reverse { len - 1 - s } else { s };
        let mut dh = dh_out.row(t).to_vec();
        axpy(1.0, &dh_next, &mut dh);
        let (dhp, dcp) = lstm_cell_backward(
            p,
            x.row(t),
            &cache.steps[s],
            cache.mask.as_deref(),
            &dh,
            &dc_next,
            grads,
            dx.row_mut(t),
        );
        dh_next = dhp;
        dc_next = dcp;
    }
}

#[derive(Clone, Debug)]
pub struct BiLstmCache {
    pub forward: DirectionCache,
    pub backward: DirectionCache,
}

/// Bidirectional LSTM with explicit recurrent masks. Output row `t` is
/// `[h_forward_t ; h_backward_t]`.
pub fn bilstm_forward_masked(
    fwd: &LstmParams,
    bwd: &LstmParams,
    x: &Matrix,
    fwd_mask: Option<Vec<f64>>,
    bwd_mask: Option<Vec<f64>>,
) -> Result<(Matrix, BiLstmCache), ModelError> {
    let (hf, cf) = lstm_direction(fwd, x, false, fwd_mask)?;
    let (hb, cb) = lstm_direction(bwd, x, true, bwd_mask)?;
    let (uf, ub) = (fwd.units(), bwd.units());
    let mut out = Matrix::zeros(x.rows(), uf + ub);
    for t in 0..x.rows() {
        let row = out.row_mut(t);
        row[..uf].copy_from_slice(hf.row(t));
        row[uf..].copy_from_slice(hb.row(t));
    }
    Ok((
        out,
        BiLstmCache {
            forward: cf,
            backward: cb,
        },
    ))
}

/// Bidirectional LSTM; in train mode samples one per-sequence recurrent mask per
/// direction (order: forward then backward).
pub fn bilstm_forward(
    fwd: &LstmParams,
    bwd: &LstmParams,
    x: &Matrix,
    recurrent_dropout: f64,
    mode: Mode,
    rng: &mut RngState,
) -> Result<(Matrix, BiLstmCache), ModelError> {
    let (mf, mb) = if mode == Mode::Train && recurrent_dropout > 0.0 {
        (
            Some(sample_keep_mask(
                rng,
                GATES * fwd.units(),
                recurrent_dropout,
            )),
            Some(sample_keep_mask(
                rng,
                GATES * bwd.units(),
                recurrent_dropout,
            )),
        )
    } else {
        (None, None)
    };
    bilstm_forward_masked(fwd, bwd, x, mf, mb)
}

/// The same affine map at every timestep followed by a row softmax.
pub fn dense_softmax(w: &Matrix, b: &Matrix, hidden: &Matrix) -> Result<Matrix, ModelError> {
    let mut logits = hidden.matmul(w)?;
    for t in 0..logits.rows() {
        let row = logits.row_mut(t);
        axpy(1.0, b.as_slice(), row);
        softmax_in_place(row);
    }
    Ok(logits)
}
