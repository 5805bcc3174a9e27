use super::{Matrix, TensorError};

/// Lower clamp applied to the true-class probability before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Matrix) -> Matrix {
    x.map(sigmoid_scalar)
}

pub fn tanh(x: &Matrix) -> Matrix {
    x.map(f64::tanh)
}

/// In-place softmax over one row of logits.
pub fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in logits.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in logits.iter_mut() {
        *x /= sum;
    }
}

pub fn softmax(logits: &[f64]) -> Result<Vec<f64>, TensorError> {
    if logits.is_empty() {
        return Err(TensorError::Argument("softmax of an empty vector".into()));
    }
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

/// Mean over rows of `-ln p[true class]`. Every target row must be one-hot.
pub fn categorical_cross_entropy(predicted: &Matrix, target: &Matrix) -> Result<f64, TensorError> {
    predicted.check_same_shape("categorical_cross_entropy", target)?;
    if predicted.rows() == 0 {
        return Err(TensorError::Argument(
            "cross-entropy over zero positions".into(),
        ));
    }
    let mut total = 0.0;
    for r in 0..predicted.rows() {
        let class = one_hot_index(target.row(r)).ok_or(TensorError::NotOneHot { row: r })?;
        total += -predicted.get(r, class).clamp(PROB_FLOOR, 1.0).ln();
    }
    Ok(total / predicted.rows() as f64)
}

/// Index of the single 1.0 entry, or `None` if the row is not one-hot.
pub fn one_hot_index(row: &[f64]) -> Option<usize> {
    let mut found = None;
    for (i, &v) in row.iter().enumerate() {
        if v == 1.0 {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        } else if v != 0.0 {
            return None;
        }
    }
    found
}

/// First index of the maximum; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
