use crate::tensor::RngState;

use super::{Corpus, CorpusError};

/// Seeded sentence-level shuffle followed by a partition into
/// `(train, test)` with `|test| = round(N * test_fraction)`.
pub fn split(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(Corpus, Corpus), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::Argument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    RngState::new(seed).shuffle(&mut order);
    let n_test = (n as f64 * test_fraction).round() as usize;
    let test = corpus.subset(&order[..n_test]);
    let train = corpus.subset(&order[n_test..]);
    Ok((train, test))
}

#[derive(Clone, Debug)]
pub struct Fold {
    pub train: Corpus,
    pub validation: Corpus,
}

/// `k` folds over a seeded shuffle. Fold sizes differ by at most one, the
/// larger folds first.
pub fn kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<Fold>, CorpusError> {
    let n = corpus.len();
    if k < 2 {
        return Err(CorpusError::Argument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if k > n {
        return Err(CorpusError::Argument(format!(
            "k = {k} exceeds the number of sentences ({n})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    RngState::new(seed).shuffle(&mut order);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let end = start + size;
        let train_idx: Vec<usize> = order[..start]
            .iter()
            .chain(&order[end..])
            .copied()
            .collect();
        folds.push(Fold {
            train: corpus.subset(&train_idx),
            validation: corpus.subset(&order[start..end]),
        });
        start = end;
    }
    Ok(folds)
}
