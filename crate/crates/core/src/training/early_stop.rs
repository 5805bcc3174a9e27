/// Outcome of an early-stopping check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EarlyStop {
    Continue,
    /// Stop; `best_epoch` is 1-based and has the minimal validation loss so far.
    Stop {
        best_epoch: usize,
    },
}

/// 1-based epoch with the smallest loss; the earliest wins ties.
pub fn best_epoch(val_losses: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &l) in val_losses.iter().enumerate() {
        if best.is_none_or(|(_, b)| l < b) {
            best = Some((i, l));
        }
    }
    best.map(|(i, _)| i + 1)
}

/// Stops once the validation loss has gone `patience` consecutive epochs
/// without improving on the reference value by more than `min_delta`.
/// A patience of 0 behaves like 1: the first non-improving epoch stops.
pub fn early_stop_check(val_losses: &[f64], patience: usize, min_delta: f64) -> EarlyStop {
    let Some((&first, rest)) = val_losses.split_first() else {
        return EarlyStop::Continue;
    };
    let mut reference = first;
    let mut wait = 0;
    for &l in rest {
        if l < reference - min_delta {
            reference = l;
            wait = 0;
        } else {
            wait += 1;
        }
    }
    if wait >= patience.max(1) {
        EarlyStop::Stop {
            best_epoch: best_epoch(val_losses).unwrap_or(1),
        }
    } else {
        EarlyStop::Continue
    }
}
