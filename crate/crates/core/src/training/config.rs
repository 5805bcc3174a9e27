use crate::parallel::Execution;

use super::TrainError;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Trailing share of the training sentences held out for validation.
    pub validation_split: f64,
    /// Share of the whole corpus held out for testing by the train command.
    pub test_fraction: f64,
    /// `None` disables early stopping.
    pub patience: Option<usize>,
    pub min_delta: f64,
    pub seed: u64,
    pub folds: usize,
    pub learning_rate: f64,
    /// Global-norm gradient clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    /// Exclude padded positions from the loss.
    pub mask_padding: bool,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            max_epochs: 50,
            validation_split: 0.2,
            test_fraction: 0.1,
            patience: Some(3),
            min_delta: 0.0,
            seed: 1,
            folds: 5,
            learning_rate: 0.001,
            clip_norm: Some(5.0),
            mask_padding: false,
            execution: Execution::Parallel,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return bad(format!(
                "validation_split must lie in [0, 1), got {}",
                self.validation_split
            ));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.min_delta < 0.0 {
            return bad("min_delta must be non-negative".into());
        }
        if self.clip_norm.is_some_and(|c| c <= 0.0) {
            return bad("clip_norm must be positive".into());
        }
        if self.folds < 2 {
            return bad(format!("k must be at least 2, got {}", self.folds));
        }
        Ok(())
    }
}
