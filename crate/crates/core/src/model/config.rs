use super::ModelError;

/// Network dimensions and regularization.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub max_len: usize,
    pub embedding_dim: usize,
    /// Hidden units per LSTM direction.
    pub lstm_units: usize,
    pub spatial_dropout: f64,
    pub recurrent_dropout: f64,
    /// Vocabulary size including the PAD and UNK ids.
    pub num_words: usize,
    pub num_tags: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            max_len: 90,
            embedding_dim: 90,
            lstm_units: 200,
            spatial_dropout: 0.2,
            recurrent_dropout: 0.2,
            num_words: 2,
            num_tags: 5,
            seed: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let dims = [
            ("max_len", self.max_len),
            ("embedding_dim", self.embedding_dim),
            ("lstm_units", self.lstm_units),
            ("num_words", self.num_words),
            ("num_tags", self.num_tags),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::Config(format!("{name} must be at least 1")));
        }
        for (name, p) in [
            ("spatial_dropout", self.spatial_dropout),
            ("recurrent_dropout", self.recurrent_dropout),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(ModelError::Config(format!(
                    "{name} must lie in [0, 1), got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Closed-form trainable parameter count.
    pub fn param_count(&self) -> usize {
        let (v, d, u, k) = (
            self.num_words,
            self.embedding_dim,
            self.lstm_units,
            self.num_tags,
        );
        v * d + 2 * (4 * (d * u + u * u + u)) + (2 * u * k + k)
    }
}
