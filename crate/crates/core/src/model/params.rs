use crate::tensor::{glorot_uniform, Matrix, RngState};

use super::{ModelConfig, ModelError};

/// Gate blocks are laid out `[input, forget, candidate, output]` along the
/// column axis of `w`, `u` and `b`.
pub const GATES: usize = 4;
pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_CANDIDATE: usize = 2;
pub const GATE_OUTPUT: usize = 3;

/// Random stream reserved for weight initialization.
pub(crate) const INIT_STREAM: u64 = 1;

/// Weights of one LSTM direction.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// Input weights, `embedding_dim x 4*units`.
    pub w: Matrix,
    /// Recurrent weights, `units x 4*units`.
    pub u: Matrix,
    /// Biases, `1 x 4*units`.
    pub b: Matrix,
}

impl LstmParams {
    pub fn zeros(input: usize, units: usize) -> Self {
        LstmParams {
            w: Matrix::zeros(input, GATES * units),
            u: Matrix::zeros(units, GATES * units),
            b: Matrix::zeros(1, GATES * units),
        }
    }

    /// Glorot-uniform weights, forget-gate bias 1, other biases 0.
    pub fn init(rng: &mut RngState, input: usize, units: usize) -> Result<Self, ModelError> {
        let mut b = Matrix::zeros(1, GATES * units);
        b.as_mut_slice()[GATE_FORGET * units..(GATE_FORGET + 1) * units].fill(1.0);
        Ok(LstmParams {
            w: glorot_uniform(rng, input, GATES * units)?,
            u: glorot_uniform(rng, units, GATES * units)?,
            b,
        })
    }

    pub fn units(&self) -> usize {
        self.u.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w.rows()
    }
}

/// Every trainable tensor of the tagger. The same layout also holds gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// `num_words x embedding_dim`; row 0 (PAD) starts at zero.
    pub embedding: Matrix,
    pub forward: LstmParams,
    pub backward: LstmParams,
    /// `2*units x num_tags`.
    pub dense_w: Matrix,
    /// `1 x num_tags`.
    pub dense_b: Matrix,
}

pub const TENSOR_NAMES: [&str; 9] = [
    "embedding",
    "forward.w",
    "forward.u",
    "forward.b",
    "backward.w",
    "backward.u",
    "backward.b",
    "dense.w",
    "dense.b",
];

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let (d, u, k) = (cfg.embedding_dim, cfg.lstm_units, cfg.num_tags);
        ModelParams {
            embedding: Matrix::zeros(cfg.num_words, d),
            forward: LstmParams::zeros(d, u),
            backward: LstmParams::zeros(d, u),
            dense_w: Matrix::zeros(2 * u, k),
            dense_b: Matrix::zeros(1, k),
        }
    }

    /// Seeded initialization; depends only on `cfg`, including `cfg.seed`.
    pub fn init(cfg: &ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut rng = RngState::derive(cfg.seed, INIT_STREAM);
        let (d, u, k) = (cfg.embedding_dim, cfg.lstm_units, cfg.num_tags);
        let mut embedding = glorot_uniform(&mut rng, cfg.num_words, d)?;
        embedding.row_mut(crate::corpus::PAD_ID).fill(0.0);
        let forward = LstmParams::init(&mut rng, d, u)?;
        let backward = LstmParams::init(&mut rng, d, u)?;
        let dense_w = glorot_uniform(&mut rng, 2 * u, k)?;
        Ok(ModelParams {
            embedding,
            forward,
            backward,
            dense_w,
            dense_b: Matrix::zeros(1, k),
        })
    }

    /// Tensors in the fixed serialization order of [`TENSOR_NAMES`].
    pub fn tensors(&self) -> [&Matrix; 9] {
        [
            &self.embedding,
            &self.forward.w,
            &self.forward.u,
            &self.forward.b,
            &self.backward.w,
            &self.backward.u,
            &self.backward.b,
            &self.dense_w,
            &self.dense_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 9] {
        [
            &mut self.embedding,
            &mut self.forward.w,
            &mut self.forward.u,
            &mut self.forward.b,
            &mut self.backward.w,
            &mut self.backward.u,
            &mut self.backward.b,
            &mut self.dense_w,
            &mut self.dense_b,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|t| t.sum_of_squares())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            t.scale(alpha);
        }
    }

    /// Rescales so the global L2 norm is at most `max_norm`; returns the norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for t in self.tensors() {
            out.extend_from_slice(t.as_slice());
        }
        out
    }

    /// Overwrites all tensors from a flat vector in [`TENSOR_NAMES`] order.
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<(), ModelError> {
        if flat.len() != self.param_count() {
            return Err(ModelError::Shape(format!(
                "flat parameter vector has {} values, model has {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn matches_config(&self, cfg: &ModelConfig) -> bool {
        let z = ModelParams::zeros(cfg);
        let ok = self
            .tensors()
            .iter()
            .zip(z.tensors())
            .all(|(a, b)| a.shape() == b.shape());
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn param_count_matches_formula(v in 2usize..30, d in 1usize..12, u in 1usize..10, seed in 0u64..1000) {
            let cfg = ModelConfig {
                num_words: v,
                embedding_dim: d,
                lstm_units: u,
                seed,
                ..ModelConfig::default()
            };
            let p = ModelParams::init(&cfg).unwrap();
            prop_assert_eq!(p.param_count(), cfg.param_count());
            prop_assert_eq!(
                p.param_count(),
                v * d + 2 * (4 * (d * u + u * u + u)) + (2 * u * 5 + 5)
            );
        }
    }

    fn tiny() -> ModelConfig {
        ModelConfig {
            max_len: 5,
            embedding_dim: 4,
            lstm_units: 3,
            num_words: 7,
            ..Default::default()
        }
    }

    #[test]
    fn init_conventions() {
        let p = ModelParams::init(&tiny()).unwrap();
        assert!(p.embedding.row(0).iter().all(|&x| x == 0.0));
        let b = p.forward.b.as_slice();
        assert_eq!(&b[3..6], &[1.0; 3]);
        assert!(b[..3].iter().chain(&b[6..]).all(|&x| x == 0.0));
        assert!(p.dense_b.as_slice().iter().all(|&x| x == 0.0));
        assert!(p.is_finite());
    }

    #[test]
    fn init_deterministic() {
        assert_eq!(
            ModelParams::init(&tiny()).unwrap(),
            ModelParams::init(&tiny()).unwrap()
        );
        let other = ModelConfig { seed: 2, ..tiny() };
        assert_ne!(
            ModelParams::init(&tiny()).unwrap(),
            ModelParams::init(&other).unwrap()
        );
    }

    #[test]
    fn flat_round_trip_and_clip() {
        let mut p = ModelParams::init(&tiny()).unwrap();
        let flat = p.flatten();
        let mut q = ModelParams::zeros(&tiny());
        q.assign_flat(&flat).unwrap();
        assert_eq!(p, q);
        assert!(q.assign_flat(&flat[1..]).is_err());

        let before = p.global_norm();
        let reported = p.clip_global_norm(before / 2.0);
        assert_eq!(reported, before);
        assert!((p.global_norm() - before / 2.0).abs() < 1e-12);
    }
}
