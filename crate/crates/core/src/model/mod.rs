//! The Bi-LSTM tagger: configuration, parameters, layers, forward and
//! backward passes, prediction and the on-disk bundle.

mod bundle;
mod config;
pub mod layers;
mod network;
mod params;
mod predict;

pub use bundle::{BundleError, ModelBundle, FORMAT_VERSION, MAGIC};
pub use config::ModelConfig;
pub use layers::{
    bilstm_forward, bilstm_forward_masked, dense_softmax, embed, lstm_cell_backward,
    lstm_cell_step, spatial_dropout, BiLstmCache, Mode, StepCache,
};
pub use network::{
    backward, batch_loss, forward, forward_sentence, infer_sentence, loss_and_gradients,
    loss_with_masks, BatchForward, DropoutMasks, ForwardCache,
};
pub use params::{LstmParams, ModelParams, TENSOR_NAMES};
pub use predict::predict_tags;

use thiserror::Error;

use crate::tensor::TensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("word id {id} out of range for vocabulary of {num_words}")]
    WordId { id: usize, num_words: usize },
    #[error("target for sentence {sentence}, position {position} is not one-hot")]
    Target { sentence: usize, position: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
