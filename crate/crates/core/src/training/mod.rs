//! Epoch loop, validation hold-out, early stopping and k-fold cross-validation.

mod config;
mod crossval;
mod early_stop;
mod trainer;

pub use config::TrainConfig;
pub use crossval::{cross_validate, Aggregate, CrossValReport, FoldResult, MeanStd};
pub use early_stop::{best_epoch, early_stop_check, EarlyStop};
pub use trainer::{
    min_sentences, train, train_with_observer, EpochRecord, EpochView, TrainHistory,
};

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::model::ModelError;
use crate::tensor::TensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("corpus too small: need at least {required} sentences, found {found}")]
    TooSmall { required: usize, found: usize },
    #[error("training diverged at epoch {epoch}: non-finite loss or parameters")]
    Diverged { epoch: usize },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<TensorError> for TrainError {
    fn from(e: TensorError) -> Self {
        TrainError::Model(ModelError::Tensor(e))
    }
}
