//! Material named-entity recognition.
//!
//! A Bi-LSTM sequence tagger written from first principles (hand-derived
//! backpropagation through time), an IOB corpus pipeline, a training loop with
//! early stopping and k-fold cross-validation, and strict entity-level
//! evaluation. The `mner` binary wraps the pipeline for batch use.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod parallel;
pub mod tensor;
pub mod training;
