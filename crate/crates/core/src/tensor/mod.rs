//! Numerical primitives: dense matrices, activations, loss, Adam, seeded RNG.

mod adam;
mod gradcheck;
mod init;
mod matrix;
mod ops;
mod rng;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_diff_gradient, max_relative_error};
pub use init::glorot_uniform;
pub use matrix::{axpy, dot, mat_vec_acc, outer_acc, vec_mat_acc, Matrix};
pub use ops::{
    argmax, categorical_cross_entropy, one_hot_index, sigmoid, sigmoid_scalar, softmax,
    softmax_in_place, tanh, PROB_FLOOR,
};
pub use rng::RngState;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: incompatible shapes {}x{} and {}x{}", left.0, left.1, right.0, right.1)]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("data length {len} does not match shape {rows}x{cols}")]
    DataLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("target row {row} is not one-hot")]
    NotOneHot { row: usize },
    #[error("{0}")]
    Argument(String),
}
