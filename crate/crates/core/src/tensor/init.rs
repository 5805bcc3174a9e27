use super::{Matrix, RngState, TensorError};

/// Glorot/Xavier uniform: entries drawn from `U(-a, a)` with `a = sqrt(6 / (rows + cols))`.
pub fn glorot_uniform(rng: &mut RngState, rows: usize, cols: usize) -> Result<Matrix, TensorError> {
    if rows == 0 || cols == 0 {
        return Err(TensorError::Argument(format!(
            "glorot_uniform needs non-zero dimensions, got {rows}x{cols}"
        )));
    }
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.uniform_range(-limit, limit))
        .collect();
    Matrix::from_vec(rows, cols, data)
}
