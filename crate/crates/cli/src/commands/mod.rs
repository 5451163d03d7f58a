pub mod fit;
pub mod simulate;
pub mod validate;

use nalgebra::DMatrix;
use serde::Serialize;

/// One off-diagonal coherence, `i < j`, zero-based channel indices.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

pub fn upper_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
}

pub fn pair_values(m: &DMatrix<f64>) -> Vec<PairValue> {
    upper_pairs(m.nrows()).map(|(i, j)| PairValue { i, j, value: m[(i, j)] }).collect()
}
