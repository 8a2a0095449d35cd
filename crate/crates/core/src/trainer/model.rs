use crate::matrix::Matrix;
use crate::rng::{stream_rng, Stream};
use crate::scalar::Scalar;

use super::TrainConfig;

/// Graph vectors (one row per graph) and output vectors of the subgraph
/// tokens (one row per vocabulary entry).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<S> {
    pub graph_vectors: Matrix<S>,
    pub token_vectors: Matrix<S>,
}

impl<S: Scalar> EmbeddingModel<S> {
    pub fn dimensions(&self) -> usize {
        self.graph_vectors.cols()
    }

    pub fn n_graphs(&self) -> usize {
        self.graph_vectors.rows()
    }

    pub fn vocab_size(&self) -> usize {
        self.token_vectors.rows()
    }

    pub fn graph_vector(&self, graph_id: usize) -> &[S] {
        self.graph_vectors.row(graph_id)
    }

    pub fn is_finite(&self) -> bool {
        self.graph_vectors.all_finite() && self.token_vectors.all_finite()
    }
}

/// Half-width of the uniform initialization interval.
pub(crate) fn init_half_width(dimensions: usize) -> f64 {
    0.5 / dimensions as f64
}

pub(crate) fn random_vector<S: Scalar>(dimensions: usize, rng: &mut impl rand::Rng) -> Vec<S> {
    let h = init_half_width(dimensions);
    (0..dimensions).map(|_| S::from_f64_lossy(rng.gen_range(-h..h))).collect()
}

/// Graph vectors uniform in `(-0.5/δ, 0.5/δ)`, token vectors zero.
pub fn init_model<S: Scalar>(n_graphs: usize, vocab_size: usize, config: &TrainConfig) -> EmbeddingModel<S> {
    let dims = config.dimensions;
    let mut rng = stream_rng(config.seed, Stream::Init, 0);
    let mut data = Vec::with_capacity(n_graphs * dims);
    for _ in 0..n_graphs {
        data.extend(random_vector::<S>(dims, &mut rng));
    }
    EmbeddingModel {
        graph_vectors: Matrix::from_vec(n_graphs, dims, data),
        token_vectors: Matrix::zeros(vocab_size, dims),
    }
}
