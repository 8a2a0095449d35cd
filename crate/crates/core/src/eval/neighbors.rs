use log::warn;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{dot, norm, Scalar};

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == S::zero() {
        return 0.0;
    }
    (dot(a, b) / denom).to_f64_lossy()
}

/// The `top_n` graphs most similar to `query` by cosine, most similar first,
/// ties broken by ascending graph id. The query itself is excluded.
pub fn nearest_neighbors<S: Scalar>(embeddings: &Matrix<S>, query: usize, top_n: usize) -> Result<Vec<(usize, f64)>> {
    let n = embeddings.rows();
    if query >= n {
        return Err(Error::Argument(format!("query graph {query} out of range ({n} graphs)")));
    }
    if top_n >= n {
        return Err(Error::Argument(format!("top_n {top_n} must be smaller than the corpus size {n}")));
    }
    let q = embeddings.row(query);
    if norm(q) == S::zero() {
        warn!("query graph {query} has a zero vector; all similarities are 0");
    }
    let mut scored: Vec<(usize, f64)> = (0..n)
        .filter(|&i| i != query)
        .map(|i| {
            let row = embeddings.row(i);
            if norm(row) == S::zero() {
                warn!("graph {i} has a zero vector; similarity set to 0");
            }
            (i, cosine(q, row))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(top_n);
    Ok(scored)
}
