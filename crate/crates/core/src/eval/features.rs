use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::vocab::{GraphDocument, Vocabulary};

/// Sparse graph x token count matrix: the explicit WL bag-of-subgraphs
/// feature map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCounts {
    pub n_cols: usize,
    /// Per row, `(column, count)` sorted by column.
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl SparseCounts {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |e| e.0).map_or(0, |i| r[i].1)
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.rows[row].iter().map(|e| e.1 as u64).sum()
    }

    pub fn to_dense<S: Scalar>(&self) -> Matrix<S> {
        let mut m = Matrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            let out = m.row_mut(i);
            for &(c, v) in row {
                out[c] = S::from_f64_lossy(v as f64);
            }
        }
        m
    }
}

pub fn wl_feature_vectors(documents: &[GraphDocument], vocab: &Vocabulary) -> SparseCounts {
    SparseCounts {
        n_cols: vocab.len(),
        rows: documents.iter().map(GraphDocument::counts).collect(),
    }
}
