//! On-disk formats.
//!
//! Text embeddings: a header line `<n_graphs> <dims>`, then one line per graph
//! `<graph_id> v1 ... vd` with values at 6 significant digits.
//!
//! Binary model (`GV01`), all integers little-endian:
//!
//! | field          | type                     |
//! |----------------|--------------------------|
//! | magic          | `b"GV01"`                |
//! | scalar width   | u32 (4 = f32, 8 = f64)   |
//! | n_graphs       | u64                      |
//! | vocab_size     | u64                      |
//! | dims           | u64                      |
//! | graph vectors  | n_graphs x dims, row-major |
//! | token vectors  | vocab_size x dims, row-major |
//! | metadata len   | u64                      |
//! | metadata       | UTF-8 JSON ([`ModelMetadata`]) |

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::GraphCorpus;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::trainer::{EmbeddingModel, TrainConfig};
use crate::vocab::Vocabulary;
use crate::wl::{WlOptions, WlTokenizer};

pub const MODEL_MAGIC: &[u8; 4] = b"GV01";

/// Formats like C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_embeddings<S: Scalar>(vectors: &Matrix<S>, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{} {}", vectors.rows(), vectors.cols())?;
    let mut line = String::new();
    for (i, row) in vectors.iter_rows().enumerate() {
        line.clear();
        line.push_str(&i.to_string());
        for v in row {
            line.push(' ');
            line.push_str(&format_sig6(v.to_f64_lossy()));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_embeddings<S: Scalar>(path: &Path) -> Result<Matrix<S>> {
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::format(path, None, "missing file"),
        _ => Error::io(path, e),
    })?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| Error::format(path, Some(1), "empty embedding file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::format(path, Some(1), "header must be `<n_graphs> <dims>`")))
        .collect::<Result<_>>()?;
    let [n, d] = dims[..] else {
        return Err(Error::format(path, Some(1), "header must be `<n_graphs> <dims>`"));
    };
    let mut m = Matrix::zeros(n, d);
    let mut seen = vec![false; n];
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::format(path, Some(line_no), "expected a graph id"))?;
        if id >= n || seen[id] {
            return Err(Error::format(path, Some(line_no), format!("graph id {id} out of range or repeated")));
        }
        seen[id] = true;
        let values: Vec<f64> = fields
            .map(|t| t.parse().map_err(|_| Error::format(path, Some(line_no), format!("bad value {t:?}"))))
            .collect::<Result<_>>()?;
        if values.len() != d {
            return Err(Error::format(path, Some(line_no), format!("{} values, expected {d}", values.len())));
        }
        for (dst, v) in m.row_mut(id).iter_mut().zip(values) {
            *dst = S::from_f64_lossy(v);
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::format(path, None, format!("no vector for graph {missing}")));
    }
    Ok(m)
}

/// Everything besides the matrices needed to reuse a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub corpus_name: String,
    pub config: TrainConfig,
    pub class_labels: Option<Vec<i64>>,
    pub vocabulary: Vocabulary,
    pub tokenizer: WlTokenizer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile<S> {
    pub model: EmbeddingModel<S>,
    pub metadata: ModelMetadata,
}

impl<S: Scalar> ModelFile<S> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.model;
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(S::WIDTH_TAG as u32).to_le_bytes());
        for n in [m.n_graphs(), m.vocab_size(), m.dimensions()] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for &v in m.graph_vectors.as_slice().iter().chain(m.token_vectors.as_slice()) {
            v.write_le(&mut out);
        }
        let meta = serde_json::to_vec(&self.metadata).expect("metadata serializes");
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(&meta);
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let width = scalar_width(bytes, path)?;
        if width != S::WIDTH_TAG as u32 {
            return Err(Error::Version(format!(
                "{} stores {width}-byte scalars, expected {}",
                path.display(),
                S::WIDTH_TAG
            )));
        }
        let mut cursor = Cursor { bytes, pos: 8, path };
        let n_graphs = cursor.u64()? as usize;
        let vocab_size = cursor.u64()? as usize;
        let dims = cursor.u64()? as usize;
        let w = S::WIDTH_TAG as usize;
        let mut read_matrix = |rows: usize| -> Result<Matrix<S>> {
            let len = rows
                .checked_mul(dims)
                .and_then(|c| c.checked_mul(w))
                .ok_or_else(|| Error::format(path, None, "matrix size overflows"))?;
            let raw = cursor.take(len)?;
            Ok(Matrix::from_vec(rows, dims, raw.chunks_exact(w).map(S::read_le).collect()))
        };
        let graph_vectors = read_matrix(n_graphs)?;
        let token_vectors = read_matrix(vocab_size)?;
        let meta_len = cursor.u64()? as usize;
        let meta = cursor.take(meta_len)?;
        let metadata: ModelMetadata =
            serde_json::from_slice(meta).map_err(|e| Error::format(path, None, format!("metadata: {e}")))?;
        if metadata.vocabulary.len() != vocab_size {
            return Err(Error::format(path, None, "vocabulary size disagrees with token matrix"));
        }
        Ok(ModelFile {
            model: EmbeddingModel {
                graph_vectors,
                token_vectors,
            },
            metadata,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

/// Checks the magic and returns the scalar width tag of a model file image.
pub fn scalar_width(bytes: &[u8], path: &Path) -> Result<u32> {
    if bytes.len() < 8 || &bytes[..2] != b"GV" {
        return Err(Error::format(path, None, "not a model file"));
    }
    if &bytes[..4] != MODEL_MAGIC {
        return Err(Error::Version(format!(
            "{} has format {:?}, expected {:?}",
            path.display(),
            String::from_utf8_lossy(&bytes[..4]),
            std::str::from_utf8(MODEL_MAGIC).expect("ascii")
        )));
    }
    Ok(u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format(self.path, None, "model file is truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// SHA-256 over the corpus content (structure, labels, classes) and the
/// tokenization settings that determine the vocabulary.
pub fn vocabulary_hash(corpus: &GraphCorpus, options: WlOptions, min_count: u64) -> String {
    let mut h = Sha256::new();
    h.update(b"graphvec-vocab-v1\0");
    h.update((options.max_degree as u64).to_le_bytes());
    h.update([u8::from(options.edge_labels)]);
    h.update(min_count.to_le_bytes());
    h.update((corpus.len() as u64).to_le_bytes());
    for g in corpus.graphs() {
        let record = crate::dataset::GraphRecord::from_graph(g);
        h.update(serde_json::to_vec(&record).expect("record serializes"));
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
