//! Whole-graph embeddings.
//!
//! Each graph is read as a document whose words are its Weisfeiler-Lehman
//! rooted subgraphs (one per node and degree `0..=D`). A PV-DBOW model then
//! learns one vector per graph by predicting the graph's subgraph tokens
//! against negatively sampled ones. The [`eval`] module consumes the vectors
//! for classification, clustering and similarity queries.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the common choices.
//!
//! ```
//! use graphvec::{graph::GraphBuilder, GraphCorpus, PreparedCorpus, TrainConfig};
//!
//! let mut b = GraphBuilder::new(3);
//! b.add_edge(0, 1, None);
//! b.add_edge(1, 2, None);
//! let path = b.build(0, Some(vec!["C".into(), "N".into(), "C".into()]), None);
//! let corpus = GraphCorpus::new("toy", vec![path.clone(), path]).unwrap();
//!
//! let config = TrainConfig { dimensions: 8, epochs: 5, ..Default::default() };
//! let prepared = PreparedCorpus::new(&corpus, config.wl_options(), config.min_count).unwrap();
//! let model: graphvec::EmbeddingModel32 =
//!     graphvec::train(&prepared.documents, &prepared.vocabulary, &config).unwrap();
//! assert_eq!(model.graph_vectors.rows(), 2);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod persist;
pub mod rng;
pub mod scalar;
pub mod trainer;
pub mod vocab;
pub mod wl;

pub use dataset::{load_dataset, parse_jsonl_dataset, parse_tu_dataset, DatasetFormat};
pub use error::{Error, Result};
pub use graph::{relabel_by_degree, Graph, GraphCorpus};
pub use matrix::Matrix;
pub use scalar::Scalar;
pub use trainer::{infer_new_graph, init_model, train, TrainConfig};
pub use vocab::{build_vocabulary, corpus_to_documents, GraphDocument, PreparedCorpus, Vocabulary};
pub use wl::{get_wl_subgraph, WlOptions, WlTokenizer};

pub type EmbeddingModel32 = trainer::EmbeddingModel<f32>;
pub type EmbeddingModel64 = trainer::EmbeddingModel<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Matrix64 = Matrix<f64>;
pub type ModelFile32 = persist::ModelFile<f32>;
pub type ModelFile64 = persist::ModelFile<f64>;
