//! PV-DBOW training of graph vectors against rooted-subgraph tokens with
//! negative sampling.

mod infer;
mod model;
mod objective;
mod sampler;
mod sgd;

pub use infer::infer_new_graph;
pub use model::{init_model, EmbeddingModel};
pub use objective::{log_sigmoid, ns_gradients, ns_loss, sigmoid, NsGradients, DOT_CLAMP};
pub use sampler::NegativeSampler;
pub use sgd::{apply_pair, learning_rate_at, train, train_observed, train_pair, EpochStats};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wl::WlOptions;

/// Retry budget when a drawn negative collides with the excluded set.
pub const NEGATIVE_RETRIES: usize = 16;

/// Fraction of the initial learning rate reached by the final update.
pub const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Largest rooted-subgraph degree `D`.
    pub max_degree: usize,
    pub dimensions: usize,
    pub epochs: usize,
    /// Initial learning rate; decays linearly to `MIN_LR_FRACTION` of itself.
    pub learning_rate: f64,
    pub negative_samples: usize,
    /// Exponent on token frequency for the negative distribution; 0 is uniform.
    pub ns_exponent: f64,
    pub seed: u64,
    pub workers: usize,
    pub min_count: u64,
    /// Fold edge labels into rooted-subgraph tokens.
    pub edge_labels: bool,
    /// Reject negatives that occur anywhere in the current graph's document,
    /// instead of only rejecting the current target.
    pub exclude_document: bool,
    /// Visit a graph's tokens in a fresh random order every epoch.
    pub shuffle_tokens: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_degree: 3,
            dimensions: 128,
            epochs: 100,
            learning_rate: 0.025,
            negative_samples: 10,
            ns_exponent: 0.75,
            seed: 1,
            workers: 1,
            min_count: 1,
            edge_labels: false,
            exclude_document: false,
            shuffle_tokens: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Argument(msg.to_string()));
        if self.dimensions == 0 {
            return fail("dimensions must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive and finite");
        }
        if self.negative_samples == 0 {
            return fail("negative samples must be at least 1");
        }
        if !(self.ns_exponent >= 0.0 && self.ns_exponent.is_finite()) {
            return fail("negative-sampling exponent must be finite and non-negative");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        Ok(())
    }

    pub fn wl_options(&self) -> WlOptions {
        WlOptions {
            max_degree: self.max_degree,
            edge_labels: self.edge_labels,
        }
    }
}
