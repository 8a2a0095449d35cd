use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::scalar::{axpy, Scalar};
use crate::vocab::{GraphDocument, Vocabulary};

use super::model::{random_vector, EmbeddingModel};
use super::objective::output_step;
use super::sampler::NegativeSampler;
use super::{learning_rate_at, TrainConfig};

/// Learns a vector for a graph outside the training corpus by running the
/// training schedule on a fresh graph vector while token vectors stay frozen.
///
/// `document` must already be mapped onto `vocab` (unknown tokens dropped).
/// A learning rate of zero is accepted and returns the random initialization.
pub fn infer_new_graph<S: Scalar>(
    model: &EmbeddingModel<S>,
    vocab: &Vocabulary,
    document: &GraphDocument,
    config: &TrainConfig,
) -> Result<Vec<S>> {
    if config.dimensions != model.dimensions() {
        return Err(Error::Argument(format!(
            "config has {} dimensions, model has {}",
            config.dimensions,
            model.dimensions()
        )));
    }
    if config.epochs == 0 || config.negative_samples == 0 || config.learning_rate.is_nan() || config.learning_rate < 0.0 {
        return Err(Error::Argument("inference needs epochs >= 1, negatives >= 1, lr >= 0".into()));
    }
    if vocab.len() != model.vocab_size() {
        return Err(Error::Argument("vocabulary does not match the model".into()));
    }
    if document.is_empty() {
        return Err(Error::Inference("graph shares no tokens with the vocabulary".into()));
    }
    if let Some(&bad) = document.token_ids.iter().find(|&&t| t >= vocab.len()) {
        return Err(Error::Argument(format!("unknown token id {bad}")));
    }

    let dims = model.dimensions();
    let mut rng = stream_rng(config.seed, Stream::Inference, document.graph_id as u64);
    let mut graph = random_vector::<S>(dims, &mut rng);
    if config.learning_rate == 0.0 {
        return Ok(graph);
    }

    let sampler = NegativeSampler::new(vocab, config.ns_exponent);
    let total = (document.len() * config.epochs) as u64;
    let k = config.negative_samples;
    let mut negatives = Vec::with_capacity(k);
    let mut scratch = vec![S::zero(); dims];
    // frozen rows are copied before use so the model is never written
    let mut token = vec![S::zero(); dims];
    let mut step = 0u64;
    for _ in 0..config.epochs {
        for &target in &document.token_ids {
            sampler.fill_negatives(&mut rng, target, None, &mut negatives, k);
            let lr = S::from_f64_lossy(learning_rate_at(config.learning_rate, step, total));
            scratch.iter_mut().for_each(|v| *v = S::zero());
            for (row, label) in std::iter::once((target, S::one())).chain(negatives.iter().map(|&n| (n, S::zero()))) {
                token.copy_from_slice(model.token_vectors.row(row));
                output_step(&graph, &mut scratch, &mut token, label, lr).ok_or_else(|| Error::Numerical {
                    step,
                    message: format!("non-finite dot product during inference, token {row}"),
                })?;
            }
            axpy(S::one(), &scratch, &mut graph);
            step += 1;
        }
    }
    if graph.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            step,
            message: "inferred vector is non-finite".into(),
        });
    }
    Ok(graph)
}
