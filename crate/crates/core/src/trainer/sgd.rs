use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use log::debug;
use parking_lot::Mutex;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Rng, Stream};
use crate::scalar::{axpy, Scalar};
use crate::vocab::{GraphDocument, Vocabulary};

use super::model::{init_model, EmbeddingModel};
use super::objective::output_step;
use super::sampler::NegativeSampler;
use super::{TrainConfig, MIN_LR_FRACTION};

/// Per-epoch training summary handed to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean pre-step pair loss over the epoch.
    pub mean_loss: f64,
    /// Learning rate in effect at the end of the epoch.
    pub learning_rate: f64,
}

/// Linear decay from `alpha` at step 0 to `alpha * MIN_LR_FRACTION` at
/// `total`.
pub fn learning_rate_at(alpha: f64, step: u64, total: u64) -> f64 {
    let progress = if total == 0 { 0.0 } else { (step as f64 / total as f64).min(1.0) };
    alpha * (1.0 - (1.0 - MIN_LR_FRACTION) * progress)
}

/// One SGD step on a graph row against a target and its negatives. `scratch`
/// must be `dims` long. Returns the pre-step loss, or `None` when a dot
/// product is non-finite.
fn pair_step<S: Scalar>(
    graph: &mut [S],
    tokens: &mut Matrix<S>,
    target: usize,
    negatives: &[usize],
    lr: S,
    scratch: &mut [S],
) -> Option<S> {
    scratch.iter_mut().for_each(|v| *v = S::zero());
    let mut loss = output_step(graph, scratch, tokens.row_mut(target), S::one(), lr)?;
    for &neg in negatives {
        loss += output_step(graph, scratch, tokens.row_mut(neg), S::zero(), lr)?;
    }
    axpy(S::one(), scratch, graph);
    Some(loss)
}

/// Applies one SGD step for `(graph_id, target)` with the given negatives.
/// With distinct rows this moves every participating vector by exactly
/// `-lr` times its [`ns_gradients`](super::ns_gradients) entry.
pub fn apply_pair<S: Scalar>(
    model: &mut EmbeddingModel<S>,
    graph_id: usize,
    target: usize,
    negatives: &[usize],
    lr: S,
) -> Result<S> {
    let mut scratch = vec![S::zero(); model.dimensions()];
    let EmbeddingModel {
        graph_vectors,
        token_vectors,
    } = model;
    pair_step(graph_vectors.row_mut(graph_id), token_vectors, target, negatives, lr, &mut scratch).ok_or(
        Error::Numerical {
            step: 0,
            message: format!("non-finite dot product for graph {graph_id}, token {target}"),
        },
    )
}

/// Draws `k` negatives for `target` and applies one SGD step.
pub fn train_pair<S: Scalar>(
    model: &mut EmbeddingModel<S>,
    graph_id: usize,
    target: usize,
    sampler: &NegativeSampler,
    rng: &mut Rng,
    k: usize,
    lr: S,
) -> Result<S> {
    let mut negatives = Vec::with_capacity(k);
    sampler.fill_negatives(rng, target, None, &mut negatives, k);
    apply_pair(model, graph_id, target, &negatives, lr)
}

fn check_inputs(documents: &[GraphDocument], vocab: &Vocabulary) -> Result<u64> {
    if documents.is_empty() {
        return Err(Error::Argument("no documents to train on".into()));
    }
    let mut pairs = 0u64;
    for (i, doc) in documents.iter().enumerate() {
        if doc.graph_id != i {
            return Err(Error::Argument(format!("document {i} carries graph id {}", doc.graph_id)));
        }
        if let Some(&bad) = doc.token_ids.iter().find(|&&t| t >= vocab.len()) {
            return Err(Error::Argument(format!("document {i} references unknown token {bad}")));
        }
        pairs += doc.len() as u64;
    }
    if pairs == 0 {
        return Err(Error::Argument("every document is empty".into()));
    }
    Ok(pairs)
}

pub fn train<S: Scalar>(
    documents: &[GraphDocument],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<EmbeddingModel<S>> {
    train_observed(documents, vocab, config, |_| {})
}

/// Trains graph vectors for `documents`, calling `observer` after each epoch.
///
/// Every epoch visits the graphs in a freshly shuffled order and makes one
/// pair update per document token. With `workers == 1` the result is a pure
/// function of the inputs and the seed. With more workers, each epoch's graph
/// order is split into contiguous chunks trained concurrently against shared
/// rows, and results depend on scheduling.
pub fn train_observed<S: Scalar>(
    documents: &[GraphDocument],
    vocab: &Vocabulary,
    config: &TrainConfig,
    mut observer: impl FnMut(&EpochStats),
) -> Result<EmbeddingModel<S>> {
    config.validate()?;
    let pairs_per_epoch = check_inputs(documents, vocab)?;
    let total = pairs_per_epoch * config.epochs as u64;
    let sampler = NegativeSampler::new(vocab, config.ns_exponent);
    let model = init_model::<S>(documents.len(), vocab.len(), config);
    let mut shuffle_rng = stream_rng(config.seed, Stream::Shuffle, 0);
    let mut order: Vec<usize> = (0..documents.len()).collect();
    let exclusions: Option<Vec<HashSet<usize>>> = config
        .exclude_document
        .then(|| documents.iter().map(|d| d.token_ids.iter().copied().collect()).collect());

    debug!(
        "training {} graphs x {} tokens, {} pairs per epoch, {} workers",
        documents.len(),
        vocab.len(),
        pairs_per_epoch,
        config.workers
    );

    let job = Job {
        documents,
        sampler: &sampler,
        config,
        exclusions: exclusions.as_deref(),
        total,
    };
    let model = if config.workers == 1 {
        job.run_single(model, &mut order, &mut shuffle_rng, &mut observer)?
    } else {
        job.run_shared(model, &mut order, &mut shuffle_rng, &mut observer)?
    };

    if !model.is_finite() {
        return Err(Error::Numerical {
            step: total,
            message: "model contains non-finite values after training".into(),
        });
    }
    Ok(model)
}

struct Job<'a> {
    documents: &'a [GraphDocument],
    sampler: &'a NegativeSampler,
    config: &'a TrainConfig,
    exclusions: Option<&'a [HashSet<usize>]>,
    total: u64,
}

impl Job<'_> {
    fn lr<S: Scalar>(&self, step: u64) -> S {
        S::from_f64_lossy(learning_rate_at(self.config.learning_rate, step, self.total))
    }

    /// Token visiting order for one graph in one epoch.
    fn tokens_for(&self, graph: usize, rng: &mut Rng, buf: &mut Vec<usize>) {
        buf.clear();
        buf.extend_from_slice(&self.documents[graph].token_ids);
        if self.config.shuffle_tokens {
            buf.shuffle(rng);
        }
    }

    fn run_single<S: Scalar>(
        &self,
        mut model: EmbeddingModel<S>,
        order: &mut [usize],
        shuffle_rng: &mut Rng,
        observer: &mut impl FnMut(&EpochStats),
    ) -> Result<EmbeddingModel<S>> {
        let k = self.config.negative_samples;
        let mut rng = stream_rng(self.config.seed, Stream::Worker, 0);
        let mut scratch = vec![S::zero(); model.dimensions()];
        let mut negatives = Vec::with_capacity(k);
        let mut tokens = Vec::new();
        let mut step = 0u64;
        for epoch in 0..self.config.epochs {
            order.shuffle(shuffle_rng);
            let mut loss_sum = 0.0;
            let epoch_start = step;
            for &graph in order.iter() {
                self.tokens_for(graph, shuffle_rng, &mut tokens);
                let exclude = self.exclusions.map(|e| &e[graph]);
                for &target in &tokens {
                    self.sampler.fill_negatives(&mut rng, target, exclude, &mut negatives, k);
                    let lr = self.lr::<S>(step);
                    let loss = pair_step(
                        model.graph_vectors.row_mut(graph),
                        &mut model.token_vectors,
                        target,
                        &negatives,
                        lr,
                        &mut scratch,
                    )
                    .ok_or_else(|| numerical(step, epoch, graph, target))?;
                    loss_sum += loss.to_f64_lossy();
                    step += 1;
                }
            }
            observer(&EpochStats {
                epoch,
                mean_loss: loss_sum / (step - epoch_start) as f64,
                learning_rate: learning_rate_at(self.config.learning_rate, step, self.total),
            });
        }
        Ok(model)
    }

    fn run_shared<S: Scalar>(
        &self,
        model: EmbeddingModel<S>,
        order: &mut [usize],
        shuffle_rng: &mut Rng,
        observer: &mut impl FnMut(&EpochStats),
    ) -> Result<EmbeddingModel<S>> {
        let dims = model.dimensions();
        let graphs = SharedRows::new(&model.graph_vectors);
        let tokens = SharedRows::new(&model.token_vectors);
        let workers = self.config.workers;
        let mut worker_rngs: Vec<Rng> = (0..workers)
            .map(|w| stream_rng(self.config.seed, Stream::Worker, w as u64))
            .collect();
        let step = AtomicU64::new(0);
        let failed = AtomicBool::new(false);
        let first_error: Mutex<Option<Error>> = Mutex::new(None);

        for epoch in 0..self.config.epochs {
            order.shuffle(shuffle_rng);
            let epoch_start = step.load(Ordering::Relaxed);
            let chunk = order.len().div_ceil(workers);
            let loss_sum: f64 = std::thread::scope(|scope| {
                let handles: Vec<_> = order
                    .chunks(chunk)
                    .zip(worker_rngs.iter_mut())
                    .map(|(slice, rng)| {
                        let (graphs, tokens, step, failed, first_error) =
                            (&graphs, &tokens, &step, &failed, &first_error);
                        scope.spawn(move || {
                            let k = self.config.negative_samples;
                            let mut scratch = vec![S::zero(); dims];
                            let mut negatives = Vec::with_capacity(k);
                            let mut visit = Vec::new();
                            let mut loss_sum = 0.0;
                            for &graph in slice {
                                if failed.load(Ordering::Relaxed) {
                                    break;
                                }
                                self.tokens_for(graph, rng, &mut visit);
                                let exclude = self.exclusions.map(|e| &e[graph]);
                                let mut g = graphs.rows[graph].lock();
                                for &target in &visit {
                                    self.sampler.fill_negatives(rng, target, exclude, &mut negatives, k);
                                    let now = step.fetch_add(1, Ordering::Relaxed);
                                    let lr = self.lr::<S>(now);
                                    match shared_pair_step(&mut g, tokens, target, &negatives, lr, &mut scratch) {
                                        Some(loss) => loss_sum += loss.to_f64_lossy(),
                                        None => {
                                            failed.store(true, Ordering::Relaxed);
                                            first_error.lock().get_or_insert(numerical(now, epoch, graph, target));
                                            break;
                                        }
                                    }
                                }
                            }
                            loss_sum
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
            });
            if let Some(err) = first_error.lock().take() {
                return Err(err);
            }
            let now = step.load(Ordering::Relaxed);
            observer(&EpochStats {
                epoch,
                mean_loss: loss_sum / (now - epoch_start).max(1) as f64,
                learning_rate: learning_rate_at(self.config.learning_rate, now, self.total),
            });
        }
        Ok(EmbeddingModel {
            graph_vectors: graphs.into_matrix(dims),
            token_vectors: tokens.into_matrix(dims),
        })
    }
}

fn numerical(step: u64, epoch: usize, graph: usize, target: usize) -> Error {
    Error::Numerical {
        step,
        message: format!("non-finite dot product in epoch {epoch}, graph {graph}, token {target}"),
    }
}

/// Matrix rows behind individual locks. A pair update holds its graph row
/// for the whole step and one token row at a time, so lock order is always
/// graph before token and no two token rows are held together.
struct SharedRows<S> {
    rows: Vec<Mutex<Vec<S>>>,
}

impl<S: Scalar> SharedRows<S> {
    fn new(matrix: &Matrix<S>) -> Self {
        SharedRows {
            rows: matrix.iter_rows().map(|r| Mutex::new(r.to_vec())).collect(),
        }
    }

    fn into_matrix(self, cols: usize) -> Matrix<S> {
        let n = self.rows.len();
        let data = self.rows.into_iter().flat_map(Mutex::into_inner).collect();
        Matrix::from_vec(n, cols, data)
    }
}

fn shared_pair_step<S: Scalar>(
    graph: &mut [S],
    tokens: &SharedRows<S>,
    target: usize,
    negatives: &[usize],
    lr: S,
    scratch: &mut [S],
) -> Option<S> {
    scratch.iter_mut().for_each(|v| *v = S::zero());
    let mut loss = output_step(graph, scratch, &mut tokens.rows[target].lock(), S::one(), lr)?;
    for &neg in negatives {
        loss += output_step(graph, scratch, &mut tokens.rows[neg].lock(), S::zero(), lr)?;
    }
    axpy(S::one(), scratch, graph);
    Some(loss)
}
