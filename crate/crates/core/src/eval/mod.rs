//! Downstream use of graph vectors: classification, clustering, similarity
//! search and the explicit WL feature baseline.

mod ari;
mod features;
mod kmeans;
mod logistic;
mod neighbors;

pub use ari::adjusted_rand_index;
pub use features::{wl_feature_vectors, SparseCounts};
pub use kmeans::{kmeans, ClusteringResult, MAX_LLOYD_ITERATIONS};
pub use logistic::LogisticRegression;
pub use neighbors::{cosine, nearest_neighbors};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Rng, Stream};
use crate::scalar::Scalar;

/// L2 strengths tried by cross-validation, strongest first.
pub const L2_GRID: [f64; 7] = [10.0, 1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
pub const CV_FOLDS: usize = 5;
/// Attempts per repeat to draw a split whose training part covers every class.
pub const SPLIT_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.9,
            repeats: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
    pub accuracies: Vec<f64>,
    /// L2 strength picked by cross-validation in each repeat.
    pub chosen_l2: Vec<f64>,
}

/// Maps arbitrary class labels to dense indices in ascending label order.
pub fn dense_labels(labels: &[i64]) -> (Vec<usize>, Vec<i64>) {
    let classes: Vec<i64> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let dense = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (dense, classes)
}

fn by_class(labels: &[usize], items: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in items {
        groups.entry(labels[i]).or_default().push(i);
    }
    groups
}

/// Stratified train/test split. Each class contributes
/// `round(fraction * count)` items to training, kept within `1..count` when
/// the class has at least two members.
pub fn stratified_split(labels: &[usize], train_fraction: f64, rng: &mut Rng) -> (Vec<usize>, Vec<usize>) {
    let all: Vec<usize> = (0..labels.len()).collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut members) in by_class(labels, &all) {
        members.shuffle(rng);
        let count = members.len();
        let mut n_train = (train_fraction * count as f64).round() as usize;
        if count >= 2 {
            n_train = n_train.clamp(1, count - 1);
        }
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Stratified fold index of every position of `items`.
fn stratified_folds(labels: &[usize], items: &[usize], folds: usize, rng: &mut Rng) -> Vec<usize> {
    let position: BTreeMap<usize, usize> = items.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let mut fold_of = vec![0; items.len()];
    let mut next = 0;
    for (_, mut members) in by_class(labels, items) {
        members.shuffle(rng);
        for i in members {
            fold_of[position[&i]] = next % folds;
            next += 1;
        }
    }
    fold_of
}

fn standardize(features: &Matrix<f64>, train: &[usize]) -> Matrix<f64> {
    let d = features.cols();
    let n = train.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in train {
        mean.iter_mut().zip(features.row(i)).for_each(|(m, x)| *m += x / n);
    }
    let mut var = vec![0.0; d];
    for &i in train {
        var.iter_mut()
            .zip(features.row(i).iter().zip(&mean))
            .for_each(|(v, (x, m))| *v += (x - m) * (x - m) / n);
    }
    let scale: Vec<f64> = var.iter().map(|v| if *v > 1e-24 { 1.0 / v.sqrt() } else { 1.0 }).collect();
    let mut out = features.clone();
    for i in 0..out.rows() {
        for ((x, m), s) in out.row_mut(i).iter_mut().zip(&mean).zip(&scale) {
            *x = (*x - m) * s;
        }
    }
    out
}

fn submatrix(m: &Matrix<f64>, rows: &[usize], cols: &[usize]) -> Matrix<f64> {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (a, &r) in rows.iter().enumerate() {
        let src = m.row(r);
        for (dst, &c) in out.row_mut(a).iter_mut().zip(cols) {
            *dst = src[c];
        }
    }
    out
}

fn evaluate(gram: &Matrix<f64>, labels: &[usize], n_classes: usize, train: &[usize], test: &[usize], l2: f64) -> f64 {
    let k_train = submatrix(gram, train, train);
    let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let fits = logistic::fit_all(&k_train, &y, n_classes, l2);
    let cross = submatrix(gram, test, train);
    let pred = logistic::predict_from_decisions(&logistic::decisions(&cross, &fits), n_classes);
    let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
    logistic::accuracy(&pred, &truth)
}

/// One repeat: split, pick L2 by stratified cross-validation on the training
/// part, refit, and score on the held-out part.
fn run_repeat(features: &Matrix<f64>, labels: &[usize], n_classes: usize, split: &SplitSpec, repeat: usize) -> Result<(f64, f64)> {
    for attempt in 0..SPLIT_ATTEMPTS {
        let mut rng = stream_rng(split.seed, Stream::Split, (repeat as u64) << 8 | attempt);
        let (train, test) = stratified_split(labels, split.train_fraction, &mut rng);
        let covered = by_class(labels, &train).len() == n_classes;
        if !covered || test.is_empty() {
            continue;
        }
        let scaled = standardize(features, &train);
        let gram = logistic::gram(&scaled);

        let folds = stratified_folds(labels, &train, CV_FOLDS, &mut rng);
        let mut best = (f64::NEG_INFINITY, L2_GRID[0]);
        for &l2 in &L2_GRID {
            let mut acc = 0.0;
            let mut used = 0;
            for f in 0..CV_FOLDS {
                let fit_on: Vec<usize> = train.iter().zip(&folds).filter(|(_, &k)| k != f).map(|(&i, _)| i).collect();
                let score_on: Vec<usize> = train.iter().zip(&folds).filter(|(_, &k)| k == f).map(|(&i, _)| i).collect();
                if score_on.is_empty() || by_class(labels, &fit_on).len() < 2 {
                    continue;
                }
                acc += evaluate(&gram, labels, n_classes, &fit_on, &score_on, l2);
                used += 1;
            }
            let score = if used > 0 { acc / used as f64 } else { f64::NEG_INFINITY };
            if score > best.0 {
                best = (score, l2);
            }
        }
        let accuracy = evaluate(&gram, labels, n_classes, &train, &test, best.1);
        return Ok((accuracy, best.1));
    }
    Err(Error::Split(format!(
        "repeat {repeat}: no split in {SPLIT_ATTEMPTS} attempts put every class in training"
    )))
}

/// Repeated stratified hold-out classification with L2 logistic regression.
pub fn classify<S: Scalar>(embeddings: &Matrix<S>, labels: &[i64], split: &SplitSpec) -> Result<ClassificationReport> {
    if embeddings.rows() != labels.len() {
        return Err(Error::Argument(format!(
            "{} embeddings but {} labels",
            embeddings.rows(),
            labels.len()
        )));
    }
    if !(split.train_fraction > 0.0 && split.train_fraction < 1.0) {
        return Err(Error::Argument("train fraction must lie in (0, 1)".into()));
    }
    if split.repeats == 0 {
        return Err(Error::Argument("repeats must be at least 1".into()));
    }
    let (dense, classes) = dense_labels(labels);
    if classes.len() < 2 {
        return Err(Error::Argument("classification needs at least two classes".into()));
    }
    let features = embeddings.cast::<f64>();
    let results: Vec<(f64, f64)> = (0..split.repeats)
        .into_par_iter()
        .map(|r| run_repeat(&features, &dense, classes.len(), split, r))
        .collect::<Result<_>>()?;
    let accuracies: Vec<f64> = results.iter().map(|r| r.0).collect();
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std = (accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n).sqrt();
    Ok(ClassificationReport {
        mean,
        std,
        accuracies,
        chosen_l2: results.iter().map(|r| r.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn split_is_stratified() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i < 30)).collect();
        let mut rng = Rng::seed_from_u64(1);
        let (train, test) = stratified_split(&labels, 0.9, &mut rng);
        assert_eq!(train.len() + test.len(), 100);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 1).count(), 27);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 3);
    }

    #[test]
    fn singleton_class_missing_from_training_is_a_split_error() {
        // a lone class-2 item lands in training only when round(0.3) > 0, never
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
        let labels = [0, 0, 0, 0, 1, 1, 1, 1, 2];
        let split = SplitSpec {
            train_fraction: 0.3,
            repeats: 1,
            seed: 0,
        };
        let r = classify(&Matrix::from_rows(&rows), &labels, &split);
        assert!(matches!(r, Err(Error::Split(_))));
    }

    #[test]
    fn separated_clusters_classify_perfectly() {
        let rows: Vec<Vec<f32>> = (0..40)
            .map(|i| {
                let side = if i % 2 == 0 { 3.0 } else { -3.0 };
                vec![side + (i as f32 * 0.37).sin() * 0.5, (i as f32 * 0.91).cos()]
            })
            .collect();
        let labels: Vec<i64> = (0..40).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let report = classify(&Matrix::from_rows(&rows), &labels, &SplitSpec::default()).unwrap();
        assert_eq!(report.mean, 1.0);
        assert_eq!(report.std, 0.0);
        assert_eq!(report.accuracies.len(), 10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Matrix::from_rows(&[vec![0.0f64], vec![1.0]]);
        assert!(classify(&m, &[1, 1], &SplitSpec::default()).is_err());
        assert!(classify(&m, &[1], &SplitSpec::default()).is_err());
        let bad = SplitSpec {
            train_fraction: 1.0,
            ..Default::default()
        };
        assert!(classify(&m, &[0, 1], &bad).is_err());
    }
}
