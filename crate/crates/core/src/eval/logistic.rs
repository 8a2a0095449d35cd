//! L2-regularized logistic regression, one-vs-rest for more than two classes.
//!
//! Training is deterministic full-batch accelerated gradient descent on
//! `mean(log(1 + exp(-s (w·x + b)))) + (l2 / 2) |w|^2`, with `b` unpenalized.
//! Iterates are kept in the span of the training rows (`w = Xᵀα`), which
//! is exactly where gradient descent from `w = 0` stays, so each step costs
//! `O(n²)` through the Gram matrix instead of `O(n·d)`.

use crate::matrix::Matrix;
use crate::trainer::sigmoid;

pub const MAX_ITERATIONS: usize = 500;
const GRADIENT_TOLERANCE: f64 = 1e-7;
const POWER_ITERATIONS: usize = 50;

/// Row-major square Gram matrix of training rows.
pub(crate) fn gram(rows: &Matrix<f64>) -> Matrix<f64> {
    cross_gram(rows, rows)
}

/// `a bᵀ`
pub(crate) fn cross_gram(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        let ai = a.row(i);
        let dst = out.row_mut(i);
        for (j, d) in dst.iter_mut().enumerate() {
            *d = ai.iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
        }
    }
    out
}

fn mat_vec(m: &Matrix<f64>, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Largest eigenvalue of `K + 11ᵀ` (the Gram matrix with a bias column).
fn spectral_bound(k: &Matrix<f64>) -> f64 {
    let n = k.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut kv = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        mat_vec(k, &v, &mut kv);
        let s: f64 = v.iter().sum();
        kv.iter_mut().for_each(|x| *x += s);
        let norm = kv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v.iter_mut().zip(&kv).for_each(|(a, b)| *a = b / norm);
    }
    // power iteration approaches from below
    lambda * 1.01
}

/// Dual coefficients and bias of one binary problem with targets `±1`.
#[derive(Debug, Clone)]
pub(crate) struct BinaryFit {
    pub alpha: Vec<f64>,
    pub bias: f64,
}

pub(crate) fn fit_binary(k: &Matrix<f64>, signs: &[f64], l2: f64) -> BinaryFit {
    let n = k.rows();
    let nf = n as f64;
    let lipschitz = 0.25 * spectral_bound(k) / nf + l2;
    let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };

    let mut alpha = vec![0.0; n];
    let mut bias = 0.0;
    let mut prev_alpha = alpha.clone();
    let mut look_alpha = alpha.clone();
    let mut look_bias = 0.0;
    let mut z = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut kg = vec![0.0; n];

    for iter in 0..MAX_ITERATIONS {
        mat_vec(k, &look_alpha, &mut z);
        let mut grad_bias = 0.0;
        for i in 0..n {
            let margin = signs[i] * (z[i] + look_bias);
            let r = -signs[i] * sigmoid(-margin);
            grad[i] = r / nf + l2 * look_alpha[i];
            grad_bias += r / nf;
        }
        if iter % 25 == 24 {
            // gradient norm in weight space: gᵀ K g + g_b²
            mat_vec(k, &grad, &mut kg);
            let gnorm = (grad.iter().zip(&kg).map(|(a, b)| a * b).sum::<f64>() + grad_bias * grad_bias).sqrt();
            if gnorm < GRADIENT_TOLERANCE {
                break;
            }
        }
        prev_alpha.copy_from_slice(&alpha);
        let prev_bias = bias;
        for i in 0..n {
            alpha[i] = look_alpha[i] - step * grad[i];
        }
        bias = look_bias - step * grad_bias;
        let momentum = iter as f64 / (iter as f64 + 3.0);
        for i in 0..n {
            look_alpha[i] = alpha[i] + momentum * (alpha[i] - prev_alpha[i]);
        }
        look_bias = bias + momentum * (bias - prev_bias);
    }
    BinaryFit { alpha, bias }
}

/// Decision values of every (row of `cross`, model) pair, where `cross` holds
/// inner products between evaluation rows and training rows.
pub(crate) fn decisions(cross: &Matrix<f64>, fits: &[BinaryFit]) -> Vec<Vec<f64>> {
    (0..cross.rows())
        .map(|i| {
            fits.iter()
                .map(|f| cross.row(i).iter().zip(&f.alpha).map(|(a, b)| a * b).sum::<f64>() + f.bias)
                .collect()
        })
        .collect()
}

/// Dense class indices `0..n_classes`; one-vs-rest for more than two.
pub(crate) fn fit_all(k: &Matrix<f64>, labels: &[usize], n_classes: usize, l2: f64) -> Vec<BinaryFit> {
    let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    targets
        .into_iter()
        .map(|c| {
            let signs: Vec<f64> = labels.iter().map(|&y| if y == c { 1.0 } else { -1.0 }).collect();
            fit_binary(k, &signs, l2)
        })
        .collect()
}

pub(crate) fn predict_from_decisions(decisions: &[Vec<f64>], n_classes: usize) -> Vec<usize> {
    decisions
        .iter()
        .map(|d| {
            if n_classes == 2 {
                usize::from(d[0] > 0.0)
            } else {
                let mut best = 0;
                for (c, &v) in d.iter().enumerate() {
                    if v > d[best] {
                        best = c;
                    }
                }
                best
            }
        })
        .collect()
}

/// A fitted classifier with explicit primal weights.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    n_classes: usize,
    /// One weight vector per binary problem.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LogisticRegression {
    /// Fits on `features` with labels in `0..n_classes` (`n_classes >= 2`).
    pub fn fit(features: &Matrix<f64>, labels: &[usize], n_classes: usize, l2: f64) -> Self {
        assert!(n_classes >= 2, "need at least two classes");
        assert_eq!(features.rows(), labels.len(), "one label per row");
        let k = gram(features);
        let fits = fit_all(&k, labels, n_classes, l2);
        let weights = fits
            .iter()
            .map(|f| {
                let mut w = vec![0.0; features.cols()];
                for (i, &a) in f.alpha.iter().enumerate() {
                    for (wj, xj) in w.iter_mut().zip(features.row(i)) {
                        *wj += a * xj;
                    }
                }
                w
            })
            .collect();
        LogisticRegression {
            n_classes,
            weights,
            biases: fits.iter().map(|f| f.bias).collect(),
        }
    }

    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect()
    }

    pub fn predict(&self, features: &Matrix<f64>) -> Vec<usize> {
        let d: Vec<Vec<f64>> = features.iter_rows().map(|r| self.decision_values(r)).collect();
        predict_from_decisions(&d, self.n_classes)
    }

    pub fn accuracy(&self, features: &Matrix<f64>, labels: &[usize]) -> f64 {
        accuracy(&self.predict(features), labels)
    }
}

pub(crate) fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}
