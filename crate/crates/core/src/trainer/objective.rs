//! Negative-sampling objective for one (graph, token) pair:
//! `-log σ(g·t) - Σ log σ(-g·n)`.

use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, Scalar};

/// Dot products are clamped to `[-DOT_CLAMP, DOT_CLAMP]` before the logistic.
pub const DOT_CLAMP: f64 = 30.0;

pub(crate) fn clamp_dot<S: Scalar>(x: S) -> S {
    let c = S::from_f64_lossy(DOT_CLAMP);
    x.max(-c).min(c)
}

pub fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// `log σ(x)` without overflow for either sign.
pub fn log_sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn check_finite<S: Scalar>(vectors: &[&[S]]) -> Result<()> {
    if vectors.iter().all(|v| v.iter().all(|x| x.is_finite())) {
        Ok(())
    } else {
        Err(Error::Numerical {
            step: 0,
            message: "non-finite input vector".into(),
        })
    }
}

/// Loss of one positive and `negatives.len()` negative tokens. Always `>= 0`.
pub fn ns_loss<S: Scalar>(graph: &[S], target: &[S], negatives: &[&[S]]) -> Result<S> {
    check_finite(&[graph, target])?;
    check_finite(negatives)?;
    let mut loss = -log_sigmoid(clamp_dot(dot(graph, target)));
    for n in negatives {
        loss -= log_sigmoid(-clamp_dot(dot(graph, n)));
    }
    Ok(loss)
}

/// Gradients of [`ns_loss`] with respect to every participating vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NsGradients<S> {
    pub graph: Vec<S>,
    pub target: Vec<S>,
    pub negatives: Vec<Vec<S>>,
}

/// Analytic gradient: for label `y` (1 for the target, 0 for negatives) and
/// `x = g·v`, the loss term has `∂/∂g = (σ(x) - y) v` and `∂/∂v = (σ(x) - y) g`.
pub fn ns_gradients<S: Scalar>(graph: &[S], target: &[S], negatives: &[&[S]]) -> Result<NsGradients<S>> {
    check_finite(&[graph, target])?;
    check_finite(negatives)?;
    let dims = graph.len();
    let mut g_grad = vec![S::zero(); dims];
    let coef = |v: &[S], label: S| sigmoid(clamp_dot(dot(graph, v))) - label;

    let c = coef(target, S::one());
    axpy(c, target, &mut g_grad);
    let target_grad = graph.iter().map(|&g| c * g).collect();

    let mut neg_grads = Vec::with_capacity(negatives.len());
    for n in negatives {
        let c = coef(n, S::zero());
        axpy(c, n, &mut g_grad);
        neg_grads.push(graph.iter().map(|&g| c * g).collect());
    }
    Ok(NsGradients {
        graph: g_grad,
        target: target_grad,
        negatives: neg_grads,
    })
}

/// One output-token term of an SGD step: accumulates this term's descent
/// direction for the graph vector into `graph_step`, updates `token` in
/// place, and returns the term's loss at the pre-step point.
#[inline]
pub(crate) fn output_step<S: Scalar>(graph: &[S], graph_step: &mut [S], token: &mut [S], label: S, lr: S) -> Option<S> {
    let x = dot(graph, token);
    if !x.is_finite() {
        return None;
    }
    let x = clamp_dot(x);
    let loss = if label > S::zero() { -log_sigmoid(x) } else { -log_sigmoid(-x) };
    let coef = lr * (label - sigmoid(x));
    axpy(coef, token, graph_step);
    axpy(coef, graph, token);
    Some(loss)
}
