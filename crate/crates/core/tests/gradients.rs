mod common;

use graphvec::trainer::{apply_pair, init_model, ns_gradients, ns_loss, EmbeddingModel, NsGradients};
use graphvec::{Matrix, TrainConfig};
use proptest::prelude::*;
use rand::Rng;

const H: f64 = 1e-4;
const REL_TOL: f64 = 1e-5;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn loss_of(vectors: &[Vec<f64>]) -> f64 {
    let negs: Vec<&[f64]> = vectors[2..].iter().map(|v| v.as_slice()).collect();
    ns_loss(&vectors[0], &vectors[1], &negs).unwrap()
}

/// Central-difference gradient of the loss with respect to every vector:
/// graph, target, then negatives.
fn numeric_gradient(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut work = vectors.to_vec();
    let mut out = Vec::with_capacity(vectors.len());
    for which in 0..vectors.len() {
        let mut grad = vec![0.0; vectors[which].len()];
        for (j, g) in grad.iter_mut().enumerate() {
            let orig = work[which][j];
            work[which][j] = orig + H;
            let up = loss_of(&work);
            work[which][j] = orig - H;
            let down = loss_of(&work);
            work[which][j] = orig;
            *g = (up - down) / (2.0 * H);
        }
        out.push(grad);
    }
    out
}

fn flatten(g: &NsGradients<f64>) -> Vec<Vec<f64>> {
    let mut out = vec![g.graph.clone(), g.target.clone()];
    out.extend(g.negatives.iter().cloned());
    out
}

/// Norm-wise relative error of the analytic gradient against the numeric one,
/// per participating vector.
fn worst_relative_error(vectors: &[Vec<f64>]) -> f64 {
    let negs: Vec<&[f64]> = vectors[2..].iter().map(|v| v.as_slice()).collect();
    let analytic = flatten(&ns_gradients(&vectors[0], &vectors[1], &negs).unwrap());
    let numeric = numeric_gradient(vectors);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| {
            let diff: Vec<f64> = a.iter().zip(n).map(|(x, y)| x - y).collect();
            norm(&diff) / norm(a).max(norm(n)).max(1e-8)
        })
        .fold(0.0, f64::max)
}

fn random_vectors(rng: &mut impl Rng, dims: usize, k: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..k + 2)
        .map(|_| (0..dims).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

#[test]
fn finite_differences_agree_on_random_configurations() {
    let mut rng = common::rng(17);
    for case in 0..300 {
        let dims = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=5);
        let vectors = random_vectors(&mut rng, dims, k, 1.0);
        let err = worst_relative_error(&vectors);
        assert!(err < REL_TOL, "case {case}: dims {dims}, k {k}, relative error {err:e}");
    }
}

proptest! {
    #[test]
    fn finite_differences_agree_at_any_scale(seed in any::<u64>(), dims in 1usize..=8, k in 1usize..=5, scale in 0.01f64..2.0) {
        let mut rng = common::rng(seed);
        let vectors = random_vectors(&mut rng, dims, k, scale);
        prop_assert!(worst_relative_error(&vectors) < REL_TOL);
    }

    /// The loss in `f32` tracks a direct `f64` evaluation of the formula.
    #[test]
    fn single_precision_loss_tracks_naive_oracle(seed in any::<u64>(), dims in 1usize..=16, k in 0usize..=6) {
        let mut rng = common::rng(seed);
        let vectors = random_vectors(&mut rng, dims, k, 1.5);
        let naive = {
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
            let mut l = -sig(dot(&vectors[0], &vectors[1])).ln();
            for n in &vectors[2..] {
                l -= (1.0 - sig(dot(&vectors[0], n))).ln();
            }
            l
        };
        let single: Vec<Vec<f32>> = vectors.iter().map(|v| v.iter().map(|&x| x as f32).collect()).collect();
        let negs: Vec<&[f32]> = single[2..].iter().map(|v| v.as_slice()).collect();
        let got = ns_loss(&single[0], &single[1], &negs).unwrap() as f64;
        prop_assert!((got - naive).abs() <= 1e-4 * naive.max(1.0), "{} vs {}", got, naive);
    }
}

#[test]
fn saturated_dot_products_stay_finite() {
    let g = vec![100.0f64; 4];
    let t = vec![-100.0f64; 4];
    let n = vec![100.0f64; 4];
    let loss = ns_loss(&g, &t, &[&n]).unwrap();
    // both terms clamp at 30
    assert!((loss - 2.0 * (30.0f64 + (-30.0f64).exp().ln_1p())).abs() < 1e-9);
    let grads = ns_gradients(&g, &t, &[&n]).unwrap();
    assert!(grads.graph.iter().all(|x| x.is_finite()));
}

/// One SGD step moves each participating row by `-lr` times its gradient and
/// leaves every other row bit-identical.
#[test]
fn sgd_step_matches_gradient_on_random_models() {
    let mut rng = common::rng(23);
    for _ in 0..50 {
        let dims = rng.gen_range(1..=8);
        let vocab = rng.gen_range(8..20);
        let config = TrainConfig {
            dimensions: dims,
            seed: rng.gen(),
            ..Default::default()
        };
        let mut model: EmbeddingModel<f64> = init_model(3, vocab, &config);
        model.token_vectors = Matrix::from_rows(
            &(0..vocab)
                .map(|_| (0..dims).map(|_| rng.gen_range(-0.5..0.5)).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        let k = rng.gen_range(1..=5);
        let mut ids: Vec<usize> = (0..vocab).collect();
        rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut rng);
        let (target, negatives) = (ids[0], ids[1..=k].to_vec());
        let before = model.clone();
        let negs: Vec<&[f64]> = negatives.iter().map(|&n| before.token_vectors.row(n)).collect();
        let grads = ns_gradients(before.graph_vector(1), before.token_vectors.row(target), &negs).unwrap();
        let lr = 0.05;
        apply_pair(&mut model, 1, target, &negatives, lr).unwrap();

        let close = |after: &[f64], start: &[f64], grad: &[f64]| {
            after.iter().zip(start).zip(grad).all(|((a, s), g)| (a - (s - lr * g)).abs() < 1e-14)
        };
        assert!(close(model.graph_vector(1), before.graph_vector(1), &grads.graph));
        assert!(close(model.token_vectors.row(target), before.token_vectors.row(target), &grads.target));
        for (i, &n) in negatives.iter().enumerate() {
            assert!(close(model.token_vectors.row(n), before.token_vectors.row(n), &grads.negatives[i]));
        }
        for g in [0, 2] {
            assert_eq!(model.graph_vector(g), before.graph_vector(g));
        }
        for t in ids[k + 1..].iter() {
            assert_eq!(model.token_vectors.row(*t), before.token_vectors.row(*t));
        }
    }
}
