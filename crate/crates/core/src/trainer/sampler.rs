use std::collections::HashSet;

use rand::Rng as _;

use crate::rng::Rng;
use crate::vocab::Vocabulary;

use super::NEGATIVE_RETRIES;

/// Draws token ids with probability proportional to `frequency^exponent`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, exponent: f64) -> Self {
        Self::from_frequencies(vocab.frequencies(), exponent)
    }

    pub fn from_frequencies(frequencies: impl IntoIterator<Item = u64>, exponent: f64) -> Self {
        let weights: Vec<f64> = frequencies.into_iter().map(|f| (f as f64).powf(exponent)).collect();
        assert!(!weights.is_empty(), "sampler needs at least one token");
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cumulative.last_mut().expect("nonempty") = 1.0;
        NegativeSampler { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, id: usize) -> f64 {
        let prev = if id == 0 { 0.0 } else { self.cumulative[id - 1] };
        self.cumulative[id] - prev
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }

    /// Draws a negative that differs from `target` (and, when given, from
    /// every token of `document`), resampling up to `NEGATIVE_RETRIES` times
    /// before accepting a collision.
    pub fn sample_excluding(&self, rng: &mut Rng, target: usize, document: Option<&HashSet<usize>>) -> usize {
        let mut id = self.sample(rng);
        for _ in 0..NEGATIVE_RETRIES {
            let clash = id == target || document.is_some_and(|d| d.contains(&id));
            if !clash {
                break;
            }
            id = self.sample(rng);
        }
        id
    }

    pub fn fill_negatives(
        &self,
        rng: &mut Rng,
        target: usize,
        document: Option<&HashSet<usize>>,
        out: &mut Vec<usize>,
        k: usize,
    ) {
        out.clear();
        out.extend((0..k).map(|_| self.sample_excluding(rng, target, document)));
    }
}
