use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

fn pairs(n: u64) -> i128 {
    (n as i128) * (n as i128 - 1) / 2
}

/// Adjusted Rand Index between two labelings of the same items.
///
/// Computed from the contingency table with exact integer arithmetic and a
/// single final division. When both labelings are trivial in the same way
/// (every item in one cluster, or every item alone) the index is undefined
/// and 1.0 is returned.
pub fn adjusted_rand_index<A, B>(pred: &[A], truth: &[B]) -> Result<f64>
where
    A: Hash + Eq,
    B: Hash + Eq,
{
    if pred.len() != truth.len() {
        return Err(Error::Argument(format!(
            "labelings differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::Argument("ARI needs at least 2 items".into()));
    }
    let mut cells: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (p, t) in pred.iter().zip(truth) {
        *cells.entry((p, t)).or_default() += 1;
        *rows.entry(p).or_default() += 1;
        *cols.entry(t).or_default() += 1;
    }
    let index: i128 = cells.values().map(|&c| pairs(c)).sum();
    let sum_rows: i128 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: i128 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(pred.len() as u64);
    // (index - rows*cols/total) / ((rows+cols)/2 - rows*cols/total), scaled by 2*total
    let numerator = 2 * (index * total - sum_rows * sum_cols);
    let denominator = (sum_rows + sum_cols) * total - 2 * sum_rows * sum_cols;
    if denominator == 0 {
        return Ok(1.0);
    }
    // reducing first keeps both operands exactly representable for longer
    let g = gcd(numerator.unsigned_abs(), denominator.unsigned_abs()) as i128;
    Ok((numerator / g) as f64 / (denominator / g) as f64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
