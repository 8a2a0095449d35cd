use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Stream};
use crate::scalar::{axpy, Scalar};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    /// Cluster of each row, dense in `0..k`.
    pub assignments: Vec<usize>,
    pub k: usize,
    /// Sum of squared distances to the assigned centroids.
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step.
    #[serde(skip)]
    pub inertia_history: Vec<f64>,
}

fn sq_dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

fn nearest<S: Scalar>(point: &[S], centroids: &Matrix<S>) -> (usize, S) {
    let mut best = (0, S::infinity());
    for (c, centroid) in centroids.iter_rows().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds<S: Scalar>(data: &Matrix<S>, k: usize, rng: &mut crate::rng::Rng) -> Matrix<S> {
    let n = data.rows();
    let mut centroids = Matrix::zeros(k, data.cols());
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).copy_from_slice(data.row(first));
    let mut closest: Vec<f64> = data.iter_rows().map(|p| sq_dist(p, data.row(first)).to_f64_lossy()).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(data.row(pick));
        for (i, p) in data.iter_rows().enumerate() {
            closest[i] = closest[i].min(sq_dist(p, data.row(pick)).to_f64_lossy());
        }
    }
    centroids
}

/// k-means with k-means++ seeding and Lloyd iterations until the assignment
/// stops changing or `MAX_LLOYD_ITERATIONS` is reached. A centroid that loses
/// all its points is moved onto the point farthest from its own centroid.
pub fn kmeans<S: Scalar>(data: &Matrix<S>, k: usize, seed: u64) -> Result<ClusteringResult> {
    let n = data.rows();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} must be in 1..={n}")));
    }
    let mut rng = stream_rng(seed, Stream::KMeans, 0);
    let mut centroids = plus_plus_seeds(data, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut distances = vec![S::zero(); n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let mut changed = false;
        for (i, p) in data.iter_rows().enumerate() {
            let (c, d) = nearest(p, &centroids);
            changed |= assignments[i] != c;
            assignments[i] = c;
            distances[i] = d;
        }

        let mut sizes = vec![0usize; k];
        for &c in &assignments {
            sizes[c] += 1;
        }
        // re-seed empty clusters deterministically at the worst-served points
        let empty: Vec<usize> = (0..k).filter(|&c| sizes[c] == 0).collect();
        for c in empty {
            let far = (0..n)
                .filter(|&i| sizes[assignments[i]] > 1)
                .max_by(|&a, &b| distances[a].partial_cmp(&distances[b]).expect("finite").then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with two points");
            sizes[assignments[far]] -= 1;
            assignments[far] = c;
            distances[far] = S::zero();
            sizes[c] = 1;
            centroids.row_mut(c).copy_from_slice(data.row(far));
            changed = true;
        }

        history.push(distances.iter().map(|d| d.to_f64_lossy()).sum());
        iterations += 1;
        if !changed || iterations >= MAX_LLOYD_ITERATIONS {
            break;
        }

        let mut sums = Matrix::zeros(k, data.cols());
        for (i, p) in data.iter_rows().enumerate() {
            axpy(S::one(), p, sums.row_mut(assignments[i]));
        }
        for (c, &size) in sizes.iter().enumerate() {
            let inv = S::one() / S::from_usize(size).expect("size fits");
            for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                *dst = s * inv;
            }
        }
    }

    Ok(ClusteringResult {
        inertia: *history.last().expect("one iteration"),
        assignments,
        k,
        iterations,
        inertia_history: history,
    })
}
