#![allow(dead_code)]

use graphvec::graph::GraphBuilder;
use graphvec::{Graph, GraphCorpus};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Graph from an edge list and one label per node.
pub fn graph(labels: &[&str], edges: &[(usize, usize)]) -> Graph {
    let mut b = GraphBuilder::new(labels.len());
    for &(u, v) in edges {
        b.add_edge(u, v, None);
    }
    b.build(0, Some(labels.iter().map(|s| s.to_string()).collect()), None)
}

/// Erdos-Renyi graph with `1..=max_nodes` nodes labeled from `alphabet`.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, alphabet: usize, p: f64) -> Graph {
    let n = rng.gen_range(1..=max_nodes);
    let labels: Vec<String> = (0..n).map(|_| format!("L{}", rng.gen_range(0..alphabet))).collect();
    let mut b = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                b.add_edge(u, v, None);
            }
        }
    }
    b.build(0, Some(labels), None)
}

/// Connected graph: a random spanning tree plus `extra` chords.
pub fn random_connected(rng: &mut impl Rng, n: usize, alphabet: usize, extra: usize) -> Graph {
    let labels: Vec<String> = (0..n).map(|_| format!("L{}", rng.gen_range(0..alphabet))).collect();
    let mut b = GraphBuilder::new(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        b.add_edge(u, v, None);
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        b.add_edge(u, v, None);
    }
    b.build(0, Some(labels), None)
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Corpus of `distinct` random graphs followed by node-permuted copies of the
/// first `duplicates` of them. Returns the corpus and the duplicated id pairs.
pub fn corpus_with_duplicates(seed: u64, distinct: usize, duplicates: usize) -> (GraphCorpus, Vec<(usize, usize)>) {
    let mut rng = rng(seed);
    let mut graphs: Vec<Graph> = (0..distinct)
        .map(|_| {
            let n = rng.gen_range(8..=14);
            random_connected(&mut rng, n, 4, n / 3)
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..duplicates {
        let perm = random_permutation(&mut rng, graphs[i].node_count());
        graphs.push(graphs[i].permuted(&perm));
        pairs.push((i, distinct + i));
    }
    (GraphCorpus::new("toy", graphs).expect("nonempty"), pairs)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
