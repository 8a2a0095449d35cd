mod common;

use std::collections::HashMap;

use graphvec::graph::GraphBuilder;
use graphvec::wl::{escape_label, get_wl_subgraph_with};
use graphvec::{Graph, GraphCorpus, PreparedCorpus, WlOptions, WlTokenizer};
use itertools::Itertools;
use proptest::prelude::*;

const D: usize = 3;

fn options(edge_labels: bool) -> WlOptions {
    WlOptions {
        max_degree: D,
        edge_labels,
    }
}

prop_compose! {
    fn small_graph(max_nodes: usize, edge_labels: bool)
        (n in 1..=max_nodes)
        (labels in prop::collection::vec(0u8..3, n),
         mask in prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
         bonds in prop::collection::vec(0u8..2, n * (n - 1) / 2))
        -> Graph
    {
        let n = labels.len();
        let mut b = GraphBuilder::new(n);
        let mut slot = 0;
        for u in 0..n {
            for v in u + 1..n {
                if mask[slot] {
                    b.add_edge(u, v, edge_labels.then(|| format!("b{}", bonds[slot])));
                }
                slot += 1;
            }
        }
        b.build(0, Some(labels.iter().map(|l| format!("n{l}")).collect()), None)
    }
}

/// Token multiset per degree.
fn multisets(t: &mut WlTokenizer, g: &Graph) -> Vec<Vec<String>> {
    let tg = t.tokenize(g);
    (0..=D)
        .map(|d| (0..g.node_count()).map(|v| tg.token(v, d).to_string()).sorted().collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn token_multisets_survive_every_permutation(g in small_graph(6, false)) {
        let mut t = WlTokenizer::new(options(false));
        let reference = multisets(&mut t, &g);
        for perm in (0..g.node_count()).permutations(g.node_count()) {
            prop_assert_eq!(&multisets(&mut t, &g.permuted(&perm)), &reference);
        }
    }

    #[test]
    fn edge_labeled_tokens_survive_permutation(g in small_graph(5, true)) {
        let mut t = WlTokenizer::new(options(true));
        let reference = multisets(&mut t, &g);
        for perm in (0..g.node_count()).permutations(g.node_count()) {
            prop_assert_eq!(&multisets(&mut t, &g.permuted(&perm)), &reference);
        }
    }

    /// Two (node, degree) sites share an iterative token exactly when they
    /// share the fully expanded recursive form, across a whole batch.
    #[test]
    fn iterative_and_recursive_classes_coincide(
        graphs in prop::collection::vec(small_graph(6, false), 1..6),
        edge_labels in any::<bool>(),
    ) {
        let mut t = WlTokenizer::new(options(edge_labels));
        let mut forward: HashMap<String, String> = HashMap::new();
        let mut backward: HashMap<String, String> = HashMap::new();
        for g in &graphs {
            let tg = t.tokenize(g);
            for v in 0..g.node_count() {
                for d in 0..=D {
                    let iterative = tg.token(v, d).to_string();
                    let recursive = get_wl_subgraph_with(v, g, d, edge_labels).unwrap();
                    if d <= 1 {
                        prop_assert_eq!(&iterative, &recursive);
                    }
                    let f = forward.entry(iterative.clone()).or_insert_with(|| recursive.clone());
                    prop_assert_eq!(&*f, &recursive);
                    let b = backward.entry(recursive).or_insert(iterative);
                    prop_assert_eq!(&*b, tg.token(v, d));
                }
            }
        }
    }

    #[test]
    fn labels_cannot_forge_structure(labels in prop::collection::vec("[ab(),#:\\\\]{0,4}", 2)) {
        let a = common::graph(&[labels[0].as_str()], &[]);
        let b = common::graph(&[labels[1].as_str()], &[]);
        let mut t = WlTokenizer::new(options(false));
        let (ta, tb) = (t.tokenize(&a), t.tokenize(&b));
        for d in 0..=D {
            prop_assert_eq!(ta.token(0, d) == tb.token(0, d), labels[0] == labels[1]);
        }
        prop_assert_eq!(escape_label(&labels[0]) == escape_label(&labels[1]), labels[0] == labels[1]);
    }

    /// Growing a corpus keeps every earlier token, id and string, and never
    /// lowers a frequency.
    #[test]
    fn vocabulary_grows_monotonically(graphs in prop::collection::vec(small_graph(6, false), 2..8), cut in 1usize..7) {
        let cut = cut.min(graphs.len() - 1);
        let full = GraphCorpus::new("full", graphs.clone()).unwrap();
        let prefix = GraphCorpus::new("prefix", graphs[..cut].to_vec()).unwrap();
        let small = PreparedCorpus::new(&prefix, options(false), 1).unwrap();
        let large = PreparedCorpus::new(&full, options(false), 1).unwrap();
        prop_assert!(small.vocabulary.len() <= large.vocabulary.len());
        for tok in small.vocabulary.tokens() {
            let id = large.vocabulary.id_of(&tok.canonical);
            prop_assert_eq!(id, Some(tok.token_id));
            prop_assert!(large.vocabulary.get(tok.token_id).unwrap().frequency >= tok.frequency);
        }
        for (a, b) in small.documents.iter().zip(&large.documents) {
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn exhaustive_three_node_graphs_split_as_expected() {
    // all labeled graphs on 3 nodes with labels {x, y}: recursive forms of
    // isomorphic graphs agree, so the number of distinct token multisets
    // equals the number of isomorphism classes WL separates
    let mut t = WlTokenizer::new(options(false));
    let mut classes: HashMap<Vec<Vec<String>>, usize> = HashMap::new();
    for labels in (0..3).map(|_| ["x", "y"]).multi_cartesian_product() {
        for mask in 0u8..8 {
            let edges: Vec<(usize, usize)> = [(0, 1), (0, 2), (1, 2)]
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| e)
                .collect();
            let g = common::graph(&labels, &edges);
            *classes.entry(multisets(&mut t, &g)).or_default() += 1;
        }
    }
    // 4 label multisets; edge patterns per multiset up to isomorphism:
    // xxx/yyy: 4 each (0, 1, 2, 3 edges); xxy/xyy: 6 each
    assert_eq!(classes.len(), 20);
}
