//! Undirected node-labeled graphs and corpora of them.

use serde::{Deserialize, Serialize};

/// An undirected graph with string node labels.
///
/// Nodes are dense indices `0..node_count()`. Each adjacency list is sorted
/// ascending, symmetric, and free of self-loops and duplicates. When edge
/// labels are present they are stored parallel to the adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub graph_id: usize,
    adjacency: Vec<Vec<usize>>,
    node_labels: Vec<String>,
    edge_labels: Option<Vec<Vec<String>>>,
    pub class_label: Option<i64>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn label(&self, node: usize) -> &str {
        &self.node_labels[node]
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    /// Edge labels of `node`'s incident edges, aligned with [`Graph::neighbors`].
    pub fn edge_labels(&self, node: usize) -> Option<&[String]> {
        self.edge_labels.as_ref().map(|e| e[node].as_slice())
    }

    pub fn has_edge_labels(&self) -> bool {
        self.edge_labels.is_some()
    }

    /// Undirected edge list `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Returns a copy with nodes renumbered so that old node `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.node_count(), "permutation length");
        let n = self.node_count();
        let mut adjacency = vec![Vec::new(); n];
        let mut node_labels = vec![String::new(); n];
        let mut edge_labels = self.edge_labels.as_ref().map(|_| vec![Vec::new(); n]);
        for old in 0..n {
            let new = perm[old];
            node_labels[new] = self.node_labels[old].clone();
            let mut row: Vec<(usize, Option<String>)> = self.adjacency[old]
                .iter()
                .enumerate()
                .map(|(k, &nb)| {
                    let lab = self.edge_labels.as_ref().map(|e| e[old][k].clone());
                    (perm[nb], lab)
                })
                .collect();
            row.sort_by_key(|(nb, _)| *nb);
            adjacency[new] = row.iter().map(|(nb, _)| *nb).collect();
            if let Some(el) = edge_labels.as_mut() {
                el[new] = row.into_iter().map(|(_, l)| l.unwrap_or_default()).collect();
            }
        }
        Graph {
            graph_id: self.graph_id,
            adjacency,
            node_labels,
            edge_labels,
            class_label: self.class_label,
        }
    }

    /// Checks every structural invariant; used by tests and loaders.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.node_count();
        if n == 0 {
            return Err("graph has no nodes".into());
        }
        if self.node_labels.len() != n {
            return Err("node label count differs from node count".into());
        }
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for w in nbrs.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of node {u} not strictly sorted"));
                }
            }
            for &v in nbrs {
                if v >= n {
                    return Err(format!("node {u} has neighbor {v} out of range"));
                }
                if v == u {
                    return Err(format!("self-loop on node {u}"));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(format!("edge {u}-{v} is not symmetric"));
                }
            }
            if let Some(el) = &self.edge_labels {
                if el[u].len() != nbrs.len() {
                    return Err(format!("edge labels of node {u} misaligned"));
                }
            }
        }
        Ok(())
    }
}

/// Labels every node with the decimal string of its degree. Structure is
/// left untouched.
pub fn relabel_by_degree(graph: &Graph) -> Graph {
    let mut out = graph.clone();
    out.node_labels = graph.adjacency.iter().map(|a| a.len().to_string()).collect();
    out
}

/// Accumulates edges for one graph, normalizing as it goes.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    adjacency: Vec<Vec<(usize, Option<String>)>>,
    /// Self-loops and repeated edges that were dropped.
    pub dropped_edges: usize,
    labeled_edges: bool,
}

impl GraphBuilder {
    pub fn new(node_count: usize) -> Self {
        GraphBuilder {
            adjacency: vec![Vec::new(); node_count],
            dropped_edges: 0,
            labeled_edges: false,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an undirected edge. Returns `false` if it was a self-loop or
    /// already present. Panics on out-of-range nodes; loaders check first.
    pub fn add_edge(&mut self, u: usize, v: usize, label: Option<String>) -> bool {
        assert!(u < self.adjacency.len() && v < self.adjacency.len(), "node out of range");
        if u == v || self.adjacency[u].iter().any(|(nb, _)| *nb == v) {
            self.dropped_edges += 1;
            return false;
        }
        self.labeled_edges |= label.is_some();
        self.adjacency[u].push((v, label.clone()));
        self.adjacency[v].push((u, label));
        true
    }

    /// Finishes the graph. Without node labels, nodes are labeled by degree.
    pub fn build(self, graph_id: usize, node_labels: Option<Vec<String>>, class_label: Option<i64>) -> Graph {
        let labeled_edges = self.labeled_edges;
        let mut adjacency = Vec::with_capacity(self.adjacency.len());
        let mut edge_labels = Vec::with_capacity(self.adjacency.len());
        for mut row in self.adjacency {
            row.sort_by_key(|(nb, _)| *nb);
            adjacency.push(row.iter().map(|(nb, _)| *nb).collect::<Vec<_>>());
            edge_labels.push(row.into_iter().map(|(_, l)| l.unwrap_or_default()).collect());
        }
        let graph = Graph {
            graph_id,
            node_labels: Vec::new(),
            adjacency,
            edge_labels: labeled_edges.then_some(edge_labels),
            class_label,
        };
        match node_labels {
            Some(labels) => {
                assert_eq!(labels.len(), graph.node_count(), "one label per node");
                Graph {
                    node_labels: labels,
                    ..graph
                }
            }
            None => relabel_by_degree(&graph),
        }
    }
}

/// An ordered, nonempty collection of graphs; graph `i` has `graph_id == i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCorpus {
    pub name: String,
    graphs: Vec<Graph>,
}

impl GraphCorpus {
    /// Builds a corpus, renumbering `graph_id`s to match positions.
    /// Returns `None` for an empty list.
    pub fn new(name: impl Into<String>, mut graphs: Vec<Graph>) -> Option<Self> {
        if graphs.is_empty() {
            return None;
        }
        for (i, g) in graphs.iter_mut().enumerate() {
            g.graph_id = i;
        }
        Some(GraphCorpus {
            name: name.into(),
            graphs,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Graph> {
        self.graphs.get(id)
    }

    pub fn class_labels(&self) -> Option<Vec<i64>> {
        self.graphs.iter().map(|g| g.class_label).collect()
    }

    pub fn mean_node_count(&self) -> f64 {
        self.graphs.iter().map(Graph::node_count).sum::<usize>() as f64 / self.len() as f64
    }

    pub fn distinct_node_labels(&self) -> usize {
        self.graphs
            .iter()
            .flat_map(|g| g.node_labels.iter())
            .collect::<std::collections::HashSet<_>>()
            .len()
    }
}
