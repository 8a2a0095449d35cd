//! Weisfeiler-Lehman rooted-subgraph tokens.
//!
//! A degree-0 token is the (escaped) node label. A degree-`d` token is the
//! node's degree-`(d-1)` form followed by the byte-sorted degree-`(d-1)` forms
//! of its neighbors, `own(child,child,...)`. The recursive extraction
//! [`get_wl_subgraph`] expands every nested form in full. [`WlTokenizer`]
//! produces the same equality classes in `O(D * |E|)` by replacing each
//! degree-`d` form (`d >= 1`) with `#<id>` from a corpus-wide compression
//! table before it is nested again.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCorpus};

/// Escapes the characters that carry structure in canonical strings, so raw
/// labels can never imitate delimiters or compressed ids.
pub fn escape_label(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for ch in label.chars() {
        match ch {
            '\\' | '(' | ')' | ',' | '#' | ':' => {
                out.push('\\');
                out.push(ch);
            }
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(ch),
        }
    }
    out
}

/// Options shared by both extraction routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WlOptions {
    /// Largest rooted-subgraph degree `D`; tokens are produced for `0..=D`.
    pub max_degree: usize,
    /// Fold edge labels into each child's sort key as `edgelabel:child`.
    pub edge_labels: bool,
}

impl Default for WlOptions {
    fn default() -> Self {
        WlOptions {
            max_degree: 3,
            edge_labels: false,
        }
    }
}

fn child_key(graph: &Graph, node: usize, slot: usize, child_form: &str, edge_labels: bool) -> String {
    match graph.edge_labels(node).filter(|_| edge_labels) {
        Some(labels) => format!("{}:{}", escape_label(&labels[slot]), child_form),
        None => child_form.to_string(),
    }
}

fn join_canonical(own: &str, mut children: Vec<String>) -> String {
    children.sort_unstable();
    let mut out = String::with_capacity(own.len() + 2 + children.iter().map(|c| c.len() + 1).sum::<usize>());
    out.push_str(own);
    out.push('(');
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(c);
    }
    out.push(')');
    out
}

/// Fully expanded rooted subgraph of degree `d` around `root`, computed by
/// direct recursion. Cost grows with the number of walks of length `d`, so
/// this is meant for small graphs and as a reference for [`WlTokenizer`].
pub fn get_wl_subgraph(root: usize, graph: &Graph, d: usize) -> Result<String> {
    get_wl_subgraph_with(root, graph, d, false)
}

/// [`get_wl_subgraph`] with optional edge-label folding.
pub fn get_wl_subgraph_with(root: usize, graph: &Graph, d: usize, edge_labels: bool) -> Result<String> {
    if root >= graph.node_count() {
        return Err(Error::Argument(format!(
            "root {root} out of range for a graph with {} nodes",
            graph.node_count()
        )));
    }
    Ok(expand(root, graph, d, edge_labels))
}

fn expand(node: usize, graph: &Graph, d: usize, edge_labels: bool) -> String {
    if d == 0 {
        return escape_label(graph.label(node));
    }
    let children = graph
        .neighbors(node)
        .iter()
        .enumerate()
        .map(|(slot, &nb)| child_key(graph, node, slot, &expand(nb, graph, d - 1, edge_labels), edge_labels))
        .collect();
    join_canonical(&expand(node, graph, d - 1, edge_labels), children)
}

/// Canonical token strings of one graph, node-major then degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedGraph {
    pub graph_id: usize,
    pub max_degree: usize,
    pub tokens: Vec<String>,
}

impl TokenizedGraph {
    pub fn token(&self, node: usize, d: usize) -> &str {
        &self.tokens[node * (self.max_degree + 1) + d]
    }

    /// `(degree, token)` pairs in document order.
    pub fn iter_with_degree(&self) -> impl Iterator<Item = (usize, &str)> {
        let width = self.max_degree + 1;
        self.tokens.iter().enumerate().map(move |(i, t)| (i % width, t.as_str()))
    }
}

/// Iterative WL relabeling with a compression table shared across every graph
/// it tokenizes. Tokenizing graphs in a fixed order yields fixed strings;
/// appending new graphs later never changes strings already issued.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TokenizerState", into = "TokenizerState")]
pub struct WlTokenizer {
    options: WlOptions,
    forms: Vec<String>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct TokenizerState {
    options: WlOptions,
    forms: Vec<String>,
}

impl From<TokenizerState> for WlTokenizer {
    fn from(state: TokenizerState) -> Self {
        let index = state
            .forms
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
        WlTokenizer {
            options: state.options,
            forms: state.forms,
            index,
        }
    }
}

impl From<WlTokenizer> for TokenizerState {
    fn from(t: WlTokenizer) -> Self {
        TokenizerState {
            options: t.options,
            forms: t.forms,
        }
    }
}

impl WlTokenizer {
    pub fn new(options: WlOptions) -> Self {
        WlTokenizer {
            options,
            ..Default::default()
        }
    }

    pub fn options(&self) -> WlOptions {
        self.options
    }

    /// Number of distinct compressed forms issued so far.
    pub fn compressed_len(&self) -> usize {
        self.forms.len()
    }

    fn compress(&mut self, form: &str) -> u32 {
        if let Some(&id) = self.index.get(form) {
            return id;
        }
        let id = u32::try_from(self.forms.len()).expect("compression table overflow");
        self.forms.push(form.to_string());
        self.index.insert(form.to_string(), id);
        id
    }

    /// Returns `node_count * (D + 1)` canonical strings in (node, degree)
    /// order.
    pub fn extract_all_tokens(&mut self, graph: &Graph) -> Vec<String> {
        let n = graph.node_count();
        let width = self.options.max_degree + 1;
        let mut tokens = vec![String::new(); n * width];
        // current degree-(d-1) representation of every node
        let mut current: Vec<String> = graph.node_labels().iter().map(|l| escape_label(l)).collect();
        for (node, rep) in current.iter().enumerate() {
            tokens[node * width] = rep.clone();
        }
        for d in 1..width {
            let mut next = Vec::with_capacity(n);
            for node in 0..n {
                let children = graph
                    .neighbors(node)
                    .iter()
                    .enumerate()
                    .map(|(slot, &nb)| child_key(graph, node, slot, &current[nb], self.options.edge_labels))
                    .collect();
                let form = join_canonical(&current[node], children);
                next.push(format!("#{}", self.compress(&form)));
                tokens[node * width + d] = form;
            }
            current = next;
        }
        tokens
    }

    pub fn tokenize(&mut self, graph: &Graph) -> TokenizedGraph {
        TokenizedGraph {
            graph_id: graph.graph_id,
            max_degree: self.options.max_degree,
            tokens: self.extract_all_tokens(graph),
        }
    }

    pub fn tokenize_corpus(&mut self, corpus: &GraphCorpus) -> Vec<TokenizedGraph> {
        corpus.graphs().iter().map(|g| self.tokenize(g)).collect()
    }
}
