//! Corpus vocabulary of rooted-subgraph tokens and per-graph documents.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphCorpus;
use crate::wl::{TokenizedGraph, WlOptions, WlTokenizer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphToken {
    pub token_id: usize,
    pub canonical: String,
    pub degree: usize,
    pub frequency: u64,
}

/// Dense bijection between token ids and canonical strings, with corpus
/// frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<SubgraphToken>", into = "Vec<SubgraphToken>")]
pub struct Vocabulary {
    tokens: Vec<SubgraphToken>,
    index: HashMap<String, usize>,
    total_occurrences: u64,
}

impl From<Vec<SubgraphToken>> for Vocabulary {
    fn from(tokens: Vec<SubgraphToken>) -> Self {
        let index = tokens.iter().map(|t| (t.canonical.clone(), t.token_id)).collect();
        let total_occurrences = tokens.iter().map(|t| t.frequency).sum();
        Vocabulary {
            tokens,
            index,
            total_occurrences,
        }
    }
}

impl From<Vocabulary> for Vec<SubgraphToken> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    /// Counts every token occurrence, drops tokens seen fewer than
    /// `min_count` times and numbers the rest in first-occurrence order.
    pub fn build(graphs: &[TokenizedGraph], min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Argument("min_count must be at least 1".into()));
        }
        let mut order: Vec<(&str, usize)> = Vec::new();
        let mut counts: HashMap<&str, (usize, u64)> = HashMap::new();
        for graph in graphs {
            for (degree, token) in graph.iter_with_degree() {
                counts
                    .entry(token)
                    .or_insert_with(|| {
                        order.push((token, degree));
                        (order.len() - 1, 0)
                    })
                    .1 += 1;
            }
        }
        let mut tokens = Vec::new();
        for (token, degree) in order {
            let frequency = counts[token].1;
            if frequency >= min_count {
                tokens.push(SubgraphToken {
                    token_id: tokens.len(),
                    canonical: token.to_string(),
                    degree,
                    frequency,
                });
            }
        }
        if tokens.is_empty() {
            let max = counts.values().map(|c| c.1).max().unwrap_or(0);
            return Err(Error::Vocabulary(format!(
                "no token reaches min_count {min_count} (largest frequency is {max})"
            )));
        }
        Ok(Vocabulary::from(tokens))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[SubgraphToken] {
        &self.tokens
    }

    pub fn get(&self, id: usize) -> Option<&SubgraphToken> {
        self.tokens.get(id)
    }

    pub fn id_of(&self, canonical: &str) -> Option<usize> {
        self.index.get(canonical).copied()
    }

    /// Sum of frequencies of the retained tokens.
    pub fn total_occurrences(&self) -> u64 {
        self.total_occurrences
    }

    pub fn frequencies(&self) -> impl Iterator<Item = u64> + '_ {
        self.tokens.iter().map(|t| t.frequency)
    }

    /// `token_id \t frequency \t degree \t canonical_string`, one line per
    /// token.
    pub fn write_tsv(&self, out: &mut impl Write) -> std::io::Result<()> {
        for t in &self.tokens {
            writeln!(out, "{}\t{}\t{}\t{}", t.token_id, t.frequency, t.degree, t.canonical)?;
        }
        Ok(())
    }
}

/// A graph's context: its token ids in (node, degree) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub graph_id: usize,
    pub token_ids: Vec<usize>,
}

impl GraphDocument {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }

    /// Token counts as a sorted `(token_id, count)` list.
    pub fn counts(&self) -> Vec<(usize, u32)> {
        let mut ids = self.token_ids.clone();
        ids.sort_unstable();
        let mut out: Vec<(usize, u32)> = Vec::new();
        for id in ids {
            match out.last_mut() {
                Some((last, c)) if *last == id => *c += 1,
                _ => out.push((id, 1)),
            }
        }
        out
    }
}

/// Maps one tokenized graph onto vocabulary ids; tokens missing from the
/// vocabulary are skipped.
pub fn to_document(graph: &TokenizedGraph, vocab: &Vocabulary) -> GraphDocument {
    GraphDocument {
        graph_id: graph.graph_id,
        token_ids: graph.tokens.iter().filter_map(|t| vocab.id_of(t)).collect(),
    }
}

pub fn corpus_to_documents(graphs: &[TokenizedGraph], vocab: &Vocabulary) -> Vec<GraphDocument> {
    graphs.iter().map(|g| to_document(g, vocab)).collect()
}

/// Everything derived from a corpus before training: the tokenizer (whose
/// compression table is needed to tokenize unseen graphs consistently), the
/// vocabulary and the documents.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub tokenizer: WlTokenizer,
    pub vocabulary: Vocabulary,
    pub documents: Vec<GraphDocument>,
}

impl PreparedCorpus {
    pub fn new(corpus: &GraphCorpus, options: WlOptions, min_count: u64) -> Result<Self> {
        let mut tokenizer = WlTokenizer::new(options);
        let tokenized = tokenizer.tokenize_corpus(corpus);
        let vocabulary = Vocabulary::build(&tokenized, min_count)?;
        let documents = corpus_to_documents(&tokenized, &vocabulary);
        Ok(PreparedCorpus {
            tokenizer,
            vocabulary,
            documents,
        })
    }
}

/// Tokenizes `corpus` with `D = max_degree` and builds its vocabulary.
pub fn build_vocabulary(corpus: &GraphCorpus, max_degree: usize, min_count: u64) -> Result<Vocabulary> {
    let options = WlOptions {
        max_degree,
        edge_labels: false,
    };
    PreparedCorpus::new(corpus, options, min_count).map(|p| p.vocabulary)
}
