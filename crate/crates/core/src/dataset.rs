//! Corpus ingestion: TU benchmark directories and JSON-lines files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, GraphCorpus};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Tu,
    Jsonl,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tu" => Ok(DatasetFormat::Tu),
            "jsonl" => Ok(DatasetFormat::Jsonl),
            other => Err(Error::Argument(format!("unknown dataset format {other:?}"))),
        }
    }
}

/// Loads a corpus in either format. For TU, `path` is the dataset directory
/// and the dataset name is its final path component.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<GraphCorpus> {
    match format {
        DatasetFormat::Tu => {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::format(path, None, "cannot derive dataset name from path"))?;
            parse_tu_dataset(path, name)
        }
        DatasetFormat::Jsonl => parse_jsonl_dataset(path),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::format(path, None, "missing file"),
        _ => Error::io(path, e),
    })?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line.map_err(|e| Error::io(path, e))?);
    }
    // trailing blank lines are common in the published archives
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

fn read_optional_lines(path: &Path) -> Result<Option<Vec<String>>> {
    if path.exists() {
        read_lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_int<T: std::str::FromStr>(path: &Path, line_no: usize, field: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::format(path, Some(line_no), format!("expected an integer, found {:?}", field.trim())))
}

/// Reads a TU benchmark dataset (`<name>_A.txt`, `<name>_graph_indicator.txt`,
/// and the optional node, edge and graph label files) from `dir`.
pub fn parse_tu_dataset(dir: &Path, name: &str) -> Result<GraphCorpus> {
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}.txt")) };
    if !dir.is_dir() {
        return Err(Error::format(dir, None, "dataset directory does not exist"));
    }

    let indicator_path = file("graph_indicator");
    let indicator: Vec<usize> = read_lines(&indicator_path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_int(&indicator_path, i + 1, l))
        .collect::<Result<_>>()?;
    let n_graphs = indicator.iter().copied().max().unwrap_or(0);
    if n_graphs == 0 || indicator.contains(&0) {
        return Err(Error::format(&indicator_path, None, "graph ids must be 1-based and nonempty"));
    }

    // global node -> (graph index, local index)
    let mut local = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; n_graphs];
    for &g in &indicator {
        local.push((g - 1, sizes[g - 1]));
        sizes[g - 1] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::format(&indicator_path, None, format!("graph {} has no nodes", empty + 1)));
    }

    let node_labels_path = file("node_labels");
    let node_labels = read_optional_lines(&node_labels_path)?;
    if let Some(labels) = &node_labels {
        if labels.len() != indicator.len() {
            return Err(Error::format(
                &node_labels_path,
                None,
                format!("{} labels for {} nodes", labels.len(), indicator.len()),
            ));
        }
    }

    let graph_labels_path = file("graph_labels");
    let graph_labels: Option<Vec<i64>> = read_optional_lines(&graph_labels_path)?
        .map(|lines| {
            lines
                .iter()
                .enumerate()
                .map(|(i, l)| parse_int(&graph_labels_path, i + 1, l))
                .collect::<Result<Vec<i64>>>()
        })
        .transpose()?;
    if let Some(labels) = &graph_labels {
        if labels.len() != n_graphs {
            return Err(Error::format(
                &graph_labels_path,
                None,
                format!("{} labels for {} graphs", labels.len(), n_graphs),
            ));
        }
    }

    let edges_path = file("A");
    let edge_lines = read_lines(&edges_path)?;
    let edge_labels_path = file("edge_labels");
    let edge_labels = read_optional_lines(&edge_labels_path)?;
    if let Some(labels) = &edge_labels {
        if labels.len() != edge_lines.len() {
            return Err(Error::format(
                &edge_labels_path,
                None,
                format!("{} labels for {} edges", labels.len(), edge_lines.len()),
            ));
        }
    }

    let mut builders: Vec<GraphBuilder> = sizes.iter().map(|&s| GraphBuilder::new(s)).collect();
    for (i, line) in edge_lines.iter().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(&edges_path, Some(line_no), "expected \"i, j\""));
        };
        let a: usize = parse_int(&edges_path, line_no, a)?;
        let b: usize = parse_int(&edges_path, line_no, b)?;
        let lookup = |node: usize| {
            node.checked_sub(1)
                .and_then(|n| local.get(n))
                .copied()
                .ok_or_else(|| Error::format(&edges_path, Some(line_no), format!("node {node} does not exist")))
        };
        let (ga, la) = lookup(a)?;
        let (gb, lb) = lookup(b)?;
        if ga != gb {
            return Err(Error::format(
                &edges_path,
                Some(line_no),
                format!("edge {a}-{b} joins graph {} and graph {}", ga + 1, gb + 1),
            ));
        }
        let label = edge_labels.as_ref().map(|l| l[i].trim().to_string());
        builders[ga].add_edge(la, lb, label);
    }

    let mut per_graph_labels: Option<Vec<Vec<String>>> = node_labels.map(|labels| {
        let mut out: Vec<Vec<String>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (node, label) in labels.into_iter().enumerate() {
            out[local[node].0].push(label.trim().to_string());
        }
        out
    });

    let mut dropped = 0;
    let graphs: Vec<Graph> = builders
        .into_iter()
        .enumerate()
        .map(|(g, b)| {
            dropped += b.dropped_edges;
            let labels = per_graph_labels.as_mut().map(|l| std::mem::take(&mut l[g]));
            b.build(g, labels, graph_labels.as_ref().map(|l| l[g]))
        })
        .collect();
    log::debug!("{name}: {} graphs loaded ({dropped} duplicate or self-loop edge lines dropped)", graphs.len());

    Ok(GraphCorpus::new(name, graphs).expect("at least one graph"))
}

/// One line of a JSON-lines corpus.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<i64>,
}

impl GraphRecord {
    pub fn from_graph(graph: &Graph) -> Self {
        let edges = graph.edges();
        let edge_labels = graph.has_edge_labels().then(|| {
            edges
                .iter()
                .map(|&(u, v)| {
                    let k = graph.neighbors(u).binary_search(&v).expect("edge present");
                    graph.edge_labels(u).expect("labeled")[k].clone()
                })
                .collect()
        });
        GraphRecord {
            edges,
            node_labels: Some(graph.node_labels().to_vec()),
            edge_labels,
            node_count: Some(graph.node_count()),
            class: graph.class_label,
        }
    }

    /// Builds the normalized graph; `Err` carries a message without location.
    pub fn into_graph(self, graph_id: usize) -> std::result::Result<Graph, String> {
        let implied = self.edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = match (&self.node_labels, self.node_count) {
            (Some(labels), Some(count)) if labels.len() != count => {
                return Err(format!("node_count {count} but {} node labels", labels.len()))
            }
            (Some(labels), _) => labels.len(),
            (None, Some(count)) => count,
            (None, None) => implied,
        };
        if n == 0 {
            return Err("graph has no nodes".into());
        }
        if implied > n {
            return Err(format!("edge references node {} but graph has {n} nodes", implied - 1));
        }
        if let Some(labels) = &self.edge_labels {
            if labels.len() != self.edges.len() {
                return Err(format!("{} edge labels for {} edges", labels.len(), self.edges.len()));
            }
        }
        let mut builder = GraphBuilder::new(n);
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            builder.add_edge(u, v, self.edge_labels.as_ref().map(|l| l[i].clone()));
        }
        if builder.dropped_edges > 0 {
            warn!("graph {graph_id}: dropped {} self-loop or duplicate edges", builder.dropped_edges);
        }
        Ok(builder.build(graph_id, self.node_labels, self.class))
    }
}

/// Reads a JSON-lines corpus: one [`GraphRecord`] per nonblank line.
pub fn parse_jsonl_dataset(path: &Path) -> Result<GraphCorpus> {
    let lines = read_lines(path)?;
    let mut graphs = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: GraphRecord =
            serde_json::from_str(line).map_err(|e| Error::format(path, Some(i + 1), e.to_string()))?;
        let graph = record
            .into_graph(graphs.len())
            .map_err(|msg| Error::format(path, Some(i + 1), msg))?;
        graphs.push(graph);
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string();
    GraphCorpus::new(name, graphs).ok_or_else(|| Error::format(path, None, "no graphs in file"))
}

/// Writes a corpus as JSON lines, readable by [`parse_jsonl_dataset`].
pub fn write_jsonl(corpus: &GraphCorpus, out: &mut impl Write) -> std::io::Result<()> {
    for graph in corpus.graphs() {
        serde_json::to_writer(&mut *out, &GraphRecord::from_graph(graph))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
