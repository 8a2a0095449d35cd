use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use graphvec::eval::{self, L2_GRID};
use graphvec::persist::{self, ModelFile};
use graphvec::vocab::to_document;
use graphvec::{GraphCorpus, Matrix, PreparedCorpus, Scalar, TrainConfig, WlOptions};
use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::*;

pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const MODEL_FILE: &str = "model.gv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to repeat a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub graphvec_version: String,
    pub input: PathBuf,
    pub format: FormatArg,
    pub precision: Precision,
    pub config: TrainConfig,
    pub vocabulary_hash: String,
    pub vocabulary_size: usize,
    pub n_graphs: usize,
    pub embeddings: PathBuf,
    pub model: PathBuf,
}

fn load(input: &Path, format: FormatArg) -> Result<GraphCorpus> {
    let corpus = graphvec::load_dataset(input, format.into())?;
    info!(
        "loaded {} graphs from {} (mean {:.2} nodes, {} distinct labels)",
        corpus.len(),
        input.display(),
        corpus.mean_node_count(),
        corpus.distinct_node_labels()
    );
    Ok(corpus)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn print_json(value: &Value) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn vocab(args: &VocabArgs) -> Result<()> {
    let format = args.data.resolved_format();
    let corpus = load(&args.data.input, format)?;
    let options = WlOptions {
        max_degree: args.tokens.wl_degree,
        edge_labels: args.tokens.edge_labels,
    };
    let prepared = PreparedCorpus::new(&corpus, options, args.tokens.min_count)?;
    info!("vocabulary has {} tokens", prepared.vocabulary.len());
    match &args.output {
        Some(path) => {
            let mut out = create(path)?;
            prepared.vocabulary.write_tsv(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            prepared.vocabulary.write_tsv(&mut out)?;
        }
    }
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let (input, format, precision, config, out_dir) = match &args.from_manifest {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let m: Manifest = serde_json::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))?;
            let out_dir = match &args.output {
                Some(dir) => dir.clone(),
                None => m.embeddings.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            (m.input, m.format, m.precision, m.config, out_dir)
        }
        None => {
            let input = args.input.clone().expect("clap enforces --input");
            let format = args.format.unwrap_or(if input.is_dir() { FormatArg::Tu } else { FormatArg::Jsonl });
            let out_dir = args.output.clone().expect("clap enforces --output");
            (input, format, args.precision, args.config(), out_dir)
        }
    };
    config.validate()?;

    let corpus = load(&input, format)?;
    let prepared = PreparedCorpus::new(&corpus, config.wl_options(), config.min_count)?;
    info!(
        "vocabulary has {} tokens, {} compressed forms",
        prepared.vocabulary.len(),
        prepared.tokenizer.compressed_len()
    );
    fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;

    let manifest = Manifest {
        graphvec_version: env!("CARGO_PKG_VERSION").to_string(),
        input: input.clone(),
        format,
        precision,
        vocabulary_hash: persist::vocabulary_hash(&corpus, config.wl_options(), config.min_count),
        vocabulary_size: prepared.vocabulary.len(),
        n_graphs: corpus.len(),
        embeddings: out_dir.join(EMBEDDINGS_FILE),
        model: out_dir.join(MODEL_FILE),
        config,
    };
    match precision {
        Precision::F32 => train_and_write::<f32>(&corpus, prepared, &manifest)?,
        Precision::F64 => train_and_write::<f64>(&corpus, prepared, &manifest)?,
    }
    let mut out = create(&out_dir.join(MANIFEST_FILE))?;
    serde_json::to_writer_pretty(&mut out, &manifest)?;
    writeln!(out)?;
    out.flush()?;
    info!("wrote {}", out_dir.display());
    Ok(())
}

fn train_and_write<S: Scalar>(corpus: &GraphCorpus, prepared: PreparedCorpus, manifest: &Manifest) -> Result<()> {
    let config = &manifest.config;
    let model = graphvec::trainer::train_observed::<S>(&prepared.documents, &prepared.vocabulary, config, |s| {
        debug!("epoch {} loss {:.6} lr {:.6}", s.epoch, s.mean_loss, s.learning_rate);
        if (s.epoch + 1) % 10 == 0 || s.epoch + 1 == config.epochs {
            info!("epoch {}/{} mean loss {:.5}", s.epoch + 1, config.epochs, s.mean_loss);
        }
    })?;

    let mut out = create(&manifest.embeddings)?;
    persist::write_embeddings(&model.graph_vectors, &mut out)?;
    out.flush()?;

    let file = ModelFile {
        model,
        metadata: persist::ModelMetadata {
            corpus_name: corpus.name.clone(),
            config: config.clone(),
            class_labels: corpus.class_labels(),
            vocabulary: prepared.vocabulary,
            tokenizer: prepared.tokenizer,
        },
    };
    file.write(&manifest.model)?;
    Ok(())
}

/// Reads a model file of either precision, widening vectors to `f64`.
fn read_model(path: &Path) -> Result<(Matrix<f64>, persist::ModelMetadata)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(match persist::scalar_width(&bytes, path)? {
        4 => {
            let f = ModelFile::<f32>::from_bytes(&bytes, path)?;
            (f.model.graph_vectors.cast(), f.metadata)
        }
        _ => {
            let f = ModelFile::<f64>::from_bytes(&bytes, path)?;
            (f.model.graph_vectors, f.metadata)
        }
    })
}

struct Vectors {
    matrix: Matrix<f64>,
    labels: Option<Vec<i64>>,
    description: Value,
}

fn source_vectors(source: &SourceArgs) -> Result<Vectors> {
    let dataset = match &source.input {
        Some(input) => {
            let format = source.format.unwrap_or(if input.is_dir() { FormatArg::Tu } else { FormatArg::Jsonl });
            Some(load(input, format)?)
        }
        None => None,
    };
    if let Some(path) = &source.model {
        let (matrix, meta) = read_model(path)?;
        let labels = match &dataset {
            Some(corpus) => corpus.class_labels(),
            None => meta.class_labels,
        };
        return Ok(Vectors {
            description: json!({"kind": "model", "path": path, "dimensions": matrix.cols()}),
            matrix,
            labels,
        });
    }
    let corpus = dataset.as_ref();
    if let Some(path) = &source.embeddings {
        let matrix = persist::read_embeddings::<f64>(path)?;
        let corpus = corpus.expect("clap enforces --input");
        if corpus.len() != matrix.rows() {
            bail!(graphvec::Error::Argument(format!(
                "{} has {} vectors but the dataset has {} graphs",
                path.display(),
                matrix.rows(),
                corpus.len()
            )));
        }
        return Ok(Vectors {
            description: json!({"kind": "embeddings", "path": path, "dimensions": matrix.cols()}),
            matrix,
            labels: corpus.class_labels(),
        });
    }
    if source.wl_features {
        let corpus = corpus.expect("clap enforces --input");
        let options = WlOptions {
            max_degree: source.wl_degree,
            edge_labels: false,
        };
        let prepared = PreparedCorpus::new(corpus, options, 1)?;
        let matrix = eval::wl_feature_vectors(&prepared.documents, &prepared.vocabulary).to_dense();
        return Ok(Vectors {
            description: json!({"kind": "wl_features", "wl_degree": source.wl_degree, "dimensions": matrix.cols()}),
            matrix,
            labels: corpus.class_labels(),
        });
    }
    bail!(graphvec::Error::Argument(
        "one of --model, --embeddings or --wl-features is required".into()
    ))
}

fn require_labels(v: &Vectors) -> Result<Vec<i64>> {
    match &v.labels {
        Some(l) => Ok(l.clone()),
        None => bail!(graphvec::Error::Argument("the corpus has no class labels".into())),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let vectors = source_vectors(&args.source)?;
    let labels = require_labels(&vectors)?;
    let report = eval::classify(&vectors.matrix, &labels, &args.split())?;
    info!("accuracy {:.4} +- {:.4}", report.mean, report.std);
    print_json(&json!({
        "metric": "accuracy",
        "mean": report.mean,
        "std": report.std,
        "repeats": args.repeats,
        "config": {
            "source": vectors.description,
            "n_graphs": vectors.matrix.rows(),
            "train_fraction": args.train_fraction,
            "seed": args.seed,
            "l2_grid": L2_GRID,
            "cv_folds": eval::CV_FOLDS,
        },
        "accuracies": report.accuracies,
        "chosen_l2": report.chosen_l2,
    }))
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let vectors = source_vectors(&args.source)?;
    let labels = require_labels(&vectors)?;
    let (_, classes) = eval::dense_labels(&labels);
    let k = args.k.unwrap_or(classes.len());
    if args.repeats == 0 {
        bail!(graphvec::Error::Argument("repeats must be at least 1".into()));
    }
    let mut scores = Vec::with_capacity(args.repeats);
    let mut inertias = Vec::with_capacity(args.repeats);
    for r in 0..args.repeats {
        let seed = graphvec::rng::derive_seed(args.seed, graphvec::rng::Stream::KMeans, r as u64);
        let result = eval::kmeans(&vectors.matrix, k, seed)?;
        if result.iterations >= eval::MAX_LLOYD_ITERATIONS {
            warn!("restart {r} stopped at the iteration cap");
        }
        scores.push(eval::adjusted_rand_index(&result.assignments, &labels)?);
        inertias.push(result.inertia);
    }
    let (mean, std) = mean_std(&scores);
    info!("ARI {mean:.4} +- {std:.4}");
    print_json(&json!({
        "metric": "ari",
        "mean": mean,
        "std": std,
        "repeats": args.repeats,
        "config": {
            "source": vectors.description,
            "n_graphs": vectors.matrix.rows(),
            "k": k,
            "seed": args.seed,
        },
        "scores": scores,
        "inertia": inertias,
    }))
}

pub fn similar(args: &SimilarArgs) -> Result<()> {
    let vectors = source_vectors(&args.source)?;
    if args.query >= vectors.matrix.rows() {
        bail!(graphvec::Error::Argument(format!(
            "query {} out of range for {} graphs",
            args.query,
            vectors.matrix.rows()
        )));
    }
    let ranked = eval::nearest_neighbors(&vectors.matrix, args.query, args.top_n)?;
    let neighbors: Vec<Value> = ranked
        .iter()
        .map(|&(id, cos)| json!({"graph_id": id, "cosine": cos}))
        .collect();
    print_json(&json!({
        "query": args.query,
        "top_n": args.top_n,
        "source": vectors.description,
        "neighbors": neighbors,
    }))
}

pub fn infer(args: &InferArgs) -> Result<()> {
    let bytes = fs::read(&args.model).with_context(|| format!("cannot read {}", args.model.display()))?;
    let corpus = load(&args.data.input, args.data.resolved_format())?;
    let (rows, known) = match persist::scalar_width(&bytes, &args.model)? {
        4 => infer_with(ModelFile::<f32>::from_bytes(&bytes, &args.model)?, &corpus, args)?,
        _ => infer_with(ModelFile::<f64>::from_bytes(&bytes, &args.model)?, &corpus, args)?,
    };
    if let Some(path) = &args.output {
        let mut out = create(path)?;
        persist::write_embeddings(&rows, &mut out)?;
        out.flush()?;
    }
    let graphs: Vec<Value> = rows
        .iter_rows()
        .zip(&known)
        .enumerate()
        .map(|(id, (v, &(hit, total)))| {
            json!({"graph_id": id, "known_tokens": hit, "total_tokens": total, "vector": v})
        })
        .collect();
    print_json(&json!({
        "model": args.model,
        "dimensions": rows.cols(),
        "graphs": graphs,
    }))
}

/// Inferred vectors and `(known, total)` token counts per graph.
type Inferred = (Matrix<f64>, Vec<(usize, usize)>);

fn infer_with<S: Scalar>(file: ModelFile<S>, corpus: &GraphCorpus, args: &InferArgs) -> Result<Inferred> {
    let meta = file.metadata;
    let mut config = meta.config.clone();
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    if let Some(lr) = args.lr {
        config.learning_rate = lr;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    // extending a copy of the table keeps tokens of known subgraphs identical
    let mut tokenizer = meta.tokenizer.clone();
    let mut rows = Matrix::zeros(corpus.len(), file.model.dimensions());
    let mut known = Vec::with_capacity(corpus.len());
    for graph in corpus.graphs() {
        let tokens = tokenizer.tokenize(graph);
        let doc = to_document(&tokens, &meta.vocabulary);
        known.push((doc.len(), tokens.tokens.len()));
        let v = graphvec::infer_new_graph(&file.model, &meta.vocabulary, &doc, &config)
            .with_context(|| format!("graph {}", graph.graph_id))?;
        for (dst, x) in rows.row_mut(graph.graph_id).iter_mut().zip(v) {
            *dst = x.to_f64_lossy();
        }
    }
    Ok((rows, known))
}
