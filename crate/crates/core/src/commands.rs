//! Pipeline steps behind the `scnn` binary. Each writes its artifacts into a
//! directory and returns a summary; identical inputs and seed give
//! byte-identical CSV, dataset and checkpoint files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::checkpoint;
use crate::data::{
    dataset_stats, encode_example, preprocess, read_examples, read_sentiment140, split_train_dev,
    write_examples, Example, TokenCounts, Vocabulary, MAX_SEQ_LEN, VOCAB_CAPACITY,
};
use crate::error::{Error, Result};
use crate::model::{Architecture, Model, ModelConfig, Variant};
use crate::train::{evaluate, train, Evaluation, OptimizerKind, TrainConfig, TrainReport};
use crate::viz;

/// Environment variable consulted for the default data directory.
pub const DATA_DIR_ENV: &str = "SCNN_DATA_DIR";

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const TRAIN_FILE: &str = "train.bin";
pub const DEV_FILE: &str = "dev.bin";
pub const TEST_FILE: &str = "test.bin";

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(crate::model::hex(&Sha256::digest(&bytes)))
}

/// Flat `key=value` record of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => self.entries.push((key.to_owned(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
        Self { entries }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_text())
    }
}

// ---------------------------------------------------------------------------
// prepare

#[derive(Debug, Clone)]
pub struct PrepareOptions {
    pub train_csv: PathBuf,
    pub test_csv: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub vocab_capacity: usize,
    pub seq_len: usize,
}

impl PrepareOptions {
    pub fn new(train_csv: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            train_csv: train_csv.into(),
            test_csv: None,
            out_dir: out_dir.into(),
            seed: 0,
            vocab_capacity: VOCAB_CAPACITY,
            seq_len: MAX_SEQ_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepareSummary {
    pub rows: usize,
    pub malformed: usize,
    /// training rows per label before cleaning
    pub label_counts: [usize; 2],
    pub dropped_empty: usize,
    pub train: usize,
    pub dev: usize,
    pub vocab_size: usize,
    /// (negative, positive) after dropping neutral rows
    pub test_counts: Option<[usize; 2]>,
}

/// Loads a Sentiment140-format file and keeps rows with a binary label,
/// returning `(label, tokens)`.
pub fn load_labelled(path: &Path) -> Result<(crate::data::Corpus, Vec<(u8, Vec<String>)>)> {
    let corpus = read_sentiment140(path)?;
    let docs = corpus
        .tweets
        .iter()
        .filter_map(|t| t.label().map(|l| (l, preprocess(&t.text))))
        .collect();
    Ok((corpus, docs))
}

/// Parses, cleans, splits, builds the vocabulary from the training split only,
/// encodes, and writes the dataset files plus length histograms.
pub fn prepare(opts: &PrepareOptions) -> Result<PrepareSummary> {
    ensure_dir(&opts.out_dir)?;
    let (corpus, docs) = load_labelled(&opts.train_csv)?;
    let mut label_counts = [0usize; 2];
    for (l, _) in &docs {
        label_counts[usize::from(*l)] += 1;
    }
    let before = docs.len();
    let docs: Vec<(u8, Vec<String>)> = docs.into_iter().filter(|(_, t)| !t.is_empty()).collect();
    let dropped_empty = before - docs.len();
    if dropped_empty > 0 {
        log::info!("dropped {dropped_empty} training rows that were empty after cleaning");
    }

    let (train_docs, dev_docs) = split_train_dev(docs, opts.seed);
    let mut counts = TokenCounts::new();
    for (_, tokens) in &train_docs {
        counts.add(tokens);
    }
    let vocab = counts.into_vocabulary(opts.vocab_capacity)?;

    let encode_all = |docs: &[(u8, Vec<String>)]| -> Vec<Example> {
        docs.iter()
            .map(|(l, t)| encode_example(t, *l, &vocab, opts.seq_len))
            .collect()
    };
    let train_set = encode_all(&train_docs);
    let dev_set = encode_all(&dev_docs);

    let out = &opts.out_dir;
    vocab.write_tsv(out.join(VOCAB_FILE))?;
    write_examples(out.join(TRAIN_FILE), &train_set, opts.seq_len)?;
    write_examples(out.join(DEV_FILE), &dev_set, opts.seq_len)?;
    write_file(&out.join("length_hist_train.csv"), dataset_stats(&train_set).to_csv())?;
    write_file(&out.join("length_hist_dev.csv"), dataset_stats(&dev_set).to_csv())?;

    let mut test_counts = None;
    if let Some(test_csv) = &opts.test_csv {
        let (_, test_docs) = load_labelled(test_csv)?;
        let test_set = encode_all(&test_docs);
        let stats = dataset_stats(&test_set);
        write_examples(out.join(TEST_FILE), &test_set, opts.seq_len)?;
        write_file(&out.join("length_hist_test.csv"), stats.to_csv())?;
        test_counts = Some(stats.label_counts);
    }

    let summary = PrepareSummary {
        rows: corpus.rows,
        malformed: corpus.malformed,
        label_counts,
        dropped_empty,
        train: train_set.len(),
        dev: dev_set.len(),
        vocab_size: vocab.len(),
        test_counts,
    };
    let mut m = RunManifest::default();
    m.set("command", "prepare");
    m.set("train_csv", opts.train_csv.display());
    m.set("seed", opts.seed);
    m.set("rows", summary.rows);
    m.set("malformed", summary.malformed);
    m.set("negative", label_counts[0]);
    m.set("positive", label_counts[1]);
    m.set("dropped_empty", dropped_empty);
    m.set("train_examples", summary.train);
    m.set("dev_examples", summary.dev);
    m.set("vocab_size", summary.vocab_size);
    m.set("vocab_sha256", vocab.checksum());
    m.set("train_sha256", file_sha256(&out.join(TRAIN_FILE))?);
    m.set("dev_sha256", file_sha256(&out.join(DEV_FILE))?);
    if let Some([neg, pos]) = test_counts {
        m.set("test_negative", neg);
        m.set("test_positive", pos);
        m.set("test_sha256", file_sha256(&out.join(TEST_FILE))?);
    }
    m.write(&out.join("prepare_manifest.txt"))?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub variant: Variant,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub train: TrainConfig,
    /// train on the first N (already shuffled) training examples
    pub subset: Option<usize>,
    /// score only the first N dev examples after each epoch
    pub dev_limit: Option<usize>,
    pub post_filter_relu: bool,
}

impl TrainOptions {
    pub fn new(variant: Variant, data_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            variant,
            data_dir: data_dir.into(),
            out_dir: out_dir.into(),
            train: TrainConfig::default(),
            subset: None,
            dev_limit: None,
            post_filter_relu: false,
        }
    }

    pub fn model_config(&self, vocab_size: usize, seq_len: usize) -> ModelConfig {
        let mut cfg = ModelConfig::canonical(self.variant).with_vocab_size(vocab_size);
        cfg.seq_len = seq_len;
        if let Architecture::Scnn {
            post_filter_relu, ..
        } = &mut cfg.arch
        {
            *post_filter_relu = self.post_filter_relu;
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub report: TrainReport,
    pub checkpoint: PathBuf,
    pub curve_csv: PathBuf,
    pub metrics_csv: PathBuf,
    pub manifest: PathBuf,
    pub checksum: String,
}

pub struct PreparedData {
    pub vocab: Vocabulary,
    pub seq_len: usize,
    pub train: Vec<Example>,
    pub dev: Vec<Example>,
}

pub fn load_prepared(data_dir: &Path) -> Result<PreparedData> {
    let vocab = Vocabulary::read_tsv(data_dir.join(VOCAB_FILE))?;
    let (seq_len, train) = read_examples(data_dir.join(TRAIN_FILE))?;
    let (dev_len, dev) = read_examples(data_dir.join(DEV_FILE))?;
    if dev_len != seq_len {
        return Err(Error::Data(format!(
            "train and dev sequence lengths differ ({seq_len} vs {dev_len})"
        )));
    }
    Ok(PreparedData {
        vocab,
        seq_len,
        train,
        dev,
    })
}

pub fn train_command(opts: &TrainOptions) -> Result<TrainOutcome> {
    let started = Instant::now();
    ensure_dir(&opts.out_dir)?;
    let mut data = load_prepared(&opts.data_dir)?;
    if let Some(n) = opts.subset {
        data.train.truncate(n);
    }
    if let Some(n) = opts.dev_limit {
        data.dev.truncate(n);
    }
    let name = opts.variant.name();
    let out = &opts.out_dir;
    let checkpoint_path = out.join(format!("{name}.ckpt"));
    let curve_path = out.join(format!("{name}_curve.csv"));
    let metrics_path = out.join(format!("{name}_metrics.csv"));
    let manifest_path = out.join(format!("{name}_manifest.txt"));

    let cfg = opts.model_config(data.vocab.len(), data.seq_len);
    let mut model = Model::build(cfg.clone(), opts.train.seed)?;

    let mut m = RunManifest::default();
    m.set("command", "train");
    m.set("model", name);
    m.set("config", format!("{cfg:?}"));
    m.set("seed", opts.train.seed);
    m.set("epochs", opts.train.epochs);
    m.set("batch_size", opts.train.batch_size);
    m.set("learning_rate", opts.train.learning_rate);
    m.set("optimizer", opts.train.optimizer);
    m.set("curve_interval", opts.train.curve_interval);
    m.set("subset", opts.subset.map_or("all".into(), |n| n.to_string()));
    m.set("train_examples", data.train.len());
    m.set("dev_examples", data.dev.len());
    m.set("trunk_params", model.count_params(false));
    m.set("train_sha256", file_sha256(&opts.data_dir.join(TRAIN_FILE))?);
    m.set("dev_sha256", file_sha256(&opts.data_dir.join(DEV_FILE))?);
    m.set("vocab_sha256", data.vocab.checksum());
    m.set("checkpoint", checkpoint_path.display());
    m.set("curve_csv", curve_path.display());
    m.set("metrics_csv", metrics_path.display());
    m.write(&manifest_path)?;

    let train_started = Instant::now();
    let report = train(&mut model, &data.train, &data.dev, &opts.train)?;
    let train_secs = train_started.elapsed().as_secs_f64();

    checkpoint::save(&model, &checkpoint_path)?;
    write_file(&curve_path, report.curve_csv())?;
    write_file(&metrics_path, report.metrics_csv())?;
    // the checkpoint must read back before the run counts as done
    let reread = checkpoint::load(&checkpoint_path)?;
    let checksum = model.checksum();
    if reread.checksum() != checksum {
        return Err(Error::Checkpoint("written checkpoint does not read back identically".into()));
    }

    m.set("best_epoch", report.best_epoch);
    m.set("param_sha256", &checksum);
    m.set("train_seconds", format!("{train_secs:.3}"));
    m.set("total_seconds", format!("{:.3}", started.elapsed().as_secs_f64()));
    m.write(&manifest_path)?;

    Ok(TrainOutcome {
        report,
        checkpoint: checkpoint_path,
        curve_csv: curve_path,
        metrics_csv: metrics_path,
        manifest: manifest_path,
        checksum,
    })
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub checkpoint: PathBuf,
    pub test_csv: PathBuf,
    pub data_dir: PathBuf,
    pub metrics_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub evaluation: Evaluation,
    /// (negative, positive) test samples
    pub label_counts: [usize; 2],
}

/// Encodes a Sentiment140-format test file (neutral rows dropped) with `vocab`.
pub fn load_test_set(test_csv: &Path, vocab: &Vocabulary, seq_len: usize) -> Result<Vec<Example>> {
    let (_, docs) = load_labelled(test_csv)?;
    Ok(docs
        .iter()
        .map(|(l, t)| encode_example(t, *l, vocab, seq_len))
        .collect())
}

pub fn eval_command(opts: &EvalOptions) -> Result<EvalOutcome> {
    let model = checkpoint::load(&opts.checkpoint)?;
    let vocab = Vocabulary::read_tsv(opts.data_dir.join(VOCAB_FILE))?;
    if vocab.len() != model.config().vocab_size {
        return Err(Error::Config(format!(
            "checkpoint expects a vocabulary of {} entries, {} has {}",
            model.config().vocab_size,
            opts.data_dir.join(VOCAB_FILE).display(),
            vocab.len()
        )));
    }
    let test = load_test_set(&opts.test_csv, &vocab, model.config().seq_len)?;
    let evaluation = evaluate(&model, &test)?;
    let label_counts = dataset_stats(&test).label_counts;
    if let Some(path) = &opts.metrics_out {
        let text = format!(
            "checkpoint,samples,negative,positive,correct,accuracy,loss\n{},{},{},{},{},{},{}\n",
            opts.checkpoint.display(),
            evaluation.total,
            label_counts[0],
            label_counts[1],
            evaluation.correct,
            evaluation.accuracy,
            evaluation.loss
        );
        write_file(path, text)?;
    }
    Ok(EvalOutcome {
        evaluation,
        label_counts,
    })
}

// ---------------------------------------------------------------------------
// params

/// Trunk sizes reported for the comparison, for side-by-side display.
pub fn reported_trunk_params(variant: Variant) -> usize {
    match variant {
        Variant::Mlp => 28_002,
        Variant::Cnn => 200_142,
        Variant::BiLstm => 738_307,
        Variant::Scnn => 332,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamRow {
    pub variant: Variant,
    pub trunk: usize,
    pub embedding: usize,
    pub reported: usize,
    pub note: &'static str,
}

/// Builds each canonical model and counts its parameters.
pub fn params_table(variants: &[Variant]) -> Result<Vec<ParamRow>> {
    variants
        .iter()
        .map(|&variant| {
            let cfg = ModelConfig::canonical(variant);
            let model = Model::build(cfg.clone(), 0)?;
            let trunk = model.count_params(false);
            debug_assert_eq!(trunk, cfg.trunk_param_count());
            let note = match variant {
                Variant::Scnn => "swarm(300) + swarm(10) + dense(10->2)",
                Variant::Cnn => "20 x (100*100+1) conv + dense(60->2), ceil-mode pooling",
                Variant::Mlp => "hidden 2 over 14000 inputs; 6 more than reported",
                Variant::BiLstm => "two-bias LSTM cells; reported figure not reproducible",
            };
            Ok(ParamRow {
                variant,
                trunk,
                embedding: model.count_params(true) - trunk,
                reported: reported_trunk_params(variant),
                note,
            })
        })
        .collect()
}

pub fn params_csv(rows: &[ParamRow]) -> String {
    let mut out = String::from("model,trunk_params,embedding_params,total_params,reported,note\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},\"{}\"\n",
            r.variant,
            r.trunk,
            r.embedding,
            r.trunk + r.embedding,
            r.reported,
            r.note
        ));
    }
    out
}

pub fn params_text(rows: &[ParamRow]) -> String {
    let mut out = format!(
        "{:<8} {:>12} {:>12} {:>12}  {}\n",
        "model", "trunk", "with embed", "reported", "note"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:>12} {:>12} {:>12}  {}\n",
            r.variant,
            r.trunk,
            r.trunk + r.embedding,
            r.reported,
            r.note
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// swarm-viz

#[derive(Debug, Clone)]
pub struct VizOptions {
    pub checkpoint: PathBuf,
    pub sentences_file: PathBuf,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VizOutcome {
    pub sentences: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub cosines: Vec<Vec<Option<f64>>>,
    pub heatmaps: Vec<PathBuf>,
}

pub fn read_sentences(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

pub fn swarm_viz(opts: &VizOptions) -> Result<VizOutcome> {
    let model = checkpoint::load(&opts.checkpoint)?;
    if model.variant() != Variant::Scnn {
        return Err(Error::arg(format!(
            "swarm-viz needs an SCNN checkpoint, got {}",
            model.variant()
        )));
    }
    let vocab = Vocabulary::read_tsv(opts.data_dir.join(VOCAB_FILE))?;
    let sentences = read_sentences(&opts.sentences_file)?;
    render_swarm_viz(&model, &vocab, sentences, &opts.out_dir)
}

/// Writes `swarm_features.csv`, `swarm_cosine.csv` and `heatmap_NN.pgm`.
pub fn render_swarm_viz(model: &Model, vocab: &Vocabulary, sentences: Vec<String>, out_dir: &Path) -> Result<VizOutcome> {
    ensure_dir(out_dir)?;
    let features = viz::sentence_features(model, vocab, &sentences)?;
    let cosines = viz::cosine_matrix(&features);
    write_file(&out_dir.join("swarm_features.csv"), viz::features_csv(&sentences, &features)?)?;
    write_file(&out_dir.join("swarm_cosine.csv"), viz::cosine_csv(&cosines))?;
    let mut heatmaps = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let path = out_dir.join(format!("heatmap_{i:02}.pgm"));
        write_file(&path, viz::heatmap_pgm(f))?;
        heatmaps.push(path);
    }
    Ok(VizOutcome {
        sentences,
        features,
        cosines,
        heatmaps,
    })
}

/// Parses an optimizer name for the command line.
pub fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    s.parse()
}
