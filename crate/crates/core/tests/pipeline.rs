//! Data preparation, training, evaluation and visualization through the
//! command layer and the binary.

mod common;

use std::fs;
use std::process::Command;

use common::{dir_contents, fixture, write_synthetic_corpus};
use scnn::checkpoint;
use scnn::commands::{
    eval_command, load_test_set, params_table, prepare, read_sentences, swarm_viz, train_command,
    EvalOptions, PrepareOptions, RunManifest, TrainOptions, VizOptions, VOCAB_FILE,
};
use scnn::data::{read_examples, Vocabulary};
use scnn::train::TrainConfig;
use scnn::{Error, Model, ModelConfig, Variant};

#[test]
fn fixture_matches_golden_files() {
    let out = tempfile::tempdir().unwrap();
    let summary = prepare(&PrepareOptions::new(fixture("tiny.csv"), out.path())).unwrap();
    assert_eq!(summary.rows, 11);
    assert_eq!(summary.malformed, 0);
    assert_eq!(summary.label_counts, [5, 5]);
    assert_eq!(summary.dropped_empty, 1);
    assert_eq!((summary.train, summary.dev), (9, 0));
    assert_eq!(summary.vocab_size, 25);

    let golden = fs::read_to_string(fixture("tiny_vocab.tsv")).unwrap();
    assert_eq!(fs::read_to_string(out.path().join(VOCAB_FILE)).unwrap(), golden);
    let lengths = fs::read_to_string(fixture("tiny_lengths.csv")).unwrap();
    assert_eq!(fs::read_to_string(out.path().join("length_hist_train.csv")).unwrap(), lengths);

    let (seq_len, train) = read_examples(out.path().join("train.bin")).unwrap();
    assert_eq!(seq_len, 140);
    let vocab = Vocabulary::parse_tsv(&golden).unwrap();
    let love = train
        .iter()
        .find(|e| e.len == 5 && e.ids[1] == vocab.id("love"))
        .expect("'i love it love love' is in the split");
    assert_eq!(&love.ids[..6], &[4, 2, 16, 2, 2, 0]);
    assert_eq!(love.label, 1);
}

#[test]
fn prepare_is_byte_identical_on_rerun() {
    let src = tempfile::tempdir().unwrap();
    let (train, test) = write_synthetic_corpus(src.path(), 3000, 4);
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let out = tempfile::tempdir().unwrap();
            let mut opts = PrepareOptions::new(&train, out.path());
            opts.test_csv = Some(test.clone());
            opts.seed = 9;
            prepare(&opts).unwrap();
            let contents = dir_contents(out.path());
            assert!(contents.len() >= 8, "{:?}", contents.iter().map(|c| &c.0).collect::<Vec<_>>());
            contents
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn test_file_keeps_only_binary_labels() {
    let src = tempfile::tempdir().unwrap();
    let (_, test) = write_synthetic_corpus(src.path(), 10, 0);
    let vocab = Vocabulary::parse_tsv("<pad>\t0\n<unk>\t1\n").unwrap();
    let set = load_test_set(&test, &vocab, 140).unwrap();
    assert_eq!(set.len(), 359);
    assert_eq!(set.iter().filter(|e| e.label == 0).count(), 177);
    assert_eq!(set.iter().filter(|e| e.label == 1).count(), 182);
}

fn prepared(samples: usize) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = write_synthetic_corpus(dir.path(), samples, 1);
    let data = dir.path().join("data");
    let mut opts = PrepareOptions::new(&train, &data);
    opts.test_csv = Some(test.clone());
    prepare(&opts).unwrap();
    (dir, data)
}

#[test]
fn zero_initialized_scnn_predicts_the_first_class() {
    let (dir, data) = prepared(500);
    let vocab = Vocabulary::read_tsv(data.join(VOCAB_FILE)).unwrap();
    let mut model = Model::build(ModelConfig::canonical(Variant::Scnn).with_vocab_size(vocab.len()), 0).unwrap();
    model.zero_parameters();
    let ckpt = dir.path().join("zero.ckpt");
    checkpoint::save(&model, &ckpt).unwrap();
    let metrics = dir.path().join("eval.csv");
    let out = eval_command(&EvalOptions {
        checkpoint: ckpt,
        test_csv: dir.path().join("test.csv"),
        data_dir: data,
        metrics_out: Some(metrics.clone()),
    })
    .unwrap();
    assert_eq!(out.label_counts, [177, 182]);
    assert_eq!(out.evaluation.correct, 177);
    assert!((out.evaluation.accuracy - 0.493).abs() < 5e-4);
    assert!(fs::read_to_string(metrics).unwrap().lines().nth(1).unwrap().contains(",359,177,182,177,"));
}

#[test]
fn eval_refuses_a_mismatched_vocabulary() {
    let (dir, data) = prepared(200);
    let model = Model::build(ModelConfig::canonical(Variant::Scnn).with_vocab_size(12), 0).unwrap();
    let ckpt = dir.path().join("m.ckpt");
    checkpoint::save(&model, &ckpt).unwrap();
    let err = eval_command(&EvalOptions {
        checkpoint: ckpt,
        test_csv: dir.path().join("test.csv"),
        data_dir: data,
        metrics_out: None,
    })
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn train_writes_every_artifact_the_manifest_names() {
    let (dir, data) = prepared(1200);
    let mut opts = TrainOptions::new(Variant::Scnn, &data, dir.path().join("runs"));
    opts.train = TrainConfig {
        epochs: 2,
        ..TrainConfig::default()
    };
    opts.subset = Some(500);
    let out = train_command(&opts).unwrap();
    assert_eq!(out.report.curve.len(), 10);
    let manifest = RunManifest::parse(&fs::read_to_string(&out.manifest).unwrap());
    for key in ["checkpoint", "curve_csv", "metrics_csv"] {
        let path = manifest.get(key).unwrap();
        assert!(std::path::Path::new(path).is_file(), "{key} -> {path}");
    }
    for key in ["seed", "train_sha256", "dev_sha256", "vocab_sha256", "param_sha256", "train_seconds"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest.get("param_sha256"), Some(out.checksum.as_str()));
    assert_eq!(checkpoint::load(&out.checkpoint).unwrap().checksum(), out.checksum);
}

#[test]
fn swarm_viz_outputs_are_parallel() {
    let (dir, data) = prepared(800);
    let mut opts = TrainOptions::new(Variant::Scnn, &data, dir.path().join("runs"));
    opts.train.epochs = 1;
    let trained = train_command(&opts).unwrap();
    let viz_dir = dir.path().join("viz");
    let out = swarm_viz(&VizOptions {
        checkpoint: trained.checkpoint.clone(),
        sentences_file: fixture("sentences.txt"),
        data_dir: data.clone(),
        out_dir: viz_dir.clone(),
    })
    .unwrap();
    assert_eq!(out.sentences, read_sentences(&fixture("sentences.txt")).unwrap());
    assert_eq!(out.heatmaps.len(), 8);
    for row in &out.cosines {
        for c in row {
            assert!((c.unwrap().abs() - 1.0).abs() < 1e-6, "{c:?}");
        }
    }
    let pgm = fs::read_to_string(viz_dir.join("heatmap_07.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n10 1\n255\n"));
    assert!(viz_dir.join("swarm_features.csv").is_file());
    assert!(viz_dir.join("swarm_cosine.csv").is_file());

    let mut mlp_opts = TrainOptions::new(Variant::Mlp, &data, dir.path().join("runs"));
    mlp_opts.train.epochs = 1;
    mlp_opts.subset = Some(64);
    let mlp = train_command(&mlp_opts).unwrap();
    let err = swarm_viz(&VizOptions {
        checkpoint: mlp.checkpoint,
        sentences_file: fixture("sentences.txt"),
        data_dir: data,
        out_dir: viz_dir,
    })
    .unwrap_err();
    assert!(matches!(err, Error::Argument(_)), "{err}");
}

#[test]
fn params_agree_with_built_models() {
    let rows = params_table(&Variant::ALL).unwrap();
    let trunk: Vec<usize> = rows.iter().map(|r| r.trunk).collect();
    assert_eq!(trunk, [28_008, 200_142, 631_298, 332]);
    for r in &rows {
        assert_eq!(r.embedding, 10_000_000);
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scnn"))
}

#[test]
fn binary_prints_parameter_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("params.csv");
    let out = bin()
        .args(["params", "--model", "scnn", "--csv"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("scnn") && l.contains(" 332 ")), "{text}");
    assert!(fs::read_to_string(csv).unwrap().contains("\nscnn,332,10000000,10000332,332,"));
}

#[test]
fn binary_rejects_unknown_model() {
    let out = bin()
        .args(["train", "--model", "resnet", "--data-dir", "nowhere"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resnet"));
}

#[test]
fn binary_reports_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["prepare", "--train-csv"])
        .arg(dir.path().join("absent.csv"))
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}
