//! End to end on a generated corpus: prepare, train SCNN and MLP for a short
//! run, evaluate both on a 177/182 test file, and render swarm features.
//!
//! cargo run --release --example synthetic_pipeline -- [WORK_DIR]

use std::path::PathBuf;

use scnn::commands::{eval_command, prepare, render_swarm_viz, train_command, EvalOptions, PrepareOptions, TrainOptions};
use scnn::data::synthetic::{synthetic_test_tweets, synthetic_tweets, write_sentiment140_csv, SyntheticConfig};
use scnn::data::Vocabulary;
use scnn::{checkpoint, Variant};

const SENTENCES: [&str; 4] = ["I love it.", "I hate it.", "Today is a wonderful day.", "I am sad."];

fn main() -> scnn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let work = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("scnn-synthetic"), PathBuf::from);
    std::fs::create_dir_all(&work).map_err(|e| scnn::Error::Io { path: work.clone(), source: e })?;

    let train_csv = work.join("train.csv");
    let test_csv = work.join("test.csv");
    let cfg = SyntheticConfig {
        samples: 40_000,
        ..SyntheticConfig::default()
    };
    write_sentiment140_csv(&train_csv, &synthetic_tweets(&cfg))?;
    write_sentiment140_csv(&test_csv, &synthetic_test_tweets(177, 182, 139, 1))?;

    let data = work.join("data");
    let mut prep = PrepareOptions::new(&train_csv, &data);
    prep.test_csv = Some(test_csv.clone());
    let summary = prepare(&prep)?;
    println!("prepared {} train / {} dev, vocabulary {}", summary.train, summary.dev, summary.vocab_size);

    let mut scnn_ckpt = None;
    for variant in [Variant::Scnn, Variant::Mlp] {
        let mut opts = TrainOptions::new(variant, &data, work.join("runs"));
        opts.train.epochs = 2;
        let run = train_command(&opts)?;
        let e = eval_command(&EvalOptions {
            checkpoint: run.checkpoint.clone(),
            test_csv: test_csv.clone(),
            data_dir: data.clone(),
            metrics_out: None,
        })?;
        println!(
            "{variant:<6} best epoch {}  test accuracy {:.3}",
            run.report.best_epoch, e.evaluation.accuracy
        );
        if variant == Variant::Scnn {
            scnn_ckpt = Some(run.checkpoint);
        }
    }

    let model = checkpoint::load(scnn_ckpt.expect("scnn trained"))?;
    let vocab = Vocabulary::read_tsv(data.join("vocab.tsv"))?;
    let sentences = SENTENCES.iter().map(|s| s.to_string()).collect();
    let viz = render_swarm_viz(&model, &vocab, sentences, &work.join("viz"))?;
    for (s, row) in viz.sentences.iter().zip(&viz.cosines) {
        let cells: Vec<String> = row.iter().map(|c| c.map_or("nan".into(), |v| format!("{v:+.6}"))).collect();
        println!("{s:<28} {}", cells.join(" "));
    }
    println!("outputs in {}", work.display());
    Ok(())
}
