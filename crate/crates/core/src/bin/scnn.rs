use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scnn::commands::{self, EvalOptions, PrepareOptions, TrainOptions, VizOptions, DATA_DIR_ENV};
use scnn::train::{OptimizerKind, TrainConfig};
use scnn::Variant;

#[derive(Parser)]
#[command(name = "scnn", version, about = "Swarm filter sentiment models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, split and encode a Sentiment140 training file
    Prepare {
        /// training CSV (1.6M rows)
        #[arg(long)]
        train_csv: PathBuf,
        /// optional test CSV; neutral rows are dropped
        #[arg(long)]
        test_csv: Option<PathBuf>,
        #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one model on a prepared data directory
    Train {
        #[arg(long)]
        model: Variant,
        #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        #[arg(long, default_value_t = OptimizerKind::Adam)]
        optimizer: OptimizerKind,
        /// samples between learning-curve points
        #[arg(long, default_value_t = 100)]
        curve_interval: usize,
        /// train on the first N training examples
        #[arg(long)]
        subset: Option<usize>,
        /// score only the first N dev examples per epoch
        #[arg(long)]
        dev_limit: Option<usize>,
        /// ReLU after each swarm filter (SCNN only)
        #[arg(long)]
        post_filter_relu: bool,
    },
    /// Score a checkpoint on a Sentiment140-format test file
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        test_csv: PathBuf,
        /// directory holding the vocabulary used for training
        #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
        data_dir: PathBuf,
        /// write a one-row metrics CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print trainable parameter counts
    Params {
        /// a model name or "all"
        #[arg(long, default_value = "all")]
        model: String,
        /// also write the table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump swarm filter features for a list of sentences
    SwarmViz {
        #[arg(long)]
        checkpoint: PathBuf,
        /// one sentence per line
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, default_value = "viz")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> scnn::Result<()> {
    match cli.command {
        Command::Prepare {
            train_csv,
            test_csv,
            out_dir,
            seed,
        } => {
            let mut opts = PrepareOptions::new(train_csv, out_dir);
            opts.test_csv = test_csv;
            opts.seed = seed;
            let s = commands::prepare(&opts)?;
            println!(
                "rows {} (malformed {}), negative {}, positive {}",
                s.rows, s.malformed, s.label_counts[0], s.label_counts[1]
            );
            println!(
                "train {}, dev {}, dropped empty {}, vocabulary {}",
                s.train, s.dev, s.dropped_empty, s.vocab_size
            );
            if let Some([neg, pos]) = s.test_counts {
                println!("test {} (negative {neg}, positive {pos})", neg + pos);
            }
        }
        Command::Train {
            model,
            data_dir,
            out_dir,
            seed,
            epochs,
            batch_size,
            lr,
            optimizer,
            curve_interval,
            subset,
            dev_limit,
            post_filter_relu,
        } => {
            let mut opts = TrainOptions::new(model, data_dir, out_dir);
            opts.train = TrainConfig {
                batch_size,
                learning_rate: lr,
                epochs,
                seed,
                optimizer,
                curve_interval,
            };
            opts.subset = subset;
            opts.dev_limit = dev_limit;
            opts.post_filter_relu = post_filter_relu;
            let out = commands::train_command(&opts)?;
            for m in &out.report.epochs {
                println!(
                    "epoch {}: train loss {:.4}, dev loss {:.4}, dev accuracy {:.4}",
                    m.epoch, m.train_loss, m.dev_loss, m.dev_accuracy
                );
            }
            println!("kept epoch {}", out.report.best_epoch);
            println!("checkpoint {}", out.checkpoint.display());
        }
        Command::Eval {
            checkpoint,
            test_csv,
            data_dir,
            out,
        } => {
            let o = commands::eval_command(&EvalOptions {
                checkpoint,
                test_csv,
                data_dir,
                metrics_out: out,
            })?;
            let e = o.evaluation;
            println!(
                "accuracy {:.4} ({}/{}), loss {:.4}",
                e.accuracy, e.correct, e.total, e.loss
            );
        }
        Command::Params { model, csv } => {
            let variants = if model.eq_ignore_ascii_case("all") {
                Variant::ALL.to_vec()
            } else {
                vec![model.parse::<Variant>()?]
            };
            let rows = commands::params_table(&variants)?;
            print!("{}", commands::params_text(&rows));
            if let Some(path) = csv {
                std::fs::write(&path, commands::params_csv(&rows))
                    .map_err(|e| scnn::Error::Io { path, source: e })?;
            }
        }
        Command::SwarmViz {
            checkpoint,
            sentences,
            data_dir,
            out_dir,
        } => {
            let o = commands::swarm_viz(&VizOptions {
                checkpoint,
                sentences_file: sentences,
                data_dir,
                out_dir: out_dir.clone(),
            })?;
            println!(
                "{} sentences, features and heatmaps in {}",
                o.sentences.len(),
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ scnn::Error::Argument(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
