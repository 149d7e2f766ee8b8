//! Scores a checkpoint on a Sentiment140-format test file.
//!
//! cargo run --release --example evaluate -- CHECKPOINT TEST_CSV DATA_DIR

use scnn::commands::{eval_command, EvalOptions};

fn main() -> scnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: evaluate CHECKPOINT TEST_CSV DATA_DIR");
        std::process::exit(2);
    }
    let out = eval_command(&EvalOptions {
        checkpoint: args[0].clone().into(),
        test_csv: args[1].clone().into(),
        data_dir: args[2].clone().into(),
        metrics_out: None,
    })?;
    let e = out.evaluation;
    println!(
        "{} negative / {} positive: accuracy {:.4} ({}/{}), loss {:.4}",
        out.label_counts[0], out.label_counts[1], e.accuracy, e.correct, e.total, e.loss
    );
    Ok(())
}
