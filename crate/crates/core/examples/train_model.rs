//! Trains one model on a prepared data directory and prints the epoch metrics.
//!
//! cargo run --release --example train_model -- scnn DATA_DIR OUT_DIR [SUBSET] [EPOCHS]

use scnn::commands::{train_command, TrainOptions};
use scnn::Variant;

fn main() -> scnn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: train_model MODEL DATA_DIR OUT_DIR [SUBSET] [EPOCHS]");
        std::process::exit(2);
    }
    let variant: Variant = args[0].parse()?;
    let mut opts = TrainOptions::new(variant, &args[1], &args[2]);
    opts.subset = args.get(3).map(|s| s.parse().expect("SUBSET is a number"));
    if let Some(e) = args.get(4) {
        opts.train.epochs = e.parse().expect("EPOCHS is a number");
    }
    let out = train_command(&opts)?;
    print!("{}", out.report.metrics_csv());
    println!("checkpoint {}", out.checkpoint.display());
    Ok(())
}
