//! Cleans, splits and encodes a Sentiment140-format CSV.
//!
//! cargo run --release --example prepare_data -- TRAIN_CSV OUT_DIR [TEST_CSV]

use std::path::PathBuf;

use scnn::commands::{prepare, PrepareOptions};

fn main() -> scnn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: prepare_data TRAIN_CSV OUT_DIR [TEST_CSV]");
        std::process::exit(2);
    }
    let mut opts = PrepareOptions::new(&args[0], &args[1]);
    opts.test_csv = args.get(2).map(PathBuf::from);
    let s = prepare(&opts)?;
    println!("{s:#?}");
    Ok(())
}
