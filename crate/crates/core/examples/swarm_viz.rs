//! Dumps last swarm filter features, their cosine table and heatmaps.
//!
//! cargo run --release --example swarm_viz -- CHECKPOINT SENTENCES_FILE DATA_DIR OUT_DIR

use scnn::commands::{swarm_viz, VizOptions};

fn main() -> scnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 4 {
        eprintln!("usage: swarm_viz CHECKPOINT SENTENCES_FILE DATA_DIR OUT_DIR");
        std::process::exit(2);
    }
    let out = swarm_viz(&VizOptions {
        checkpoint: args[0].clone().into(),
        sentences_file: args[1].clone().into(),
        data_dir: args[2].clone().into(),
        out_dir: args[3].clone().into(),
    })?;
    for (sentence, f) in out.sentences.iter().zip(&out.features) {
        let cells: Vec<String> = f.iter().map(|v| format!("{v:+.3}")).collect();
        println!("{sentence:<28} {}", cells.join(" "));
    }
    Ok(())
}
