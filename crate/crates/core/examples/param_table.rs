//! Trainable parameter counts for the four canonical models.
//!
//! cargo run --example param_table

use scnn::commands::{params_csv, params_table, params_text};
use scnn::Variant;

fn main() -> scnn::Result<()> {
    let rows = params_table(&Variant::ALL)?;
    print!("{}", params_text(&rows));
    println!();
    print!("{}", params_csv(&rows));
    Ok(())
}
