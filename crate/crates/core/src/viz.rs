//! Swarm feature dumps: per-sentence last-filter outputs, their pairwise
//! cosines, and one-row grayscale heatmaps in plain PGM (P2).

use std::fmt::Write as _;

use crate::data::{encode, preprocess, Vocabulary};
use crate::error::Result;
use crate::model::Model;
use crate::tensor::cosine;

/// Last swarm filter output (before any activation) for each sentence.
pub fn sentence_features(model: &Model, vocab: &Vocabulary, sentences: &[String]) -> Result<Vec<Vec<f64>>> {
    let seq_len = model.config().seq_len;
    sentences
        .iter()
        .map(|s| {
            let ids = encode(&preprocess(s), vocab, seq_len);
            model.last_swarm_features(&ids).map(|t| t.into_data())
        })
        .collect()
}

/// Pairwise cosine similarity; `None` where either vector is all zeros.
pub fn cosine_matrix(features: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    features
        .iter()
        .map(|a| features.iter().map(|b| cosine(a, b)).collect())
        .collect()
}

/// `index,sentence,f0,f1,...` with raw values.
pub fn features_csv(sentences: &[String], features: &[Vec<f64>]) -> Result<String> {
    let width = features.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_owned(), "sentence".to_owned()];
    header.extend((0..width).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    for (i, (s, f)) in sentences.iter().zip(features).enumerate() {
        let mut row = vec![i.to_string(), s.clone()];
        row.extend(f.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Square matrix with a header row of indices; undefined cosines print as `nan`.
pub fn cosine_csv(matrix: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("index");
    for j in 0..matrix.len() {
        write!(out, ",{j}").unwrap();
    }
    out.push('\n');
    for (i, row) in matrix.iter().enumerate() {
        write!(out, "{i}").unwrap();
        for c in row {
            match c {
                Some(v) => write!(out, ",{v}").unwrap(),
                None => out.push_str(",nan"),
            }
        }
        out.push('\n');
    }
    out
}

/// Min-max scales to 0..=255 so the largest cell is brightest. A constant
/// vector maps to all zeros.
pub fn gray_levels(values: &[f64]) -> Vec<u8> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                (255.0 * (v - min) / span).round() as u8
            } else {
                0
            }
        })
        .collect()
}

/// One-row P2 graymap.
pub fn heatmap_pgm(values: &[f64]) -> String {
    let levels = gray_levels(values);
    let mut out = format!("P2\n{} 1\n255\n", values.len());
    let cells: Vec<String> = levels.iter().map(u8::to_string).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brightest_cell_is_the_maximum() {
        assert_eq!(gray_levels(&[0.1, 0.3, 0.2]), vec![0, 255, 128]);
        assert_eq!(
            heatmap_pgm(&[0.1, 0.3, 0.2]),
            "P2\n3 1\n255\n0 255 128\n"
        );
    }

    #[test]
    fn zero_tensor_is_dark() {
        assert_eq!(heatmap_pgm(&[0.0; 4]), "P2\n4 1\n255\n0 0 0 0\n");
    }

    #[test]
    fn cosine_table() {
        let m = cosine_matrix(&[vec![1.0, 2.0], vec![-2.0, -4.0], vec![0.0, 0.0]]);
        assert!((m[0][1].unwrap() + 1.0).abs() < 1e-15);
        assert!(m[2][0].is_none());
        let csv = cosine_csv(&m);
        assert!(csv.starts_with("index,0,1,2\n0,"));
        assert!(csv.contains(",nan"));
    }

    #[test]
    fn features_table_quotes_text() {
        let csv = features_csv(&["I love it, really.".into()], &[vec![0.5, 1.0]]).unwrap();
        assert_eq!(csv, "index,sentence,f0,f1\n0,\"I love it, really.\",0.5,1\n");
    }
}
