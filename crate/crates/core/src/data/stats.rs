use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::encode::Example;

/// Length histogram (tokens before padding) and per-label counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetStats {
    pub lengths: BTreeMap<usize, usize>,
    pub label_counts: [usize; 2],
}

impl DatasetStats {
    pub fn total(&self) -> usize {
        self.lengths.values().sum()
    }

    /// Most frequent length; ties go to the shorter length.
    pub fn mode(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (&len, &count) in &self.lengths {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((len, count));
            }
        }
        best.map(|(len, _)| len)
    }

    /// `length,count` rows in ascending length.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,count\n");
        for (len, count) in &self.lengths {
            writeln!(out, "{len},{count}").unwrap();
        }
        out
    }
}

pub fn dataset_stats(examples: &[Example]) -> DatasetStats {
    let mut stats = DatasetStats::default();
    for ex in examples {
        *stats.lengths.entry(ex.len).or_insert(0) += 1;
        stats.label_counts[usize::from(ex.label)] += 1;
    }
    stats
}
