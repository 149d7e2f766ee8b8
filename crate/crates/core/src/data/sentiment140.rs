//! Reader for the Sentiment140 CSV files.
//!
//! Rows have six double-quoted fields: polarity, id, date, query, user, text.
//! The published files are Latin-1, so text that is not valid UTF-8 is
//! decoded byte-for-byte as Latin-1.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Fraction of malformed rows above which a file is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTweet {
    /// 0 negative, 2 neutral, 4 positive
    pub polarity: u8,
    pub text: String,
}

impl RawTweet {
    /// Binary label: 0 -> 0, 4 -> 1, neutral -> `None`.
    pub fn label(&self) -> Option<u8> {
        match self.polarity {
            0 => Some(0),
            4 => Some(1),
            _ => None,
        }
    }
}

pub fn decode_text(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_owned(),
        Err(_) => bytes.iter().map(|&b| char::from(b)).collect(),
    }
}

/// Streams tweets, skipping and counting malformed rows.
pub struct Sentiment140Reader<R: Read> {
    records: csv::ByteRecordsIntoIter<R>,
    rows: usize,
    malformed: usize,
}

impl<R: Read> Sentiment140Reader<R> {
    pub fn new(reader: R) -> Self {
        let records = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader)
            .into_byte_records();
        Self {
            records,
            rows: 0,
            malformed: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn malformed(&self) -> usize {
        self.malformed
    }

    fn parse(record: &csv::ByteRecord) -> Option<RawTweet> {
        if record.len() != 6 {
            return None;
        }
        let polarity = match record.get(0)? {
            b"0" => 0,
            b"2" => 2,
            b"4" => 4,
            _ => return None,
        };
        Some(RawTweet {
            polarity,
            text: decode_text(record.get(5)?),
        })
    }
}

impl Sentiment140Reader<File> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(file))
    }
}

impl<R: Read> Iterator for Sentiment140Reader<R> {
    type Item = Result<RawTweet>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let record = match self.records.next()? {
                Ok(r) => r,
                Err(e) if e.is_io_error() => return Some(Err(e.into())),
                Err(e) => {
                    self.rows += 1;
                    self.malformed += 1;
                    log::warn!("skipping unreadable row: {e}");
                    continue;
                }
            };
            self.rows += 1;
            match Self::parse(&record) {
                Some(t) => return Some(Ok(t)),
                None => {
                    self.malformed += 1;
                    log::warn!(
                        "skipping malformed row {} ({} fields)",
                        self.rows,
                        record.len()
                    );
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub tweets: Vec<RawTweet>,
    pub rows: usize,
    pub malformed: usize,
}

impl Corpus {
    /// Counts of (negative, neutral, positive) tweets.
    pub fn polarity_counts(&self) -> (usize, usize, usize) {
        self.tweets.iter().fold((0, 0, 0), |(n, z, p), t| match t.polarity {
            0 => (n + 1, z, p),
            2 => (n, z + 1, p),
            _ => (n, z, p + 1),
        })
    }

    /// Only the tweets with a binary label, as `(label, text)`.
    pub fn labelled(self) -> Vec<(u8, String)> {
        self.tweets
            .into_iter()
            .filter_map(|t| t.label().map(|l| (l, t.text)))
            .collect()
    }
}

pub fn parse_sentiment140(reader: impl Read) -> Result<Corpus> {
    let mut rows = Sentiment140Reader::new(reader);
    let mut tweets = Vec::new();
    for t in rows.by_ref() {
        tweets.push(t?);
    }
    let corpus = Corpus {
        tweets,
        rows: rows.rows(),
        malformed: rows.malformed(),
    };
    if corpus.rows > 0 && corpus.malformed as f64 > MAX_MALFORMED_FRACTION * corpus.rows as f64 {
        return Err(Error::Data(format!(
            "{} of {} rows are malformed (limit {:.1}%)",
            corpus.malformed,
            corpus.rows,
            MAX_MALFORMED_FRACTION * 100.0
        )));
    }
    if corpus.malformed > 0 {
        log::warn!("skipped {} malformed rows of {}", corpus.malformed, corpus.rows);
    }
    Ok(corpus)
}

pub fn read_sentiment140(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_sentiment140(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoted_comma_stays_in_text() {
        let csv = b"\"4\",\"1\",\"Mon May 11 03:17:40 UTC 2009\",\"kindle2\",\"tpryan\",\"hello, world\"\n";
        let c = parse_sentiment140(&csv[..]).unwrap();
        assert_eq!(c.tweets.len(), 1);
        assert_eq!(c.tweets[0].text, "hello, world");
        assert_eq!(c.tweets[0].label(), Some(1));
    }

    #[test]
    fn latin1_bytes_are_decoded() {
        let mut csv = b"\"0\",\"1\",\"d\",\"q\",\"u\",\"caf".to_vec();
        csv.extend_from_slice(&[0xe9, b'"', b'\n']);
        let c = parse_sentiment140(csv.as_slice()).unwrap();
        assert_eq!(c.tweets[0].text, "caf\u{e9}");
        assert_eq!(c.tweets[0].label(), Some(0));
    }

    #[test]
    fn neutral_has_no_label() {
        let t = RawTweet {
            polarity: 2,
            text: String::new(),
        };
        assert_eq!(t.label(), None);
    }

    #[test]
    fn malformed_rows_are_counted_then_rejected() {
        let mut csv = String::new();
        for i in 0..2000 {
            csv.push_str(&format!("\"0\",\"{i}\",\"d\",\"q\",\"u\",\"text {i}\"\n"));
        }
        csv.push_str("\"7\",\"x\",\"d\",\"q\",\"u\",\"bad polarity\"\n");
        let c = parse_sentiment140(csv.as_bytes()).unwrap();
        assert_eq!((c.rows, c.malformed, c.tweets.len()), (2001, 1, 2000));

        csv.push_str("\"0\",\"short row\"\n");
        csv.push_str("\"0\",\"short row\"\n");
        let err = parse_sentiment140(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(_)), "{err}");
    }
}
