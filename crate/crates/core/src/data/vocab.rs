use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
/// Total entries including the two reserved ids.
pub const VOCAB_CAPACITY: usize = 100_000;

/// Frequency-ranked token ids. Id 0 is padding, id 1 is unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

/// Token counts that can be filled shard by shard and merged.
#[derive(Debug, Clone, Default)]
pub struct TokenCounts {
    counts: HashMap<String, u64>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for t in tokens {
            *self.counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (t, n) in other.counts {
            *self.counts.entry(t).or_insert(0) += n;
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Keeps the `capacity - 2` most frequent tokens; equal counts are ordered
    /// lexicographically.
    pub fn into_vocabulary(self, capacity: usize) -> Result<Vocabulary> {
        if capacity < 3 {
            return Err(Error::arg(format!(
                "vocabulary capacity {capacity} leaves no room for real tokens"
            )));
        }
        if self.counts.is_empty() {
            return Err(Error::Data("cannot build a vocabulary from an empty corpus".into()));
        }
        let mut ranked: Vec<(String, u64)> = self.counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(capacity - 2);
        let tokens = [PAD_TOKEN.to_owned(), UNK_TOKEN.to_owned()]
            .into_iter()
            .chain(ranked.into_iter().map(|(t, _)| t))
            .collect();
        Ok(Vocabulary::from_tokens(tokens))
    }
}

pub fn build_vocab<'a, I, S>(documents: I, capacity: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut counts = TokenCounts::new();
    for doc in documents {
        counts.add(doc);
    }
    counts.into_vocabulary(capacity)
}

impl Vocabulary {
    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// `token<TAB>id` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            out.push('\t');
            out.push_str(&i.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_tsv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let (token, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::Data(format!("vocab line {}: missing tab", line_no + 1)))?;
            let id: usize = id
                .parse()
                .map_err(|_| Error::Data(format!("vocab line {}: bad id '{id}'", line_no + 1)))?;
            if id != tokens.len() {
                return Err(Error::Data(format!(
                    "vocab line {}: id {id} out of sequence",
                    line_no + 1
                )));
            }
            tokens.push(token.to_owned());
        }
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::Data("vocab must start with <pad> and <unk>".into()));
        }
        Ok(Self::from_tokens(tokens))
    }

    pub fn checksum(&self) -> String {
        crate::model::hex(&Sha256::digest(self.to_tsv().as_bytes()))
    }
}
