use crate::error::{Error, Result};
use crate::rng::Prng;

use super::vocab::{Vocabulary, PAD_ID};

pub const MAX_SEQ_LEN: usize = 140;

/// Fixed-length token ids with a binary label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub ids: Vec<u32>,
    pub label: u8,
    /// tokens before padding, after truncation
    pub len: usize,
}

impl Example {
    pub fn new(ids: Vec<u32>, label: u8, vocab_size: usize) -> Result<Self> {
        if label > 1 {
            return Err(Error::arg(format!("label must be 0 or 1, got {label}")));
        }
        if let Some(pos) = ids.iter().position(|&id| id as usize >= vocab_size) {
            return Err(Error::arg(format!(
                "id {} at position {pos} is outside the vocabulary of {vocab_size}",
                ids[pos]
            )));
        }
        let len = ids.iter().rposition(|&id| id != PAD_ID).map_or(0, |p| p + 1);
        Ok(Self { ids, label, len })
    }
}

/// Maps tokens to ids (unknown -> UNK), truncates to `seq_len`, right-pads with PAD.
pub fn encode<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, seq_len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = tokens
        .iter()
        .take(seq_len)
        .map(|t| vocab.id(t.as_ref()))
        .collect();
    ids.resize(seq_len, PAD_ID);
    ids
}

pub fn encode_example<S: AsRef<str>>(
    tokens: &[S],
    label: u8,
    vocab: &Vocabulary,
    seq_len: usize,
) -> Example {
    Example {
        ids: encode(tokens, vocab, seq_len),
        label,
        len: tokens.len().min(seq_len),
    }
}

/// Seeded shuffle, then the last tenth (rounded down) becomes the dev split.
pub fn split_train_dev<T>(mut items: Vec<T>, seed: u64) -> (Vec<T>, Vec<T>) {
    Prng::new(seed).shuffle(&mut items);
    let dev_len = items.len() / 10;
    let dev = items.split_off(items.len() - dev_len);
    (items, dev)
}
