//! Sentiment140 ingestion: parsing, cleaning, tokenizing, vocabulary,
//! fixed-length encoding, splitting and length statistics.

mod encode;
mod sentiment140;
mod stats;
mod store;
pub mod synthetic;
mod text;
mod vocab;

pub use encode::{encode, encode_example, split_train_dev, Example, MAX_SEQ_LEN};
pub use sentiment140::{
    decode_text, parse_sentiment140, read_sentiment140, Corpus, RawTweet, Sentiment140Reader,
    MAX_MALFORMED_FRACTION,
};
pub use stats::{dataset_stats, DatasetStats};
pub use store::{read_examples, write_examples};
pub use text::{clean_text, tokenize};
pub use vocab::{
    build_vocab, TokenCounts, Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN, VOCAB_CAPACITY,
};

/// `clean_text` followed by `tokenize`.
pub fn preprocess(text: &str) -> Vec<String> {
    tokenize(&clean_text(text))
}
