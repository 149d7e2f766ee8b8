//! Generated tweet corpora in the Sentiment140 file layout.
//!
//! Each tweet mixes filler words drawn from a skewed frequency distribution
//! with sentiment cue words from its own class (and occasionally from the
//! other class), plus mentions, links, hashtags and punctuation for the
//! cleaner to strip. Useful for exercising the whole pipeline without the
//! real corpus.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::Prng;

use super::sentiment140::RawTweet;

const POSITIVE: &[&str] = &[
    "love", "great", "happy", "awesome", "good", "thanks", "fun", "best", "nice", "wonderful",
    "amazing", "excited", "glad", "beautiful", "cool", "yay", "lovely", "enjoy", "perfect", "smile",
];
const NEGATIVE: &[&str] = &[
    "hate", "sad", "bad", "terrible", "awful", "sick", "tired", "miss", "worst", "angry", "hurts",
    "sorry", "bored", "ugh", "lost", "broken", "cry", "mad", "poor", "fail",
];
const SYLLABLES: &[&str] = &[
    "ba", "ko", "ri", "ten", "mo", "la", "sun", "ve", "da", "pli", "ro", "gan", "ti", "na", "che",
    "lo", "mi", "sa", "dor", "fu",
];

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub samples: usize,
    pub seed: u64,
    /// distinct filler words
    pub filler_words: usize,
    /// chance that a token is a cue word of the tweet's own class
    pub cue_rate: f64,
    /// chance that a token is a cue word of the opposite class
    pub cross_rate: f64,
    /// chance that the stored polarity is flipped
    pub label_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            filler_words: 3_000,
            cue_rate: 0.2,
            cross_rate: 0.04,
            label_noise: 0.05,
        }
    }
}

fn filler_word(index: usize) -> String {
    let n = SYLLABLES.len();
    let mut word = String::new();
    let mut i = index;
    loop {
        word.push_str(SYLLABLES[i % n]);
        i /= n;
        if i == 0 {
            break;
        }
    }
    word
}

struct Generator<'a> {
    cfg: &'a SyntheticConfig,
    rng: Prng,
}

impl Generator<'_> {
    fn filler(&mut self) -> String {
        // log-uniform rank: a few words are very common, most are rare
        let rank = (self.cfg.filler_words as f64).powf(self.rng.next_f64()) as usize - 1;
        filler_word(rank.min(self.cfg.filler_words - 1))
    }

    fn cue(&mut self, positive: bool) -> String {
        let list = if positive { POSITIVE } else { NEGATIVE };
        list[self.rng.below(list.len())].to_owned()
    }

    fn text(&mut self, class: Option<bool>) -> String {
        let len = 2 + ((-self.rng.next_f64().max(1e-12).ln()) * 9.0) as usize;
        let len = len.min(60);
        let mut words = Vec::with_capacity(len + 3);
        if self.rng.next_f64() < 0.1 {
            words.push(format!("@user{}", self.rng.below(500)));
        }
        for _ in 0..len {
            let u = self.rng.next_f64();
            let word = match class {
                Some(pos) if u < self.cfg.cue_rate => self.cue(pos),
                Some(pos) if u < self.cfg.cue_rate + self.cfg.cross_rate => self.cue(!pos),
                _ => self.filler(),
            };
            words.push(word);
        }
        if self.rng.next_f64() < 0.05 {
            let tag = self.filler();
            words.push(format!("#{tag}"));
        }
        if self.rng.next_f64() < 0.05 {
            words.push(format!("http://t.co/{}", self.rng.below(100_000)));
        }
        let mut text = words.join(" ");
        if self.rng.next_f64() < 0.3 {
            text[..1].make_ascii_uppercase();
        }
        match self.rng.below(4) {
            0 => text.push('!'),
            1 => text.push_str(", really."),
            _ => {}
        }
        text
    }
}

/// Balanced binary corpus (polarity 0 or 4).
pub fn synthetic_tweets(cfg: &SyntheticConfig) -> Vec<RawTweet> {
    let mut g = Generator {
        cfg,
        rng: Prng::new(cfg.seed),
    };
    (0..cfg.samples)
        .map(|i| {
            let positive = i % 2 == 1;
            let text = g.text(Some(positive));
            let flipped = g.rng.next_f64() < cfg.label_noise;
            RawTweet {
                polarity: if positive != flipped { 4 } else { 0 },
                text,
            }
        })
        .collect()
}

/// A test-file-shaped corpus: `negative` + `positive` labelled rows plus
/// `neutral` rows with polarity 2, interleaved.
pub fn synthetic_test_tweets(negative: usize, positive: usize, neutral: usize, seed: u64) -> Vec<RawTweet> {
    let cfg = SyntheticConfig {
        seed,
        label_noise: 0.0,
        ..SyntheticConfig::default()
    };
    let mut g = Generator {
        cfg: &cfg,
        rng: Prng::new(seed),
    };
    let mut kinds: Vec<u8> = std::iter::repeat_n(0, negative)
        .chain(std::iter::repeat_n(4, positive))
        .chain(std::iter::repeat_n(2, neutral))
        .collect();
    g.rng.shuffle(&mut kinds);
    kinds
        .into_iter()
        .map(|polarity| {
            let class = match polarity {
                0 => Some(false),
                4 => Some(true),
                _ => None,
            };
            RawTweet {
                polarity,
                text: g.text(class),
            }
        })
        .collect()
}

/// Writes rows as six quoted fields: polarity, id, date, query, user, text.
pub fn write_sentiment140_csv(path: impl AsRef<Path>, tweets: &[RawTweet]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Always)
        .from_writer(BufWriter::new(file));
    for (i, t) in tweets.iter().enumerate() {
        w.write_record([
            t.polarity.to_string(),
            (1_000_000 + i).to_string(),
            "Mon Apr 06 22:19:45 PDT 2009".to_owned(),
            "NO_QUERY".to_owned(),
            format!("user{}", i % 977),
            t.text.clone(),
        ])?;
    }
    w.flush().map_err(io)
}
