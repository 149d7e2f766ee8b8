//! Swarm filter layers and the SCNN text classifier, with MLP, CNN and
//! BiLSTM baselines, all trained from scratch on `f64` tensors with
//! hand-written backward passes.
//!
//! A swarm filter is a weight vector `s` of length `m`. Given an input `x` of
//! length `n` it produces the column means of the outer product `x ⊗ s`,
//! which is `mean(x) * s`. SCNN stacks two of them (300 and 10 wide) over a
//! flattened word-embedding sequence and finishes with a 10 -> 2 dense layer,
//! for 332 trainable parameters outside the embedding table.
//!
//! ```
//! use scnn::{Model, ModelConfig, Variant};
//!
//! let model = Model::build(ModelConfig::canonical(Variant::Scnn).with_vocab_size(1_000), 7)?;
//! assert_eq!(model.count_params(false), 332);
//!
//! let ids = vec![5u32; 140];
//! let layered = model.predict(&ids)?.logits;
//! let direct = model.scnn_closed_form(&ids)?;
//! assert!((layered.data()[0] - direct.data()[0]).abs() < 1e-12);
//! # Ok::<(), scnn::Error>(())
//! ```
//!
//! Module map:
//!
//! - [`tensor`]: dense tensors and math kernels
//! - [`layers`]: differentiable layers
//! - [`model`]: the four architectures, parameter counting, prediction
//! - [`checkpoint`]: binary model files
//! - [`data`]: Sentiment140 ingestion, cleaning, vocabulary, encoding
//! - [`train`]: optimizers, training loop, evaluation, learning curves
//! - [`viz`]: swarm feature dumps and grayscale heatmaps
//! - [`commands`]: the pipeline steps behind the `scnn` binary

pub mod checkpoint;
pub mod commands;
pub mod data;
pub mod error;
pub mod layers;
pub mod model;
pub mod rng;
pub mod tensor;
pub mod train;
pub mod viz;

pub use error::{Error, Result};
pub use model::{Architecture, Model, ModelConfig, Prediction, Variant};
pub use rng::Prng;
pub use tensor::Tensor;
