//! The four compared architectures assembled from [`crate::layers`].
//!
//! | variant | trunk after the embedding                                   |
//! |---------|--------------------------------------------------------------|
//! | SCNN    | swarm(300) -> swarm(10) -> dense(10 -> 2)                    |
//! | MLP     | dense(L*d -> 2) -> relu -> dense(2 -> 2)                     |
//! | CNN     | conv(20 @ 100x100) -> relu -> maxpool(20, ceil) -> dense(60 -> 2) |
//! | BiLSTM  | 2 x bidirectional lstm(128) -> dense(256 -> 2)               |
//!
//! Trunk counts exclude the embedding table.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::layers::{
    ceil_div, lstm_direction_params, BiLstm, Cache, Conv2d, Dense, Embedding, Layer, MaxPool2d,
    Relu, SwarmFilter,
};
use crate::rng::Prng;
use crate::tensor::{argmax, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Scnn,
    Mlp,
    Cnn,
    BiLstm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Mlp, Variant::Cnn, Variant::BiLstm, Variant::Scnn];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Scnn => "scnn",
            Variant::Mlp => "mlp",
            Variant::Cnn => "cnn",
            Variant::BiLstm => "bilstm",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scnn" => Ok(Variant::Scnn),
            "mlp" => Ok(Variant::Mlp),
            "cnn" => Ok(Variant::Cnn),
            "bilstm" | "lstm" => Ok(Variant::BiLstm),
            other => Err(Error::arg(format!(
                "unknown model '{other}' (expected scnn, mlp, cnn or bilstm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Architecture {
    Scnn {
        filter_dims: Vec<usize>,
        /// ReLU after every swarm filter. Off by default: the plain filters keep
        /// every output an exact multiple of the last filter's weights.
        post_filter_relu: bool,
    },
    Mlp {
        hidden: usize,
    },
    Cnn {
        channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        pool: usize,
    },
    BiLstm {
        layers: usize,
        hidden: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub seq_len: usize,
    pub classes: usize,
    pub arch: Architecture,
}

pub const VOCAB_SIZE: usize = 100_000;
pub const EMBED_DIM: usize = 100;
pub const SEQ_LEN: usize = 140;
pub const CLASSES: usize = 2;

impl ModelConfig {
    /// The configuration used in the comparison for each variant.
    pub fn canonical(variant: Variant) -> Self {
        let arch = match variant {
            Variant::Scnn => Architecture::Scnn {
                filter_dims: vec![300, 10],
                post_filter_relu: false,
            },
            Variant::Mlp => Architecture::Mlp { hidden: 2 },
            Variant::Cnn => Architecture::Cnn {
                channels: 20,
                kernel_h: 100,
                kernel_w: 100,
                pool: 20,
            },
            Variant::BiLstm => Architecture::BiLstm {
                layers: 2,
                hidden: 128,
            },
        };
        Self {
            vocab_size: VOCAB_SIZE,
            embed_dim: EMBED_DIM,
            seq_len: SEQ_LEN,
            classes: CLASSES,
            arch,
        }
    }

    pub fn with_vocab_size(mut self, vocab_size: usize) -> Self {
        self.vocab_size = vocab_size;
        self
    }

    pub fn variant(&self) -> Variant {
        match self.arch {
            Architecture::Scnn { .. } => Variant::Scnn,
            Architecture::Mlp { .. } => Variant::Mlp,
            Architecture::Cnn { .. } => Variant::Cnn,
            Architecture::BiLstm { .. } => Variant::BiLstm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::Config(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        positive("vocab_size", self.vocab_size)?;
        positive("embed_dim", self.embed_dim)?;
        positive("seq_len", self.seq_len)?;
        if self.classes < 2 {
            return Err(Error::Config(format!(
                "classes must be at least 2, got {}",
                self.classes
            )));
        }
        if self.vocab_size < 2 {
            return Err(Error::Config(
                "vocab_size must leave room for the padding and unknown tokens".into(),
            ));
        }
        match &self.arch {
            Architecture::Scnn { filter_dims, .. } => {
                if filter_dims.is_empty() {
                    return Err(Error::Config("SCNN needs at least one swarm filter".into()));
                }
                for (i, &d) in filter_dims.iter().enumerate() {
                    positive(&format!("filter_dims[{i}]"), d)?;
                }
            }
            Architecture::Mlp { hidden } => positive("hidden", *hidden)?,
            Architecture::Cnn {
                channels,
                kernel_h,
                kernel_w,
                pool,
            } => {
                positive("channels", *channels)?;
                positive("kernel_h", *kernel_h)?;
                positive("kernel_w", *kernel_w)?;
                positive("pool", *pool)?;
                if *kernel_h > self.seq_len {
                    return Err(Error::Config(format!(
                        "kernel_h {kernel_h} exceeds seq_len {}",
                        self.seq_len
                    )));
                }
                if *kernel_w > self.embed_dim {
                    return Err(Error::Config(format!(
                        "kernel_w {kernel_w} exceeds embed_dim {}",
                        self.embed_dim
                    )));
                }
            }
            Architecture::BiLstm { layers, hidden } => {
                positive("layers", *layers)?;
                positive("hidden", *hidden)?;
            }
        }
        Ok(())
    }

    pub fn embedding_param_count(&self) -> usize {
        self.vocab_size * self.embed_dim
    }

    /// Trunk parameter count from the configuration alone.
    pub fn trunk_param_count(&self) -> usize {
        let k = self.classes;
        match &self.arch {
            Architecture::Scnn { filter_dims, .. } => {
                filter_dims.iter().sum::<usize>() + filter_dims.last().unwrap_or(&0) * k + k
            }
            Architecture::Mlp { hidden } => {
                self.seq_len * self.embed_dim * hidden + hidden + hidden * k + k
            }
            Architecture::Cnn {
                channels,
                kernel_h,
                kernel_w,
                pool,
            } => {
                let flat = self.cnn_flat_features(*channels, *kernel_h, *kernel_w, *pool);
                channels * (kernel_h * kernel_w + 1) + flat * k + k
            }
            Architecture::BiLstm { layers, hidden } => {
                let mut total = 0;
                for layer in 0..*layers {
                    let input = if layer == 0 { self.embed_dim } else { 2 * hidden };
                    total += 2 * lstm_direction_params(input, *hidden);
                }
                total + 2 * hidden * k + k
            }
        }
    }

    fn cnn_flat_features(&self, channels: usize, kh: usize, kw: usize, pool: usize) -> usize {
        let oh = self.seq_len - kh + 1;
        let ow = self.embed_dim - kw + 1;
        channels * ceil_div(oh, pool) * ceil_div(ow, pool)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub logits: Tensor,
    pub class: usize,
}

/// Per-call state needed by [`Model::backward`].
#[derive(Debug, Clone)]
pub struct Trace {
    ids: Vec<u32>,
    caches: Vec<Cache>,
}

#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    embedding: Embedding,
    /// Hidden layers followed by the dense classifier.
    trunk: Vec<Layer>,
}

impl Model {
    /// Deterministic initialization: embedding first, then trunk layers in order,
    /// all drawn from one stream seeded by `seed`.
    pub fn build(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = Prng::new(seed);
        let embedding = Embedding::new(config.vocab_size, config.embed_dim, &mut rng);
        let k = config.classes;
        let trunk = match &config.arch {
            Architecture::Scnn {
                filter_dims,
                post_filter_relu,
            } => {
                let mut layers = Vec::new();
                for &d in filter_dims {
                    layers.push(Layer::Swarm(SwarmFilter::new(d, &mut rng)));
                    if *post_filter_relu {
                        layers.push(Layer::Relu(Relu));
                    }
                }
                let last = *filter_dims.last().expect("validated");
                layers.push(Layer::Dense(Dense::new(last, k, &mut rng)));
                layers
            }
            Architecture::Mlp { hidden } => vec![
                Layer::Dense(Dense::new(config.seq_len * config.embed_dim, *hidden, &mut rng)),
                Layer::Relu(Relu),
                Layer::Dense(Dense::new(*hidden, k, &mut rng)),
            ],
            Architecture::Cnn {
                channels,
                kernel_h,
                kernel_w,
                pool,
            } => {
                let flat = config.cnn_flat_features(*channels, *kernel_h, *kernel_w, *pool);
                vec![
                    Layer::Conv(Conv2d::new(*channels, *kernel_h, *kernel_w, &mut rng)),
                    Layer::Relu(Relu),
                    Layer::Pool(MaxPool2d::new(*pool)?),
                    Layer::Dense(Dense::new(flat, k, &mut rng)),
                ]
            }
            Architecture::BiLstm { layers, hidden } => vec![
                Layer::BiLstm(BiLstm::new(config.embed_dim, *hidden, *layers, &mut rng)),
                Layer::Dense(Dense::new(2 * hidden, k, &mut rng)),
            ],
        };
        let model = Self {
            config,
            embedding,
            trunk,
        };
        model.check_chain()?;
        Ok(model)
    }

    /// Runs a zero input through the trunk to confirm the shapes line up.
    fn check_chain(&self) -> Result<()> {
        let mut x = Tensor::zeros(&[self.config.seq_len, self.config.embed_dim]);
        for (i, layer) in self.trunk.iter().enumerate() {
            if let Layer::Conv(_) | Layer::BiLstm(_) = layer {
                // expensive at full size; shapes checked analytically
                x = match layer {
                    Layer::Conv(c) => {
                        let [ch, oh, ow] = c.output_shape(x.shape()[0], x.shape()[1])?;
                        Tensor::zeros(&[ch, oh, ow])
                    }
                    Layer::BiLstm(l) => Tensor::zeros(&[l.output_dim()]),
                    _ => unreachable!(),
                };
                continue;
            }
            x = layer
                .forward(&x)
                .map_err(|e| Error::Config(format!("layer {i} ({}): {e}", layer.kind())))?
                .0;
        }
        if x.len() != self.config.classes {
            return Err(Error::Config(format!(
                "trunk emits {} values but classes = {}",
                x.len(),
                self.config.classes
            )));
        }
        Ok(())
    }

    /// Assembles a model from existing layers; the chain must match `config`.
    pub fn from_parts(config: ModelConfig, embedding: Embedding, trunk: Vec<Layer>) -> Result<Self> {
        let model = Self {
            config,
            embedding,
            trunk,
        };
        model.check_chain()?;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant()
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn trunk(&self) -> &[Layer] {
        &self.trunk
    }

    pub fn trunk_mut(&mut self) -> &mut [Layer] {
        &mut self.trunk
    }

    /// Exact sum of parameter element counts.
    pub fn count_params(&self, include_embedding: bool) -> usize {
        let trunk: usize = self.trunk.iter().map(Layer::param_count).sum();
        if include_embedding {
            trunk + self.embedding.table().len()
        } else {
            trunk
        }
    }

    /// Parameters in build order with stable names.
    pub fn named_params(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("embedding.table".to_string(), self.embedding.table())];
        for (i, layer) in self.trunk.iter().enumerate() {
            for (name, t) in layer.params() {
                out.push((format!("trunk.{i}.{}.{name}", layer.kind()), t));
            }
        }
        out
    }

    /// Same order as [`Model::named_params`].
    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding.table];
        for layer in &mut self.trunk {
            out.extend(layer.params_mut());
        }
        out
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Sets every weight and bias to zero.
    pub fn zero_parameters(&mut self) {
        for p in self.params_mut() {
            p.fill(0.0);
        }
    }

    /// SHA-256 over all parameter bits in build order.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for (_, t) in self.named_params() {
            for v in t.data() {
                hasher.update(v.to_le_bytes());
            }
        }
        hex(&hasher.finalize())
    }

    fn check_input(&self, ids: &[u32]) -> Result<()> {
        if ids.len() != self.config.seq_len {
            return Err(Error::arg(format!(
                "expected {} token ids, got {}",
                self.config.seq_len,
                ids.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, ids: &[u32]) -> Result<(Tensor, Trace)> {
        self.check_input(ids)?;
        let mut x = self.embedding.forward(ids)?;
        let mut caches = Vec::with_capacity(self.trunk.len());
        for layer in &self.trunk {
            let (y, cache) = layer.forward(&x)?;
            caches.push(cache);
            x = y;
        }
        Ok((
            x,
            Trace {
                ids: ids.to_vec(),
                caches,
            },
        ))
    }

    /// Accumulates gradients of every parameter given `d loss / d logits`.
    pub fn backward(&mut self, trace: &Trace, grad_logits: &Tensor) -> Result<()> {
        let mut g = grad_logits.clone();
        for (layer, cache) in self.trunk.iter_mut().zip(&trace.caches).rev() {
            g = layer.backward(cache, &g)?;
        }
        self.embedding.backward(&trace.ids, &g)
    }

    pub fn predict(&self, ids: &[u32]) -> Result<Prediction> {
        let (logits, _) = self.forward(ids)?;
        let class = argmax(logits.data());
        Ok(Prediction { logits, class })
    }

    fn swarm_filters(&self) -> Result<Vec<&SwarmFilter>> {
        if self.variant() != Variant::Scnn {
            return Err(Error::arg(format!(
                "operation needs an SCNN model, got {}",
                self.variant()
            )));
        }
        Ok(self
            .trunk
            .iter()
            .filter_map(|l| match l {
                Layer::Swarm(s) => Some(s),
                _ => None,
            })
            .collect())
    }

    fn classifier(&self) -> &Dense {
        match self.trunk.last() {
            Some(Layer::Dense(d)) => d,
            _ => unreachable!("every trunk ends in a dense classifier"),
        }
    }

    fn post_filter_relu(&self) -> bool {
        matches!(
            self.config.arch,
            Architecture::Scnn {
                post_filter_relu: true,
                ..
            }
        )
    }

    /// Output of the last swarm filter, before any activation.
    pub fn last_swarm_features(&self, ids: &[u32]) -> Result<Tensor> {
        self.swarm_filters()?;
        self.check_input(ids)?;
        let mut x = self.embedding.forward(ids)?;
        let mut last = None;
        for layer in &self.trunk {
            let (y, _) = layer.forward(&x)?;
            if let Layer::Swarm(_) = layer {
                last = Some(y.clone());
            }
            x = y;
        }
        Ok(last.expect("SCNN has a swarm filter"))
    }

    /// SCNN logits computed straight from the filter means, without the layers.
    ///
    /// Each swarm filter multiplies the running scalar by the mean of its
    /// weights, so the final features are `c * s_last`. With post-filter ReLU
    /// the positive or negative part of each filter is averaged instead,
    /// depending on the sign of the scalar.
    pub fn scnn_closed_form(&self, ids: &[u32]) -> Result<Tensor> {
        let filters = self.swarm_filters()?;
        self.check_input(ids)?;
        let embedded = self.embedding.forward(ids)?;
        let relu = self.post_filter_relu();
        let mut c = embedded.mean();
        let (head, last) = filters.split_at(filters.len() - 1);
        for f in head {
            c *= filter_mean(f.weights().data(), c, relu);
        }
        let s_last = last[0].weights().data();
        let features: Vec<f64> = s_last
            .iter()
            .map(|s| {
                let v = c * s;
                if relu {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect();
        let dense = self.classifier();
        let n_in = dense.inputs();
        let logits = dense
            .weight()
            .data()
            .chunks_exact(n_in)
            .zip(dense.bias().data())
            .map(|(row, b)| crate::tensor::dot(row, &features) + b)
            .collect();
        Ok(Tensor::from_vec(logits))
    }
}

fn filter_mean(s: &[f64], c: f64, relu: bool) -> f64 {
    let n = s.len() as f64;
    if !relu {
        return crate::tensor::sum(s) / n;
    }
    let part: Vec<f64> = s
        .iter()
        .map(|&v| if c >= 0.0 { v.max(0.0) } else { v.min(0.0) })
        .collect();
    crate::tensor::sum(&part) / n
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
