//! Differentiable layers with hand-derived backward passes.
//!
//! Every layer follows the same contract: `forward` returns the output and a
//! cache, and `backward` consumes that cache plus the upstream gradient,
//! accumulates parameter gradients into each parameter's gradient buffer, and
//! returns the gradient with respect to the input (same shape as the input).

mod conv;
mod dense;
mod embedding;
mod lstm;
mod pool;
mod relu;
mod swarm;

pub use conv::{Conv2d, ConvCache};
pub use dense::{Dense, DenseCache};
pub use embedding::Embedding;
pub use lstm::{lstm_direction_params, BiLstm, LstmCache, LstmCell};
pub use pool::{ceil_div, MaxPool2d, PoolCache};
pub use relu::{Relu, ReluCache};
pub use swarm::{swarm_features, SwarmCache, SwarmFilter};

use crate::error::Result;
use crate::rng::Prng;
use crate::tensor::Tensor;

/// Glorot (Xavier) uniform bound, `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

pub(crate) fn glorot_uniform(len: usize, fan_in: usize, fan_out: usize, rng: &mut Prng) -> Vec<f64> {
    let limit = glorot_limit(fan_in, fan_out);
    (0..len).map(|_| rng.uniform(-limit, limit)).collect()
}

#[derive(Debug, Clone)]
pub enum Layer {
    Swarm(SwarmFilter),
    Dense(Dense),
    Conv(Conv2d),
    Pool(MaxPool2d),
    Relu(Relu),
    BiLstm(BiLstm),
}

#[derive(Debug, Clone)]
pub enum Cache {
    Swarm(SwarmCache),
    Dense(DenseCache),
    Conv(ConvCache),
    Pool(PoolCache),
    Relu(ReluCache),
    BiLstm(LstmCache),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Swarm(_) => "swarm",
            Layer::Dense(_) => "dense",
            Layer::Conv(_) => "conv",
            Layer::Pool(_) => "maxpool",
            Layer::Relu(_) => "relu",
            Layer::BiLstm(_) => "bilstm",
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, Cache)> {
        Ok(match self {
            Layer::Swarm(l) => l.forward(x).map(|(y, c)| (y, Cache::Swarm(c)))?,
            Layer::Dense(l) => l.forward(x).map(|(y, c)| (y, Cache::Dense(c)))?,
            Layer::Conv(l) => l.forward(x).map(|(y, c)| (y, Cache::Conv(c)))?,
            Layer::Pool(l) => l.forward(x).map(|(y, c)| (y, Cache::Pool(c)))?,
            Layer::Relu(l) => l.forward(x).map(|(y, c)| (y, Cache::Relu(c)))?,
            Layer::BiLstm(l) => l.forward(x).map(|(y, c)| (y, Cache::BiLstm(c)))?,
        })
    }

    /// Panics if `cache` came from a different kind of layer.
    pub fn backward(&mut self, cache: &Cache, grad_out: &Tensor) -> Result<Tensor> {
        match (self, cache) {
            (Layer::Swarm(l), Cache::Swarm(c)) => l.backward(c, grad_out),
            (Layer::Dense(l), Cache::Dense(c)) => l.backward(c, grad_out),
            (Layer::Conv(l), Cache::Conv(c)) => l.backward(c, grad_out),
            (Layer::Pool(l), Cache::Pool(c)) => l.backward(c, grad_out),
            (Layer::Relu(l), Cache::Relu(c)) => l.backward(c, grad_out),
            (Layer::BiLstm(l), Cache::BiLstm(c)) => l.backward(c, grad_out),
            (layer, _) => panic!("cache does not belong to a {} layer", layer.kind()),
        }
    }

    /// Named parameters in a fixed order.
    pub fn params(&self) -> Vec<(String, &Tensor)> {
        match self {
            Layer::Swarm(l) => vec![("s".into(), &l.s)],
            Layer::Dense(l) => vec![("weight".into(), &l.weight), ("bias".into(), &l.bias)],
            Layer::Conv(l) => vec![("kernels".into(), &l.kernels), ("bias".into(), &l.bias)],
            Layer::Pool(_) | Layer::Relu(_) => Vec::new(),
            Layer::BiLstm(l) => l
                .cells
                .iter()
                .enumerate()
                .flat_map(|(k, c)| {
                    let tag = format!("l{}.{}", k / 2, if k % 2 == 0 { "fwd" } else { "bwd" });
                    [
                        (format!("{tag}.w_ih"), &c.w_ih),
                        (format!("{tag}.w_hh"), &c.w_hh),
                        (format!("{tag}.b_ih"), &c.b_ih),
                        (format!("{tag}.b_hh"), &c.b_hh),
                    ]
                })
                .collect(),
        }
    }

    /// Same order as [`Layer::params`].
    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Swarm(l) => vec![&mut l.s],
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Conv(l) => vec![&mut l.kernels, &mut l.bias],
            Layer::Pool(_) | Layer::Relu(_) => Vec::new(),
            Layer::BiLstm(l) => l
                .cells
                .iter_mut()
                .flat_map(|c| [&mut c.w_ih, &mut c.w_hh, &mut c.b_ih, &mut c.b_hh])
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|(_, t)| t.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_start_inside_glorot_bounds() {
        let mut rng = Prng::new(3);
        let s = SwarmFilter::new(300, &mut rng);
        let bound = (3.0f64 / 300.0).sqrt();
        assert!(s.weights().data().iter().all(|v| v.abs() < bound));
        assert!(s.weights().data().iter().any(|v| v.abs() > 0.8 * bound));
        let d = Dense::new(10, 2, &mut rng);
        assert!(d.weight().data().iter().all(|v| v.abs() < glorot_limit(10, 2)));
        assert!(d.bias().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn param_count_is_additive() {
        let mut rng = Prng::new(0);
        let layers = vec![
            Layer::Swarm(SwarmFilter::new(300, &mut rng)),
            Layer::Swarm(SwarmFilter::new(10, &mut rng)),
            Layer::Dense(Dense::new(10, 2, &mut rng)),
        ];
        let total: usize = layers.iter().map(Layer::param_count).sum();
        assert_eq!(total, 332);
    }

    #[test]
    fn bilstm_counts() {
        let net = Layer::BiLstm(BiLstm::new(100, 128, 2, &mut Prng::new(0)));
        let expected = 2 * lstm_direction_params(100, 128) + 2 * lstm_direction_params(256, 128);
        assert_eq!(net.param_count(), expected);
        assert_eq!(expected, 630_784);
    }

    #[test]
    fn params_and_params_mut_agree() {
        let mut layer = Layer::BiLstm(BiLstm::new(3, 2, 2, &mut Prng::new(0)));
        let shapes: Vec<Vec<usize>> = layer.params().iter().map(|(_, t)| t.shape().to_vec()).collect();
        let shapes_mut: Vec<Vec<usize>> = layer.params_mut().iter().map(|t| t.shape().to_vec()).collect();
        assert_eq!(shapes, shapes_mut);
    }
}
