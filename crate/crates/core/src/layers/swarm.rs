//! Swarm filter: a weight vector `s` of size `m` that maps an input `x` of
//! size `n` to the column means of `x ⊗ s`, which collapses to `mean(x) * s`.

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::{dot, sum, Tensor};

/// Swarm features of `x` under filter `s`, via the collapsed form.
pub fn swarm_features(x: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::arg("swarm filter input is empty"));
    }
    let mean = sum(x) / x.len() as f64;
    Ok(s.iter().map(|sj| mean * sj).collect())
}

#[derive(Debug, Clone)]
pub struct SwarmFilter {
    pub(crate) s: Tensor,
}

#[derive(Debug, Clone)]
pub struct SwarmCache {
    input_shape: Vec<usize>,
    input_mean: f64,
}

impl SwarmFilter {
    pub fn new(width: usize, rng: &mut Prng) -> Self {
        // a 1-D weight counts its width as both fans
        let data = super::glorot_uniform(width, width, width, rng);
        Self {
            s: Tensor::from_vec(data),
        }
    }

    pub fn from_weights(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::arg("swarm filter needs at least one weight"));
        }
        Ok(Self {
            s: Tensor::from_vec(s),
        })
    }

    pub fn width(&self) -> usize {
        self.s.len()
    }

    pub fn weights(&self) -> &Tensor {
        &self.s
    }

    /// Treats the whole input as one flat vector.
    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, SwarmCache)> {
        let input_mean = x.mean();
        let out = self.s.data().iter().map(|sj| input_mean * sj).collect();
        Ok((
            Tensor::from_vec(out),
            SwarmCache {
                input_shape: x.shape().to_vec(),
                input_mean,
            },
        ))
    }

    pub fn backward(&mut self, cache: &SwarmCache, grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.len() != self.s.len() {
            return Err(Error::shape(format!(
                "swarm filter backward: gradient has {} elements, filter has {}",
                grad_out.len(),
                self.s.len()
            )));
        }
        let n: usize = cache.input_shape.iter().product();
        let (s, ds) = self.s.data_and_grad_mut();
        for (d, g) in ds.iter_mut().zip(grad_out.data()) {
            *d += g * cache.input_mean;
        }
        // every input element receives the same share
        let shared = dot(grad_out.data(), s) / n as f64;
        Tensor::new(&cache.input_shape, vec![shared; n])
    }
}
