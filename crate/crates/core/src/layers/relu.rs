use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Relu;

#[derive(Debug, Clone)]
pub struct ReluCache {
    input: Tensor,
}

impl Relu {
    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, ReluCache)> {
        Ok((crate::tensor::relu(x), ReluCache { input: x.clone() }))
    }

    pub fn backward(&self, cache: &ReluCache, grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.len() != cache.input.len() {
            return Err(Error::shape("relu backward: gradient size mismatch"));
        }
        let d = cache
            .input
            .data()
            .iter()
            .zip(grad_out.data())
            .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
            .collect();
        Tensor::new(cache.input.shape(), d)
    }
}
