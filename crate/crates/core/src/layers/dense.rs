use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::{dot, Tensor};

/// Fully connected `y = W x + b` over the flattened input.
#[derive(Debug, Clone)]
pub struct Dense {
    pub(crate) weight: Tensor,
    pub(crate) bias: Tensor,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, rng: &mut Prng) -> Self {
        let w = super::glorot_uniform(inputs * outputs, inputs, outputs, rng);
        Self {
            weight: Tensor::matrix(outputs, inputs, w).expect("dense shape"),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        if weight.rank() != 2 || bias.rank() != 1 || bias.len() != weight.shape()[0] {
            return Err(Error::shape(format!(
                "dense: weight {:?} and bias {:?} do not fit",
                weight.shape(),
                bias.shape()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn weight(&self) -> &Tensor {
        &self.weight
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, DenseCache)> {
        if x.len() != self.inputs() {
            return Err(Error::shape(format!(
                "dense {}->{}: input has {} elements",
                self.inputs(),
                self.outputs(),
                x.len()
            )));
        }
        let y = self
            .weight
            .data()
            .chunks_exact(self.inputs())
            .zip(self.bias.data())
            .map(|(row, b)| dot(row, x.data()) + b)
            .collect();
        Ok((Tensor::from_vec(y), DenseCache { input: x.clone() }))
    }

    pub fn backward(&mut self, cache: &DenseCache, grad_out: &Tensor) -> Result<Tensor> {
        let (n_in, n_out) = (self.inputs(), self.outputs());
        if grad_out.len() != n_out {
            return Err(Error::shape(format!(
                "dense backward: gradient has {} elements, layer has {n_out} outputs",
                grad_out.len()
            )));
        }
        let x = cache.input.data();
        let g = grad_out.data();
        for (b, gv) in self.bias.grad_mut().iter_mut().zip(g) {
            *b += gv;
        }
        let mut dx = vec![0.0; n_in];
        let (w, dw) = self.weight.data_and_grad_mut();
        for (o, &go) in g.iter().enumerate() {
            let row = o * n_in..(o + 1) * n_in;
            for ((d, xi), (wi, dxi)) in dw[row.clone()]
                .iter_mut()
                .zip(x)
                .zip(w[row].iter().zip(dx.iter_mut()))
            {
                *d += go * xi;
                *dxi += go * wi;
            }
        }
        Tensor::new(cache.input.shape(), dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_through() {
        let d = Dense::from_parts(
            Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
            Tensor::zeros(&[2]),
        )
        .unwrap();
        let (y, _) = d.forward(&Tensor::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(y.data(), &[3.0, 4.0]);
    }

    #[test]
    fn classifier_head_has_22_params() {
        let d = Dense::new(10, 2, &mut Prng::new(0));
        assert_eq!(d.weight.len() + d.bias.len(), 22);
    }

    #[test]
    fn backward_known_values() {
        let mut d = Dense::from_parts(
            Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(),
            Tensor::from_vec(vec![0.5, -0.5]),
        )
        .unwrap();
        let (y, cache) = d.forward(&Tensor::from_vec(vec![1.0, 0.0, -1.0])).unwrap();
        assert_eq!(y.data(), &[-1.5, -2.5]);
        let dx = d.backward(&cache, &Tensor::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(dx.data(), &[9.0, 12.0, 15.0]);
        assert_eq!(d.weight.grad().unwrap(), &[1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
        assert_eq!(d.bias.grad().unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_wrong_input_size() {
        let d = Dense::new(3, 2, &mut Prng::new(0));
        assert!(matches!(
            d.forward(&Tensor::zeros(&[4])),
            Err(Error::Shape(_))
        ));
    }
}
