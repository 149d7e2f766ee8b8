//! Max pooling with a square window, stride equal to the window, and partial
//! edge windows kept (ceil mode).

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxPool2d {
    window: usize,
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    input_shape: Vec<usize>,
    /// flat input index of each output's maximum
    winners: Vec<usize>,
}

pub fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

impl MaxPool2d {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::arg("pooling window must be at least 1"));
        }
        Ok(Self { window })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn planes(input: &Tensor) -> Result<(usize, usize, usize)> {
        match *input.shape() {
            [h, w] => Ok((1, h, w)),
            [c, h, w] => Ok((c, h, w)),
            ref s => Err(Error::shape(format!(
                "max pool input must be [H, W] or [C, H, W], got {s:?}"
            ))),
        }
    }

    pub fn output_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (ceil_div(h, self.window), ceil_div(w, self.window))
    }

    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, PoolCache)> {
        let (c, h, w) = Self::planes(input)?;
        let (ph, pw) = self.output_dims(h, w);
        let k = self.window;
        let x = input.data();
        let mut out = Vec::with_capacity(c * ph * pw);
        let mut winners = Vec::with_capacity(c * ph * pw);
        for ch in 0..c {
            let base = ch * h * w;
            for py in 0..ph {
                for px in 0..pw {
                    let mut best = base + py * k * w + px * k;
                    for y in py * k..((py + 1) * k).min(h) {
                        for xx in px * k..((px + 1) * k).min(w) {
                            let idx = base + y * w + xx;
                            if x[idx] > x[best] {
                                best = idx;
                            }
                        }
                    }
                    out.push(x[best]);
                    winners.push(best);
                }
            }
        }
        let shape: Vec<usize> = if input.rank() == 2 {
            vec![ph, pw]
        } else {
            vec![c, ph, pw]
        };
        Ok((
            Tensor::new(&shape, out)?,
            PoolCache {
                input_shape: input.shape().to_vec(),
                winners,
            },
        ))
    }

    pub fn backward(&self, cache: &PoolCache, grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.len() != cache.winners.len() {
            return Err(Error::shape(format!(
                "max pool backward: expected {} gradient elements, got {}",
                cache.winners.len(),
                grad_out.len()
            )));
        }
        let mut dx = Tensor::zeros(&cache.input_shape);
        let d = dx.data_mut();
        for (&idx, g) in cache.winners.iter().zip(grad_out.data()) {
            d[idx] += g;
        }
        Ok(dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_to_one() {
        let p = MaxPool2d::new(2).unwrap();
        let (y, _) = p
            .forward(&Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap())
            .unwrap();
        assert_eq!(y.shape(), &[1, 1]);
        assert_eq!(y.data(), &[4.0]);
    }

    #[test]
    fn ceil_mode_keeps_partial_windows() {
        let p = MaxPool2d::new(20).unwrap();
        assert_eq!(p.output_dims(41, 1), (3, 1));
        let data: Vec<f64> = (0..41).map(f64::from).collect();
        let (y, _) = p
            .forward(&Tensor::new(&[1, 41, 1], data).unwrap())
            .unwrap();
        assert_eq!(y.shape(), &[1, 3, 1]);
        assert_eq!(y.data(), &[19.0, 39.0, 40.0]);
    }

    #[test]
    fn ties_route_to_first_occurrence() {
        let p = MaxPool2d::new(2).unwrap();
        let (_, cache) = p
            .forward(&Tensor::matrix(2, 2, vec![5.0, 5.0, 5.0, 5.0]).unwrap())
            .unwrap();
        let dx = p.backward(&cache, &Tensor::matrix(1, 1, vec![3.0]).unwrap()).unwrap();
        assert_eq!(dx.data(), &[3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn routing_conserves_gradient_mass() {
        let mut rng = crate::rng::Prng::new(11);
        let p = MaxPool2d::new(3).unwrap();
        let input = Tensor::new(&[2, 7, 5], (0..70).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let (y, cache) = p.forward(&input).unwrap();
        let g = Tensor::new(y.shape(), (0..y.len()).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let dx = p.backward(&cache, &g).unwrap();
        let total: f64 = g.data().iter().sum();
        let routed: f64 = dx.data().iter().sum();
        assert!((total - routed).abs() < 1e-12);
    }

    #[test]
    fn zero_window_rejected() {
        assert!(MaxPool2d::new(0).is_err());
    }
}
