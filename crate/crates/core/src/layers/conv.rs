//! Single-input-channel 2-D convolution, stride 1, no padding.

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::{dot, Tensor};

#[derive(Debug, Clone)]
pub struct Conv2d {
    /// `[channels, kh, kw]`
    pub(crate) kernels: Tensor,
    pub(crate) bias: Tensor,
}

#[derive(Debug, Clone)]
pub struct ConvCache {
    input: Tensor,
}

impl Conv2d {
    pub fn new(channels: usize, kh: usize, kw: usize, rng: &mut Prng) -> Self {
        // one input channel: fan_in = kh*kw, fan_out = channels*kh*kw
        let k = super::glorot_uniform(channels * kh * kw, kh * kw, channels * kh * kw, rng);
        Self {
            kernels: Tensor::new(&[channels, kh, kw], k).expect("conv shape"),
            bias: Tensor::zeros(&[channels]),
        }
    }

    pub fn from_parts(kernels: Tensor, bias: Tensor) -> Result<Self> {
        if kernels.rank() != 3 || bias.len() != kernels.shape()[0] {
            return Err(Error::shape(format!(
                "conv: kernels {:?} and bias {:?} do not fit",
                kernels.shape(),
                bias.shape()
            )));
        }
        Ok(Self { kernels, bias })
    }

    pub fn channels(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn kernel_size(&self) -> (usize, usize) {
        (self.kernels.shape()[1], self.kernels.shape()[2])
    }

    pub fn output_shape(&self, h: usize, w: usize) -> Result<[usize; 3]> {
        let (kh, kw) = self.kernel_size();
        if kh > h || kw > w {
            return Err(Error::shape(format!(
                "conv kernel {kh}x{kw} is larger than input {h}x{w}"
            )));
        }
        Ok([self.channels(), h - kh + 1, w - kw + 1])
    }

    /// `input` is `[H, W]`; output is `[channels, H-kh+1, W-kw+1]`.
    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, ConvCache)> {
        if input.rank() != 2 {
            return Err(Error::shape(format!(
                "conv input must be [H, W], got {:?}",
                input.shape()
            )));
        }
        let (h, w) = (input.shape()[0], input.shape()[1]);
        let [c, oh, ow] = self.output_shape(h, w)?;
        let (kh, kw) = self.kernel_size();
        let x = input.data();
        let k = self.kernels.data();
        let mut out = Vec::with_capacity(c * oh * ow);
        for ch in 0..c {
            let kernel = &k[ch * kh * kw..(ch + 1) * kh * kw];
            let b = self.bias.data()[ch];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = b;
                    for ky in 0..kh {
                        let xs = (oy + ky) * w + ox;
                        acc += dot(&kernel[ky * kw..(ky + 1) * kw], &x[xs..xs + kw]);
                    }
                    out.push(acc);
                }
            }
        }
        Ok((
            Tensor::new(&[c, oh, ow], out)?,
            ConvCache {
                input: input.clone(),
            },
        ))
    }

    pub fn backward(&mut self, cache: &ConvCache, grad_out: &Tensor) -> Result<Tensor> {
        let (h, w) = (cache.input.shape()[0], cache.input.shape()[1]);
        let [c, oh, ow] = self.output_shape(h, w)?;
        if grad_out.len() != c * oh * ow {
            return Err(Error::shape(format!(
                "conv backward: expected {} gradient elements, got {}",
                c * oh * ow,
                grad_out.len()
            )));
        }
        let (kh, kw) = self.kernel_size();
        let x = cache.input.data();
        let g = grad_out.data();
        let mut dx = vec![0.0; h * w];

        for (ch, db) in self.bias.grad_mut().iter_mut().enumerate() {
            *db += g[ch * oh * ow..(ch + 1) * oh * ow].iter().sum::<f64>();
        }
        let (k, dk) = self.kernels.data_and_grad_mut();
        for ch in 0..c {
            let span = ch * kh * kw..(ch + 1) * kh * kw;
            let kernel = &k[span.clone()];
            let dkernel = &mut dk[span];
            for oy in 0..oh {
                for ox in 0..ow {
                    let go = g[(ch * oh + oy) * ow + ox];
                    if go == 0.0 {
                        continue;
                    }
                    for ky in 0..kh {
                        let xs = (oy + ky) * w + ox;
                        let krow = ky * kw..(ky + 1) * kw;
                        for ((d, xv), (kv, dxv)) in dkernel[krow.clone()]
                            .iter_mut()
                            .zip(&x[xs..xs + kw])
                            .zip(kernel[krow].iter().zip(dx[xs..xs + kw].iter_mut()))
                        {
                            *d += go * xv;
                            *dxv += go * kv;
                        }
                    }
                }
            }
        }
        Tensor::new(&[h, w], dx)
    }
}
