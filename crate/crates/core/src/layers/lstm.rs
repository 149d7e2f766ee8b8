//! Stacked bidirectional LSTM with hand-written backpropagation through time.
//!
//! Each direction of each layer owns `w_ih [4h, in]`, `w_hh [4h, h]` and two
//! bias vectors `b_ih`, `b_hh` of length `4h`. Gate rows are ordered
//! input, forget, cell candidate, output. Layer `k > 0` reads the `2h`-wide
//! concatenation of both directions of layer `k - 1`. The layer's output is
//! the forward direction's last state joined with the backward direction's
//! last state (which sits at sequence position 0).

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::{dot, Tensor};

#[derive(Debug, Clone)]
pub struct LstmCell {
    pub(crate) w_ih: Tensor,
    pub(crate) w_hh: Tensor,
    pub(crate) b_ih: Tensor,
    pub(crate) b_hh: Tensor,
}

impl LstmCell {
    fn new(input: usize, hidden: usize, rng: &mut Prng) -> Self {
        let mut init = |rows: usize, cols: usize| {
            let data = super::glorot_uniform(rows * cols, cols, rows, rng);
            Tensor::matrix(rows, cols, data).expect("lstm shape")
        };
        let w_ih = init(4 * hidden, input);
        let w_hh = init(4 * hidden, hidden);
        Self {
            w_ih,
            w_hh,
            b_ih: Tensor::zeros(&[4 * hidden]),
            b_hh: Tensor::zeros(&[4 * hidden]),
        }
    }

    fn hidden(&self) -> usize {
        self.w_hh.shape()[1]
    }

    fn input(&self) -> usize {
        self.w_ih.shape()[1]
    }

    pub fn param_count(&self) -> usize {
        self.w_ih.len() + self.w_hh.len() + self.b_ih.len() + self.b_hh.len()
    }
}

/// Parameters for one direction of one layer: `4 * ((in + h) * h + 2h)`.
pub fn lstm_direction_params(input: usize, hidden: usize) -> usize {
    4 * ((input + hidden) * hidden + 2 * hidden)
}

#[derive(Debug, Clone)]
pub struct BiLstm {
    /// `cells[2 * layer + direction]`, direction 0 = forward, 1 = backward
    pub(crate) cells: Vec<LstmCell>,
    hidden: usize,
}

#[derive(Debug, Clone)]
struct Step {
    pos: usize,
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// activated gates, `[i | f | g | o]`
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    seq_len: usize,
    input_dim: usize,
    /// `steps[cell]` in processing order
    steps: Vec<Vec<Step>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl BiLstm {
    pub fn new(input: usize, hidden: usize, layers: usize, rng: &mut Prng) -> Self {
        let mut cells = Vec::with_capacity(2 * layers);
        for layer in 0..layers {
            let in_dim = if layer == 0 { input } else { 2 * hidden };
            for _ in 0..2 {
                cells.push(LstmCell::new(in_dim, hidden, rng));
            }
        }
        Self { cells, hidden }
    }

    pub fn layers(&self) -> usize {
        self.cells.len() / 2
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn input_dim(&self) -> usize {
        self.cells[0].input()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden
    }

    pub fn cells(&self) -> &[LstmCell] {
        &self.cells
    }

    fn run_direction(cell: &LstmCell, seq: &[Vec<f64>], reverse: bool) -> (Vec<Vec<f64>>, Vec<Step>) {
        let h = cell.hidden();
        let len = seq.len();
        let mut outputs = vec![Vec::new(); len];
        let mut steps = Vec::with_capacity(len);
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let w_ih = cell.w_ih.data();
        let w_hh = cell.w_hh.data();
        let (b_ih, b_hh) = (cell.b_ih.data(), cell.b_hh.data());
        let in_dim = cell.input();
        for t in 0..len {
            let pos = if reverse { len - 1 - t } else { t };
            let x = &seq[pos];
            let mut gates: Vec<f64> = (0..4 * h)
                .map(|r| {
                    dot(&w_ih[r * in_dim..(r + 1) * in_dim], x)
                        + dot(&w_hh[r * h..(r + 1) * h], &h_prev)
                        + b_ih[r]
                        + b_hh[r]
                })
                .collect();
            for (r, z) in gates.iter_mut().enumerate() {
                *z = if (2 * h..3 * h).contains(&r) {
                    z.tanh()
                } else {
                    sigmoid(*z)
                };
            }
            let (i, rest) = gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            let c: Vec<f64> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let h_new: Vec<f64> = (0..h).map(|k| o[k] * tanh_c[k]).collect();
            outputs[pos] = h_new.clone();
            steps.push(Step {
                pos,
                x: x.clone(),
                h_prev: std::mem::replace(&mut h_prev, h_new),
                c_prev: std::mem::replace(&mut c_prev, c),
                gates,
                tanh_c,
            });
        }
        (outputs, steps)
    }

    /// `input` is `[L, d]`; returns the `2h` summary vector.
    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, LstmCache)> {
        if input.rank() != 2 {
            return Err(Error::shape(format!(
                "lstm input must be [L, d], got {:?}",
                input.shape()
            )));
        }
        let (len, dim) = (input.shape()[0], input.shape()[1]);
        if dim != self.input_dim() {
            return Err(Error::shape(format!(
                "lstm expects {}-dim steps, got {dim}",
                self.input_dim()
            )));
        }
        let h = self.hidden;
        let mut seq: Vec<Vec<f64>> = input.data().chunks_exact(dim).map(<[f64]>::to_vec).collect();
        let mut all_steps = Vec::with_capacity(self.cells.len());
        let mut summary = Vec::new();
        for layer in 0..self.layers() {
            let (fwd, fwd_steps) = Self::run_direction(&self.cells[2 * layer], &seq, false);
            let (bwd, bwd_steps) = Self::run_direction(&self.cells[2 * layer + 1], &seq, true);
            summary = [fwd[len - 1].as_slice(), bwd[0].as_slice()].concat();
            seq = fwd
                .into_iter()
                .zip(bwd)
                .map(|(a, b)| [a, b].concat())
                .collect();
            all_steps.push(fwd_steps);
            all_steps.push(bwd_steps);
        }
        debug_assert_eq!(summary.len(), 2 * h);
        Ok((
            Tensor::from_vec(summary),
            LstmCache {
                seq_len: len,
                input_dim: dim,
                steps: all_steps,
            },
        ))
    }

    /// BPTT for one direction. `dh_out[pos]` is the loss gradient flowing into
    /// the hidden state emitted at `pos`. Returns gradients w.r.t. each input step.
    fn direction_backward(cell: &mut LstmCell, steps: &[Step], dh_out: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let h = cell.hidden();
        let in_dim = cell.input();
        let mut dx_seq = vec![vec![0.0; in_dim]; steps.len()];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];

        let w_ih = cell.w_ih.data().to_vec();
        let w_hh = cell.w_hh.data().to_vec();

        for step in steps.iter().rev() {
            let (i, rest) = step.gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            for k in 0..h {
                let dh = dh_out[step.pos][k] + dh_next[k];
                let dc = dc_next[k] + dh * o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
                dz[k] = dc * g[k] * i[k] * (1.0 - i[k]);
                dz[h + k] = dc * step.c_prev[k] * f[k] * (1.0 - f[k]);
                dz[2 * h + k] = dc * i[k] * (1.0 - g[k] * g[k]);
                dz[3 * h + k] = dh * step.tanh_c[k] * o[k] * (1.0 - o[k]);
                dc_next[k] = dc * f[k];
            }

            for (b, d) in cell.b_ih.grad_mut().iter_mut().zip(&dz) {
                *b += d;
            }
            for (b, d) in cell.b_hh.grad_mut().iter_mut().zip(&dz) {
                *b += d;
            }
            let dw_ih = cell.w_ih.grad_mut();
            for (r, &d) in dz.iter().enumerate() {
                for (w, xv) in dw_ih[r * in_dim..(r + 1) * in_dim].iter_mut().zip(&step.x) {
                    *w += d * xv;
                }
            }
            let dw_hh = cell.w_hh.grad_mut();
            for (r, &d) in dz.iter().enumerate() {
                for (w, hv) in dw_hh[r * h..(r + 1) * h].iter_mut().zip(&step.h_prev) {
                    *w += d * hv;
                }
            }

            let dx = &mut dx_seq[step.pos];
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            for (r, &d) in dz.iter().enumerate() {
                for (acc, w) in dx.iter_mut().zip(&w_ih[r * in_dim..(r + 1) * in_dim]) {
                    *acc += d * w;
                }
                for (acc, w) in dh_next.iter_mut().zip(&w_hh[r * h..(r + 1) * h]) {
                    *acc += d * w;
                }
            }
        }
        dx_seq
    }

    pub fn backward(&mut self, cache: &LstmCache, grad_out: &Tensor) -> Result<Tensor> {
        let h = self.hidden;
        if grad_out.len() != 2 * h {
            return Err(Error::shape(format!(
                "lstm backward: expected {} gradient elements, got {}",
                2 * h,
                grad_out.len()
            )));
        }
        let len = cache.seq_len;
        let g = grad_out.data();
        let mut dh_fwd = vec![vec![0.0; h]; len];
        let mut dh_bwd = vec![vec![0.0; h]; len];
        dh_fwd[len - 1].copy_from_slice(&g[..h]);
        dh_bwd[0].copy_from_slice(&g[h..]);

        let mut dx_seq = Vec::new();
        for layer in (0..self.layers()).rev() {
            let dx_f = Self::direction_backward(&mut self.cells[2 * layer], &cache.steps[2 * layer], &dh_fwd);
            let dx_b = Self::direction_backward(
                &mut self.cells[2 * layer + 1],
                &cache.steps[2 * layer + 1],
                &dh_bwd,
            );
            dx_seq = dx_f
                .into_iter()
                .zip(dx_b)
                .map(|(a, b)| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<f64>>())
                .collect();
            if layer > 0 {
                for (pos, d) in dx_seq.iter().enumerate() {
                    dh_fwd[pos].copy_from_slice(&d[..h]);
                    dh_bwd[pos].copy_from_slice(&d[h..]);
                }
            }
        }
        Tensor::new(&[len, cache.input_dim], dx_seq.concat())
    }
}
