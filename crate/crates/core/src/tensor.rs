//! Dense row-major `f64` tensors and the handful of kernels the layers need.
//!
//! Every reduction walks its operands in ascending index order, so repeated
//! calls on identical inputs are bit-identical.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        check_shape(shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::shape(format!(
                "shape {shape:?} needs {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
            grad: None,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        check_shape(shape).expect("zeros: invalid shape");
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
            grad: None,
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "from_vec: empty data");
        Self {
            shape: vec![data.len()],
            data,
            grad: None,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(&[rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Same elements under a new shape with equal element count.
    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data,
            grad: self.grad,
        })
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    /// Gradient buffer, allocated as zeros on first use.
    pub fn grad_mut(&mut self) -> &mut [f64] {
        let len = self.data.len();
        self.grad.get_or_insert_with(|| vec![0.0; len])
    }

    /// Value and gradient buffers borrowed together.
    pub fn data_and_grad_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let len = self.data.len();
        let grad = self.grad.get_or_insert_with(|| vec![0.0; len]);
        (&mut self.data, grad)
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn mean(&self) -> f64 {
        sum(&self.data) / self.data.len() as f64
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::shape(format!(
            "dimensions must be positive, got {shape:?}"
        )));
    }
    Ok(())
}

fn require_rank(t: &Tensor, rank: usize, what: &str) -> Result<()> {
    if t.rank() != rank {
        return Err(Error::shape(format!(
            "{what} must be rank {rank}, got shape {:?}",
            t.shape()
        )));
    }
    Ok(())
}

/// Sequential left-to-right sum.
pub fn sum(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `result[i, j] = x[i] * s[j]`.
pub fn outer(x: &Tensor, s: &Tensor) -> Result<Tensor> {
    require_rank(x, 1, "outer: left operand")?;
    require_rank(s, 1, "outer: right operand")?;
    let mut data = Vec::with_capacity(x.len() * s.len());
    for &xi in x.data() {
        data.extend(s.data().iter().map(|&sj| xi * sj));
    }
    Tensor::new(&[x.len(), s.len()], data)
}

/// `result[j] = (1/n) * sum_i t[i, j]`, accumulated in ascending `i`.
pub fn column_mean(t: &Tensor) -> Result<Tensor> {
    require_rank(t, 2, "column_mean: input")?;
    let (rows, cols) = (t.shape()[0], t.shape()[1]);
    let mut acc = vec![0.0; cols];
    for row in t.data().chunks_exact(cols) {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let inv = rows as f64;
    acc.iter_mut().for_each(|a| *a /= inv);
    Tensor::new(&[cols], acc)
}

pub fn matvec(w: &Tensor, x: &Tensor) -> Result<Tensor> {
    require_rank(w, 2, "matvec: matrix")?;
    let (rows, cols) = (w.shape()[0], w.shape()[1]);
    if x.len() != cols {
        return Err(Error::shape(format!(
            "matvec: matrix is {rows}x{cols} but vector has {} elements",
            x.len()
        )));
    }
    let out = w
        .data()
        .chunks_exact(cols)
        .map(|row| dot(row, x.data()))
        .collect();
    Tensor::new(&[rows], out)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "add: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor::new(a.shape(), data)
}

pub fn scale(t: &Tensor, alpha: f64) -> Tensor {
    let data = t.data().iter().map(|v| v * alpha).collect();
    Tensor::new(t.shape(), data).expect("scale preserves shape")
}

pub fn relu(t: &Tensor) -> Tensor {
    let data = t.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::new(t.shape(), data).expect("relu preserves shape")
}

/// Index of the largest element; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Cosine similarity, or `None` when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(dot(a, b) / (na * nb))
}

/// Cross-entropy of `softmax(logits)` against `label`, with its gradient.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if logits.len() < 2 {
        return Err(Error::arg(format!(
            "softmax_cross_entropy needs at least 2 classes, got {}",
            logits.len()
        )));
    }
    if label >= logits.len() {
        return Err(Error::arg(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total = sum(&exps);
    // rounding can leave a tiny negative value; NaN must survive for the caller
    let raw = total.ln() - (logits[label] - max);
    let loss = if raw < 0.0 { 0.0 } else { raw };
    let mut grad: Vec<f64> = exps.iter().map(|e| e / total).collect();
    grad[label] -= 1.0;
    Ok((loss, grad))
}
