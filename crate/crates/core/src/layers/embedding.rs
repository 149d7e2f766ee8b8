use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::Tensor;

/// Token embedding table `[vocab, dim]`. Row 0 is the padding token.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub(crate) table: Tensor,
}

impl Embedding {
    /// Uniform(-0.05, 0.05) rows, with the padding row left at zero.
    pub fn new(vocab: usize, dim: usize, rng: &mut Prng) -> Self {
        let mut data: Vec<f64> = (0..vocab * dim).map(|_| rng.uniform(-0.05, 0.05)).collect();
        data[..dim].iter_mut().for_each(|v| *v = 0.0);
        Self {
            table: Tensor::new(&[vocab, dim], data).expect("embedding shape"),
        }
    }

    pub fn from_table(table: Tensor) -> Result<Self> {
        if table.rank() != 2 {
            return Err(Error::shape(format!(
                "embedding table must be rank 2, got {:?}",
                table.shape()
            )));
        }
        Ok(Self { table })
    }

    pub fn vocab_size(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.shape()[1]
    }

    pub fn table(&self) -> &Tensor {
        &self.table
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::arg("embedding lookup on an empty sequence"));
        }
        let vocab = self.vocab_size();
        if let Some((pos, id)) = ids.iter().enumerate().find(|(_, &id)| id as usize >= vocab) {
            return Err(Error::arg(format!(
                "token id {id} at position {pos} is outside the vocabulary of {vocab}"
            )));
        }
        Ok(())
    }

    /// Rows `table[ids[0]] .. table[ids[L-1]]` stacked into `[L, dim]`.
    pub fn forward(&self, ids: &[u32]) -> Result<Tensor> {
        self.check_ids(ids)?;
        let dim = self.dim();
        let mut out = Vec::with_capacity(ids.len() * dim);
        for &id in ids {
            let row = id as usize * dim;
            out.extend_from_slice(&self.table.data()[row..row + dim]);
        }
        Tensor::new(&[ids.len(), dim], out)
    }

    /// Scatter-adds each upstream row into the gradient of its token's row.
    pub fn backward(&mut self, ids: &[u32], grad_out: &Tensor) -> Result<()> {
        self.check_ids(ids)?;
        let dim = self.dim();
        if grad_out.len() != ids.len() * dim {
            return Err(Error::shape(format!(
                "embedding backward: expected {} gradient elements, got {}",
                ids.len() * dim,
                grad_out.len()
            )));
        }
        let grad = self.table.grad_mut();
        for (&id, g) in ids.iter().zip(grad_out.data().chunks_exact(dim)) {
            let row = &mut grad[id as usize * dim..(id as usize + 1) * dim];
            for (r, v) in row.iter_mut().zip(g) {
                *r += v;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Embedding {
        Embedding::from_table(Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap()
    }

    #[test]
    fn lookup_concatenates_rows() {
        let e = small();
        let out = e.forward(&[1, 0]).unwrap();
        assert_eq!(out.shape(), &[2, 2]);
        assert_eq!(out.data(), &[3.0, 4.0, 1.0, 2.0]);
    }

    #[test]
    fn repeated_ids_accumulate() {
        let mut e = small();
        let g = Tensor::matrix(2, 2, vec![1.0, 2.0, 10.0, 20.0]).unwrap();
        e.backward(&[0, 0], &g).unwrap();
        assert_eq!(e.table.grad().unwrap(), &[11.0, 22.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_id_names_position() {
        let err = small().forward(&[0, 1, 5]).unwrap_err().to_string();
        assert!(err.contains("position 2"), "{err}");
    }

    #[test]
    fn padding_row_starts_at_zero() {
        let e = Embedding::new(5, 3, &mut Prng::new(1));
        assert!(e.table.data()[..3].iter().all(|&v| v == 0.0));
        assert!(e.table.data()[3..].iter().any(|&v| v != 0.0));
    }
}
