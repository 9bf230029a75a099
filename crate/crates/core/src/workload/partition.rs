use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::mapper::ClusterShape;

/// Reshaped weights of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub layer: usize,
    pub values: DMatrix<f64>,
}

impl WeightMatrix {
    pub fn new(layer: usize, values: DMatrix<f64>) -> Self {
        Self { layer, values }
    }

    pub fn random<R: Rng + ?Sized>(layer: usize, rows: usize, cols: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (cols.max(1) as f64).sqrt();
        let values = DMatrix::from_fn(rows, cols, |_, _| {
            scale * rng.sample::<f64, _>(StandardNormal)
        });
        Self { layer, values }
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// A weight matrix cut into zero-padded `k × k` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub layer: usize,
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub rows_mod: usize,
    pub cols_mod: usize,
    /// Row-major over `(block_row, block_col)`.
    pub blocks: Vec<DMatrix<f64>>,
}

impl Cluster {
    pub fn block(&self, block_row: usize, block_col: usize) -> &DMatrix<f64> {
        &self.blocks[block_row * self.cols_mod + block_col]
    }

    pub fn block_mut(&mut self, block_row: usize, block_col: usize) -> &mut DMatrix<f64> {
        &mut self.blocks[block_row * self.cols_mod + block_col]
    }

    pub fn shape(&self, id: usize) -> ClusterShape {
        ClusterShape::new(id, self.layer, self.rows, self.cols, self.k)
    }

    /// Puts the blocks back together and crops the padding.
    pub fn reassemble(&self) -> WeightMatrix {
        let k = self.k;
        let values = DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.block(i / k, j / k)[(i % k, j % k)]
        });
        WeightMatrix::new(self.layer, values)
    }
}

pub fn partition(w: &WeightMatrix, k: usize) -> Result<Cluster> {
    if k < 2 {
        return Err(GoaError::InvalidArch(format!("module size {k} is below 2")));
    }
    let (rows, cols) = (w.rows(), w.cols());
    let rows_mod = rows.div_ceil(k);
    let cols_mod = cols.div_ceil(k);
    let mut blocks = Vec::with_capacity(rows_mod * cols_mod);
    for br in 0..rows_mod {
        for bc in 0..cols_mod {
            blocks.push(DMatrix::from_fn(k, k, |i, j| {
                let (r, c) = (br * k + i, bc * k + j);
                if r < rows && c < cols {
                    w.values[(r, c)]
                } else {
                    0.0
                }
            }));
        }
    }
    Ok(Cluster {
        layer: w.layer,
        k,
        rows,
        cols,
        rows_mod,
        cols_mod,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vgg_layer_block_count() {
        let w = WeightMatrix::new(6, DMatrix::zeros(256, 1152));
        let c = partition(&w, 63).unwrap();
        assert_eq!((c.rows_mod, c.cols_mod), (5, 19));
    }

    #[test]
    fn square_is_single_block() {
        let w = WeightMatrix::new(0, DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64));
        let c = partition(&w, 4).unwrap();
        assert_eq!(c.blocks.len(), 1);
        assert_eq!(c.blocks[0], w.values);
    }

    #[test]
    fn padding_and_reassembly() {
        let w = WeightMatrix::new(0, DMatrix::from_fn(4, 5, |i, j| 1.0 + (i * 5 + j) as f64));
        let c = partition(&w, 3).unwrap();
        assert_eq!((c.rows_mod, c.cols_mod), (2, 2));
        let corner = c.block(1, 1);
        assert_eq!(corner[(0, 0)], w.values[(3, 3)]);
        assert_eq!(corner[(0, 2)], 0.0);
        assert_eq!(corner[(1, 0)], 0.0);
        assert_eq!(c.reassemble(), w);
    }
}
