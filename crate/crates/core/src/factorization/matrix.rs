use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Ratings live in [0,1] internally and are shown on a 0–10 scale.
pub const DISPLAY_SCALE: f64 = 10.0;

pub fn to_display<T: Scalar>(score: T) -> T {
    score * T::lit(DISPLAY_SCALE)
}

/// Dense storage for a sparsely observed cluster × drug rating matrix.
/// `values` is zero wherever `mask` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SparseRatingMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<T>,
    pub mask: Vec<u8>,
    /// Number of raw ratings averaged into each cell.
    pub counts: Vec<u32>,
}

impl<T: Scalar> SparseRatingMatrix<T> {
    pub fn empty(rows: usize, cols: usize) -> Self {
        SparseRatingMatrix {
            rows,
            cols,
            values: vec![T::zero(); rows * cols],
            mask: vec![0; rows * cols],
            counts: vec![0; rows * cols],
        }
    }

    /// Builds from a dense grid where `None` marks an unobserved cell.
    pub fn from_cells(cells: &[Vec<Option<T>>]) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        let mut m = Self::empty(rows, cols);
        for (i, row) in cells.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::arg(format!(
                    "row {i} has {} cells, expected {cols}",
                    row.len()
                )));
            }
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    m.set(i, j, *v);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.idx(i, j);
        self.values[k] = value;
        self.mask[k] = 1;
        self.counts[k] = self.counts[k].max(1);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let k = self.idx(i, j);
        (self.mask[k] == 1).then(|| self.values[k])
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[self.idx(i, j)] == 1
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }

    /// Observed `(row, col, value)` triples in row-major order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows * self.cols)
            .filter(|&k| self.mask[k] == 1)
            .map(|k| (k / self.cols, k % self.cols, self.values[k]))
    }

    pub fn check(&self) -> Result<()> {
        let n = self.rows * self.cols;
        if self.values.len() != n || self.mask.len() != n || self.counts.len() != n {
            return Err(Error::arg("rating matrix buffers do not match its shape"));
        }
        if self.mask.iter().any(|&m| m > 1) {
            return Err(Error::arg("rating mask must be binary"));
        }
        Ok(())
    }
}
