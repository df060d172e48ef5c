use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Row-major vectorization of the off-diagonal entries of an `n x n` matrix.
///
/// Ordered pairs `(i, j)` with `i != j` map bijectively onto slots
/// `0..n(n-1)`: row `i` contributes slots `i(n-1)..(i+1)(n-1)` holding the
/// columns `j != i` in increasing order. Every module shares this index so
/// that vector positions mean the same edge everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!(
                "edge index needs at least 2 nodes, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Node count.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge count `N = n(n-1)`.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.n * (self.n - 1)
    }

    /// Slot of the ordered pair `(i, j)`, `i != j`.
    #[inline]
    pub fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.n && j < self.n);
        i * (self.n - 1) + if j < i { j } else { j - 1 }
    }

    /// Ordered pair stored at `slot`.
    #[inline]
    pub fn pair(&self, slot: usize) -> (usize, usize) {
        debug_assert!(slot < self.num_edges());
        let i = slot / (self.n - 1);
        let r = slot % (self.n - 1);
        let j = if r < i { r } else { r + 1 };
        (i, j)
    }

    /// Iterate slots in order together with their `(i, j)` pairs.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, (usize, usize))> + '_ {
        (0..self.num_edges()).map(move |s| (s, self.pair(s)))
    }

    /// Off-diagonal entries of `m`, in slot order.
    pub fn vectorize(&self, m: &ArrayView2<f64>) -> Array1<f64> {
        assert_eq!(m.shape(), [self.n, self.n]);
        let mut out = Array1::zeros(self.num_edges());
        for (s, (i, j)) in self.iter_pairs() {
            out[s] = m[[i, j]];
        }
        out
    }

    /// Rebuild the `n x n` matrix from a slot vector, zero on the diagonal.
    pub fn devectorize(&self, v: &ArrayView1<f64>) -> Array2<f64> {
        assert_eq!(v.len(), self.num_edges());
        let mut out = Array2::zeros((self.n, self.n));
        for (s, (i, j)) in self.iter_pairs() {
            out[[i, j]] = v[s];
        }
        out
    }
}
