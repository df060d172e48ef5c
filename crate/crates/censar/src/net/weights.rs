use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::net::EdgeIndex;

/// Sparse row-stochastic matrix in CSR form where every stored entry of a
/// row shares a single value (1 for the reciprocity permutation, `1/(n-2)`
/// for the exporter/importer averages).
///
/// Matrix-vector products accumulate the plain sum of the gathered entries
/// and scale once per row, so a row of `m` entries valued `1/m` sums to
/// exactly 1.0 in floating point.
#[derive(Debug, Clone)]
pub struct SparseWeights {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    row_val: Vec<f64>,
}

impl SparseWeights {
    /// Build from per-row column lists and a shared per-row value.
    pub fn from_rows(dim: usize, rows: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if rows.len() != dim {
            return Err(Error::InvalidSize(format!(
                "expected {dim} rows, got {}",
                rows.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut row_val = Vec::with_capacity(dim);
        row_ptr.push(0);
        for (r, (row_cols, val)) in rows.into_iter().enumerate() {
            for &c in &row_cols {
                if c >= dim {
                    return Err(Error::InvalidSize(format!(
                        "column {c} out of range in row {r}"
                    )));
                }
                if c == r {
                    return Err(Error::InvalidArgument(format!(
                        "weight matrix must have zero diagonal, row {r} references itself"
                    )));
                }
            }
            cols.extend_from_slice(&row_cols);
            row_ptr.push(cols.len());
            row_val.push(val);
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            row_val,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Iterate stored entries as `(row, col, value)`.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            self.cols[self.row_ptr[r]..self.row_ptr[r + 1]]
                .iter()
                .map(move |&c| (r, c, self.row_val[r]))
        })
    }

    /// `W x`.
    pub fn matvec(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        assert_eq!(x.len(), self.dim);
        let xs = x.as_slice().expect("contiguous input");
        let mut out = Array1::zeros(self.dim);
        let os = out.as_slice_mut().unwrap();
        for r in 0..self.dim {
            let mut s = 0.0;
            for &c in &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]] {
                s += xs[c];
            }
            os[r] = self.row_val[r] * s;
        }
        out
    }

    /// `W^T x`.
    pub fn t_matvec(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        assert_eq!(x.len(), self.dim);
        let xs = x.as_slice().expect("contiguous input");
        let mut out = Array1::zeros(self.dim);
        let os = out.as_slice_mut().unwrap();
        for r in 0..self.dim {
            let v = self.row_val[r] * xs[r];
            for &c in &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]] {
                os[c] += v;
            }
        }
        out
    }

    /// `dense += scale * W`.
    pub fn add_scaled_to_dense(&self, dense: &mut Array2<f64>, scale: f64) {
        assert_eq!(dense.shape(), [self.dim, self.dim]);
        for r in 0..self.dim {
            let v = scale * self.row_val[r];
            for &c in &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]] {
                dense[[r, c]] += v;
            }
        }
    }

    /// Row sums computed the same way as `matvec` on the all-ones vector.
    pub fn row_sums(&self) -> Array1<f64> {
        Array1::from_iter((0..self.dim).map(|r| {
            let count = (self.row_ptr[r + 1] - self.row_ptr[r]) as f64;
            self.row_val[r] * count
        }))
    }
}

/// The `q` row-normalized endogenous-effect matrices sharing one
/// [`EdgeIndex`].
#[derive(Debug, Clone)]
pub struct WeightSet {
    edge_index: EdgeIndex,
    weights: Vec<SparseWeights>,
    labels: Vec<String>,
}

impl WeightSet {
    /// Assemble from parts, validating dimensions, zero diagonals, and exact
    /// row normalization.
    pub fn from_parts(
        edge_index: EdgeIndex,
        weights: Vec<SparseWeights>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if weights.len() != labels.len() {
            return Err(Error::InvalidSize(
                "one label per weight matrix required".into(),
            ));
        }
        let dim = edge_index.num_edges();
        for (k, w) in weights.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::InvalidSize(format!(
                    "weight matrix {k} has dimension {}, expected {dim}",
                    w.dim()
                )));
            }
            for (r, s) in w.row_sums().iter().enumerate() {
                if *s != 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "weight matrix {k} row {r} sums to {s}, expected exactly 1"
                    )));
                }
            }
        }
        Ok(Self {
            edge_index,
            weights,
            labels,
        })
    }

    #[inline]
    pub fn edge_index(&self) -> &EdgeIndex {
        &self.edge_index
    }

    /// Number of endogenous effects `q`.
    #[inline]
    pub fn q(&self) -> usize {
        self.weights.len()
    }

    /// Edge-space dimension `N`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.edge_index.num_edges()
    }

    pub fn weight(&self, k: usize) -> &SparseWeights {
        &self.weights[k]
    }

    pub fn weights(&self) -> &[SparseWeights] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Apply all matrices to `x`, returning `[W_1 x, ..., W_q x]`.
    pub fn apply_all(&self, x: &ArrayView1<f64>) -> Vec<Array1<f64>> {
        self.weights.iter().map(|w| w.matvec(x)).collect()
    }
}

/// Build the three standard endogenous effects on `n` nodes: reciprocity
/// (`(W1 y)_{ij} = y_{ji}`), exporter (`(W2 y)_{ij}` is the mean of `y_{iu}`
/// over `u != i, j`), and importer (`(W3 y)_{ij}` is the mean of `y_{uj}`
/// over `u != i, j`).
pub fn build_weights(n: usize) -> Result<WeightSet> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "exporter/importer normalization 1/(n-2) needs n >= 3, got {n}"
        )));
    }
    let idx = EdgeIndex::new(n)?;
    let inv = 1.0 / (n - 2) as f64;

    let mut recip = Vec::with_capacity(idx.num_edges());
    let mut exporter = Vec::with_capacity(idx.num_edges());
    let mut importer = Vec::with_capacity(idx.num_edges());
    for (_, (i, j)) in idx.iter_pairs() {
        recip.push((vec![idx.slot(j, i)], 1.0));
        let exp_cols: Vec<usize> = (0..n)
            .filter(|&u| u != i && u != j)
            .map(|u| idx.slot(i, u))
            .collect();
        exporter.push((exp_cols, inv));
        let imp_cols: Vec<usize> = (0..n)
            .filter(|&u| u != i && u != j)
            .map(|u| idx.slot(u, j))
            .collect();
        importer.push((imp_cols, inv));
    }
    let dim = idx.num_edges();
    WeightSet::from_parts(
        idx,
        vec![
            SparseWeights::from_rows(dim, recip)?,
            SparseWeights::from_rows(dim, exporter)?,
            SparseWeights::from_rows(dim, importer)?,
        ],
        vec![
            "reciprocity".into(),
            "exporter".into(),
            "importer".into(),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_n_below_three() {
        assert!(matches!(build_weights(2), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn exporter_single_term_average_on_three_nodes() {
        // M with M_{12}=2, M_{13}=4 (1-based): slot (1,2) of W2 vec(M) picks
        // the lone u=3 term with weight 1/(3-2)=1, so the value is 4.
        let ws = build_weights(3).unwrap();
        let idx = ws.edge_index();
        let m: Array2<f64> = array![[0.0, 2.0, 4.0], [1.0, 0.0, 5.0], [7.0, 8.0, 0.0]];
        let v = idx.vectorize(&m.view());
        let w2v = ws.weight(1).matvec(&v.view());
        assert_eq!(w2v[idx.slot(0, 1)], 4.0);
        // Exporter effect at a general slot: mean of row i excluding cols i,j.
        assert_eq!(w2v[idx.slot(1, 0)], 5.0);
    }

    #[test]
    fn dimensions_and_exact_row_sums_at_n20() {
        let ws = build_weights(20).unwrap();
        assert_eq!(ws.dim(), 380);
        for k in 0..3 {
            let w = ws.weight(k);
            assert_eq!(w.dim(), 380);
            let ones = Array::ones(380);
            let sums = w.matvec(&ones.view());
            let max_dev = sums
                .iter()
                .map(|s| (s - 1.0).abs())
                .fold(0.0f64, f64::max);
            assert_eq!(max_dev, 0.0, "row sums must be exactly 1");
        }
    }

    #[test]
    fn reciprocity_is_transposition() {
        let n = 5;
        let ws = build_weights(n).unwrap();
        let idx = ws.edge_index();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Array::from_shape_fn((n, n), |_| rng.random::<f64>());
        let v = idx.vectorize(&m.view());
        let w1v = ws.weight(0).matvec(&v.view());
        let vt = idx.vectorize(&m.t());
        assert_eq!(w1v, vt);
        // W1 is a symmetric permutation: applying it twice is the identity.
        let back = ws.weight(0).matvec(&w1v.view());
        assert_eq!(back, v);
    }

    #[test]
    fn importer_matches_column_mean() {
        let n = 6;
        let ws = build_weights(n).unwrap();
        let idx = ws.edge_index();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = Array::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { rng.random() });
        let v = idx.vectorize(&m.view());
        let w3v = ws.weight(2).matvec(&v.view());
        for (s, (i, j)) in idx.iter_pairs() {
            let mean: f64 = (0..n)
                .filter(|&u| u != i && u != j)
                .map(|u| m[[u, j]])
                .sum::<f64>()
                / (n - 2) as f64;
            assert!((w3v[s] - mean).abs() < 1e-14);
        }
    }

    #[test]
    fn transpose_matvec_consistent() {
        let n = 5;
        let ws = build_weights(n).unwrap();
        let dim = ws.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Array::from_shape_fn(dim, |_| rng.random::<f64>() - 0.5);
        let y = Array::from_shape_fn(dim, |_| rng.random::<f64>() - 0.5);
        for k in 0..3 {
            let w = ws.weight(k);
            let lhs = y.dot(&w.matvec(&x.view()));
            let rhs = w.t_matvec(&y.view()).dot(&x);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
