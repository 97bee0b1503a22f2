//! Column-compressed sparse matrices and the cached matrix-vector products
//! the coordinate solvers update incrementally.

use crate::error::{Error, Result};

/// Column-compressed sparse matrix. Row indices are strictly increasing within
/// each column and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 {
            return Err(Error::invalid("column pointer array must have n_cols + 1 entries"));
        }
        if col_ptr[0] != 0 || *col_ptr.last().unwrap() != row_idx.len() {
            return Err(Error::invalid("column pointers must start at 0 and end at nnz"));
        }
        if row_idx.len() != values.len() {
            return Err(Error::invalid("row index and value arrays differ in length"));
        }
        for c in 0..n_cols {
            let (lo, hi) = (col_ptr[c], col_ptr[c + 1]);
            if lo > hi {
                return Err(Error::invalid("column pointers must be monotone"));
            }
            for p in lo..hi {
                if row_idx[p] >= n_rows {
                    return Err(Error::invalid(format!("row index {} out of range", row_idx[p])));
                }
                if p > lo && row_idx[p] <= row_idx[p - 1] {
                    return Err(Error::invalid(format!(
                        "row indices not strictly increasing in column {c}"
                    )));
                }
                if values[p] == 0.0 {
                    return Err(Error::invalid(format!("explicit zero stored in column {c}")));
                }
            }
        }
        Ok(CscMatrix { n_rows, n_cols, col_ptr, row_idx, values })
    }

    /// Builds from `(row, col, value)` triplets. Zeros are dropped; duplicate
    /// coordinates are rejected.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<_> = triplets.iter().copied().filter(|t| t.2 != 0.0).collect();
        sorted.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        for (k, &(r, c, v)) in sorted.iter().enumerate() {
            if r >= n_rows || c >= n_cols {
                return Err(Error::invalid(format!("entry ({r}, {c}) out of range")));
            }
            if k > 0 && sorted[k - 1].0 == r && sorted[k - 1].1 == c {
                return Err(Error::invalid(format!("duplicate entry ({r}, {c})")));
            }
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            values.push(v);
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(CscMatrix { n_rows, n_cols, col_ptr, row_idx, values })
    }

    /// Builds from a row-major dense array.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n_rows * n_cols);
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for c in 0..n_cols {
            for r in 0..n_rows {
                let v = data[r * n_cols + c];
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix { n_rows, n_cols, col_ptr, row_idx, values }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn col(&self, c: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.col_ptr[c], self.col_ptr[c + 1]);
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    #[inline]
    pub fn col_nnz(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    pub fn col_norm_sq(&self, c: usize) -> f64 {
        self.col(c).1.iter().map(|v| v * v).sum()
    }

    pub fn col_sum(&self, c: usize) -> f64 {
        self.col(c).1.iter().sum()
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_rows];
        for &r in &self.row_idx {
            counts[r] += 1;
        }
        counts
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut out = vec![0.0; self.n_rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(c);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r] += v * xc;
            }
        }
        out
    }

    /// `A^T w`.
    pub fn tmatvec(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n_rows);
        (0..self.n_cols)
            .map(|c| {
                let (rows, vals) = self.col(c);
                rows.iter().zip(vals).map(|(&r, &v)| v * w[r]).sum()
            })
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for c in 0..self.n_cols {
            let (rows, vals) = self.col(c);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r * self.n_cols + c] = v;
            }
        }
        out
    }

    /// Multiplies column `c` by `s` in place. `s` must be nonzero.
    pub(crate) fn scale_col(&mut self, c: usize, s: f64) {
        debug_assert!(s != 0.0);
        let (lo, hi) = (self.col_ptr[c], self.col_ptr[c + 1]);
        for v in &mut self.values[lo..hi] {
            *v *= s;
        }
    }
}

/// A sparse matrix whose columns may carry an implicit constant shift:
/// column `i` acts as `stored_i - shift_i * 1`. Centering uses the shift as a
/// rank-one correction so the stored part stays sparse.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    matrix: CscMatrix,
    shift: Option<Vec<f64>>,
    stored_col_sums: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(matrix: CscMatrix, shift: Option<Vec<f64>>) -> Result<Self> {
        if let Some(s) = &shift {
            if s.len() != matrix.n_cols() {
                return Err(Error::DimensionMismatch { expected: matrix.n_cols(), got: s.len() });
            }
        }
        let shift = shift.filter(|s| s.iter().any(|&v| v != 0.0));
        let stored_col_sums = (0..matrix.n_cols()).map(|c| matrix.col_sum(c)).collect();
        Ok(DesignMatrix { matrix, shift, stored_col_sums })
    }

    pub fn plain(matrix: CscMatrix) -> Self {
        DesignMatrix::new(matrix, None).expect("no shift to validate")
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn stored(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn is_shifted(&self) -> bool {
        self.shift.is_some()
    }

    #[inline]
    pub fn col_shift(&self, c: usize) -> f64 {
        self.shift.as_ref().map_or(0.0, |s| s[c])
    }

    #[inline]
    pub fn col_nnz(&self, c: usize) -> usize {
        self.matrix.col_nnz(c)
    }

    /// Squared Euclidean norm of the effective column.
    pub fn col_norm_sq(&self, c: usize) -> f64 {
        let s = self.col_shift(c);
        let m = self.n_rows() as f64;
        let v = self.matrix.col_norm_sq(c) - 2.0 * s * self.stored_col_sums[c] + m * s * s;
        v.max(0.0)
    }

    /// Maximum number of nonzeros in a row of the effective matrix. A shifted
    /// column is dense.
    pub fn max_row_nnz(&self) -> usize {
        match &self.shift {
            None => self.matrix.row_counts().into_iter().max().unwrap_or(0),
            Some(s) => {
                let dense_cols = s.iter().filter(|&&v| v != 0.0).count();
                let mut counts = vec![dense_cols; self.n_rows()];
                for c in 0..self.n_cols() {
                    if s[c] == 0.0 {
                        for &r in self.matrix.col(c).0 {
                            counts[r] += 1;
                        }
                    }
                }
                counts.into_iter().max().unwrap_or(0)
            }
        }
    }

    /// Effective column `c` dotted with `w`, given `sum(w)`.
    #[inline]
    pub fn col_dot(&self, c: usize, w: impl Fn(usize) -> f64, w_sum: f64) -> f64 {
        let (rows, vals) = self.matrix.col(c);
        let mut acc = 0.0;
        for (&r, &v) in rows.iter().zip(vals) {
            acc += v * w(r);
        }
        acc - self.col_shift(c) * w_sum
    }

    /// Effective `A x` as an explicit vector.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.matrix.matvec(x);
        if let Some(s) = &self.shift {
            let corr: f64 = s.iter().zip(x).map(|(a, b)| a * b).sum();
            out.iter_mut().for_each(|o| *o -= corr);
        }
        out
    }

    /// Effective `A^T w`.
    pub fn tmatvec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = self.matrix.tmatvec(w);
        if let Some(s) = &self.shift {
            let wsum: f64 = w.iter().sum();
            out.iter_mut().zip(s).for_each(|(o, sc)| *o -= sc * wsum);
        }
        out
    }

    /// Row-major dense copy of the effective matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = self.matrix.to_dense();
        if let Some(s) = &self.shift {
            let n = self.n_cols();
            for (k, v) in d.iter_mut().enumerate() {
                *v -= s[k % n];
            }
        }
        d
    }

    pub fn product_of(&self, x: &[f64]) -> ProductCache {
        let mut p = ProductCache::zeros(self.n_rows());
        p.refresh(self, x);
        p
    }
}

/// Cached `A x` for a design matrix, stored as `raw - shift * 1` where
/// `raw = stored * x` and `shift = <col_shift, x>`. The sum of `raw` is
/// tracked so sums of the effective product are O(1).
#[derive(Debug, Clone)]
pub struct ProductCache {
    raw: Vec<f64>,
    shift: f64,
    raw_sum: f64,
}

impl ProductCache {
    pub fn zeros(m: usize) -> Self {
        ProductCache { raw: vec![0.0; m], shift: 0.0, raw_sum: 0.0 }
    }

    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        self.raw[j] - self.shift
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.raw_sum - self.raw.len() as f64 * self.shift
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.raw.len()).map(|j| self.at(j)).collect()
    }

    /// Adds `delta` times effective column `c`; touches `nnz(c)` entries.
    #[inline]
    pub fn add_column(&mut self, design: &DesignMatrix, c: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let (rows, vals) = design.matrix.col(c);
        for (&r, &v) in rows.iter().zip(vals) {
            self.raw[r] += delta * v;
        }
        self.raw_sum += delta * design.stored_col_sums[c];
        self.shift += delta * design.col_shift(c);
    }

    /// Recomputes from scratch.
    pub fn refresh(&mut self, design: &DesignMatrix, x: &[f64]) {
        self.raw = design.matrix.matvec(x);
        self.raw_sum = self.raw.iter().sum();
        self.shift = match &design.shift {
            Some(s) => s.iter().zip(x).map(|(a, b)| a * b).sum(),
            None => 0.0,
        };
    }
}

/// Read access to the cached product at a query point: either a single cache
/// or the combination `coef * u + z` used by the accelerated solver.
#[derive(Clone, Copy)]
pub enum ProductView<'a> {
    Single(&'a ProductCache),
    Combined { coef: f64, u: &'a ProductCache, z: &'a ProductCache },
}

impl ProductView<'_> {
    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        match *self {
            ProductView::Single(p) => p.at(j),
            ProductView::Combined { coef, u, z } => coef * u.at(j) + z.at(j),
        }
    }

    pub fn sum(&self) -> f64 {
        match *self {
            ProductView::Single(p) => p.sum(),
            ProductView::Combined { coef, u, z } => coef * u.sum() + z.sum(),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            ProductView::Single(p) => p.len(),
            ProductView::Combined { z, .. } => z.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.at(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CscMatrix {
        // [[1, 0, 2],
        //  [0, 3, 0],
        //  [4, 0, 5]]
        CscMatrix::from_dense(3, 3, &[1., 0., 2., 0., 3., 0., 4., 0., 5.])
    }

    #[test]
    fn layout_invariants() {
        let a = small();
        assert_eq!(a.col_ptr(), &[0, 2, 3, 5]);
        assert_eq!(a.row_idx(), &[0, 2, 1, 0, 2]);
        assert!(CscMatrix::new(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CscMatrix::new(2, 1, vec![0, 1], vec![0], vec![0.0]).is_err());
    }

    #[test]
    fn triplets_match_dense() {
        let t = [(2, 0, 4.0), (0, 0, 1.0), (1, 1, 3.0), (0, 2, 2.0), (2, 2, 5.0), (1, 0, 0.0)];
        assert_eq!(CscMatrix::from_triplets(3, 3, &t).unwrap(), small());
        assert!(CscMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
    }

    #[test]
    fn products() {
        let a = small();
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0, 9.0]);
        assert_eq!(a.tmatvec(&[1.0, 1.0, 1.0]), vec![5.0, 3.0, 7.0]);
        assert_eq!(a.row_counts(), vec![2, 1, 2]);
    }

    #[test]
    fn shifted_design_matches_dense() {
        let d = DesignMatrix::new(small(), Some(vec![0.5, 0.0, -1.0])).unwrap();
        let dense = d.to_dense();
        let x = [0.3, -1.2, 2.0];
        let want: Vec<f64> =
            (0..3).map(|r| (0..3).map(|c| dense[r * 3 + c] * x[c]).sum()).collect();
        let got = d.matvec(&x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
        for c in 0..3 {
            let norm: f64 = (0..3).map(|r| dense[r * 3 + c].powi(2)).sum();
            assert!((d.col_norm_sq(c) - norm).abs() < 1e-12);
        }
        assert_eq!(d.max_row_nnz(), 3);
    }

    #[test]
    fn incremental_product_tracks_refresh() {
        let d = DesignMatrix::new(small(), Some(vec![0.5, 0.25, -1.0])).unwrap();
        let mut x = vec![0.0; 3];
        let mut p = ProductCache::zeros(3);
        for (c, delta) in [(0, 1.5), (2, -0.5), (1, 2.0), (0, -0.25)] {
            x[c] += delta;
            p.add_column(&d, c, delta);
        }
        let fresh = d.product_of(&x);
        for j in 0..3 {
            assert!((p.at(j) - fresh.at(j)).abs() < 1e-12);
        }
        assert!((p.sum() - fresh.to_vec().iter().sum::<f64>()).abs() < 1e-12);
    }
}
