//! Minimal compressed-sparse-row storage for the lattice Laplacian blocks.

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of one row, in ascending column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }
}

/// Row-by-row builder. Rows must be pushed in order; entries within a row may
/// arrive unsorted.
pub(crate) struct CsrBuilder {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    row_start: usize,
}

impl CsrBuilder {
    pub(crate) fn with_capacity(ncols: usize, nrows: usize, nnz: usize) -> Self {
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        CsrBuilder {
            ncols,
            indptr,
            indices: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
            row_start: 0,
        }
    }

    pub(crate) fn push(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.ncols);
        self.indices.push(col);
        self.values.push(value);
    }

    pub(crate) fn finish_row(&mut self) {
        let start = self.row_start;
        let end = self.indices.len();
        if !self.indices[start..end].windows(2).all(|w| w[0] < w[1]) {
            let mut entries: Vec<(usize, f64)> = self.indices[start..end]
                .iter()
                .copied()
                .zip(self.values[start..end].iter().copied())
                .collect();
            entries.sort_by_key(|e| e.0);
            for (k, (c, v)) in entries.into_iter().enumerate() {
                self.indices[start + k] = c;
                self.values[start + k] = v;
            }
        }
        self.indptr.push(end);
        self.row_start = end;
    }

    pub(crate) fn build(self) -> CsrMatrix {
        CsrMatrix {
            nrows: self.indptr.len() - 1,
            ncols: self.ncols,
            indptr: self.indptr,
            indices: self.indices,
            values: self.values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sorts_columns_and_multiplies() {
        let mut b = CsrBuilder::with_capacity(3, 2, 4);
        b.push(2, 3.0);
        b.push(0, 1.0);
        b.finish_row();
        b.push(1, -2.0);
        b.finish_row();
        let m = b.build();
        assert_eq!(m.indices(), &[0, 2, 1]);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, -2.0]);
    }

    #[test]
    fn empty_rows_are_allowed() {
        let mut b = CsrBuilder::with_capacity(2, 2, 0);
        b.finish_row();
        b.finish_row();
        let m = b.build();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.mul_vec(&[5.0, 6.0]), vec![0.0, 0.0]);
    }
}
