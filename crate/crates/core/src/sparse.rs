//! Fixed-width row-sparse operators.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Receives a tally of multiply-adds from instrumented apply paths.
pub trait OpCounter {
    fn add(&mut self, madds: u64);
}

/// Counting disabled.
impl OpCounter for () {
    #[inline(always)]
    fn add(&mut self, _: u64) {}
}

/// Running total of multiply-adds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MaddCount(pub u64);

impl OpCounter for MaddCount {
    #[inline(always)]
    fn add(&mut self, madds: u64) {
        self.0 += madds;
    }
}

/// A sparse operator stored as two `n_rows × width` arrays of values and
/// column indices.
///
/// Rows with fewer than `width` nonzeros are padded with column 0 and value
/// 0, so application is branch-free. Stored entries are never zero, which is
/// how padding is told apart from data.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRowOperator<T = f64> {
    n_rows: usize,
    n_cols: usize,
    width: usize,
    values: Vec<T>,
    cols: Vec<u32>,
}

impl SparseRowOperator<f64> {
    /// Builds from per-row `(column, value)` lists; zero values are dropped.
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let width = rows
            .iter()
            .map(|r| r.iter().filter(|e| e.1 != 0.0).count())
            .max()
            .unwrap_or(0);
        let mut values = vec![0.0; rows.len() * width];
        let mut cols = vec![0u32; rows.len() * width];
        for (i, row) in rows.iter().enumerate() {
            for (k, &(c, v)) in row.iter().filter(|e| e.1 != 0.0).enumerate() {
                assert!(c < n_cols, "column {c} out of range {n_cols}");
                values[i * width + k] = v;
                cols[i * width + k] = c as u32;
            }
        }
        Self {
            n_rows: rows.len(),
            n_cols,
            width,
            values,
            cols,
        }
    }

    /// Keeps every entry with `|a_ij| > drop_tol`.
    pub fn from_dense(a: &DMatrix<f64>, drop_tol: f64) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..a.nrows())
            .map(|i| {
                (0..a.ncols())
                    .filter(|&j| a[(i, j)].abs() > drop_tol)
                    .map(|j| (j, a[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(a.ncols(), &rows)
    }

    /// Fixed-width layout with caller-supplied values and columns.
    pub(crate) fn from_parts(
        n_rows: usize,
        n_cols: usize,
        width: usize,
        values: Vec<f64>,
        cols: Vec<u32>,
    ) -> Self {
        assert_eq!(values.len(), n_rows * width);
        assert_eq!(cols.len(), n_rows * width);
        assert!(cols.iter().all(|&c| (c as usize) < n_cols.max(1)));
        Self {
            n_rows,
            n_cols,
            width,
            values,
            cols,
        }
    }
}

impl<T: Real> SparseRowOperator<T> {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    pub fn cast<U: Real>(&self) -> SparseRowOperator<U> {
        SparseRowOperator {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            width: self.width,
            values: self.values.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            cols: self.cols.clone(),
        }
    }

    /// Nonzero `(column, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let w = self.width;
        self.cols[i * w..(i + 1) * w]
            .iter()
            .zip(&self.values[i * w..(i + 1) * w])
            .filter(|(_, v)| **v != T::ZERO)
            .map(|(c, v)| (*c as usize, *v))
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row(i).count()
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.n_rows).map(|i| self.row_nnz(i)).max().unwrap_or(0)
    }

    pub fn mean_row_nnz(&self) -> f64 {
        if self.n_rows == 0 {
            return 0.0;
        }
        (0..self.n_rows).map(|i| self.row_nnz(i)).sum::<usize>() as f64 / self.n_rows as f64
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                a[(i, j)] += v.to_f64();
            }
        }
        a
    }

    /// `y += A x`, counting `width` multiply-adds per row (padding included).
    #[inline]
    pub fn apply_add(&self, x: &[T], y: &mut [T], counter: &mut impl OpCounter) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        let w = self.width;
        for (i, yi) in y.iter_mut().enumerate() {
            let vals = &self.values[i * w..(i + 1) * w];
            let cols = &self.cols[i * w..(i + 1) * w];
            let mut acc = T::ZERO;
            for (v, c) in vals.iter().zip(cols) {
                acc += *v * x[*c as usize];
            }
            *yi += acc;
        }
        counter.add((self.n_rows * w) as u64);
    }

    /// `y = A x` with size checks.
    pub fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::SizeMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::SizeMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        y.iter_mut().for_each(|v| *v = T::ZERO);
        self.apply_add(x, y, &mut ());
        Ok(())
    }

    /// Coordinate-list dump, one `row col value` line per stored entry,
    /// values with 17 significant digits.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                out.push_str(&format!("{i} {j} {:.16e}\n", v.to_f64()));
            }
        }
        out
    }
}

/// A dense row-major operator in the kernel precision.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T = f64> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseOperator<T> {
    pub fn from_matrix(a: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(a.nrows() * a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                data.push(T::from_f64(a[(i, j)]));
            }
        }
        Self {
            n_rows: a.nrows(),
            n_cols: a.ncols(),
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// `y += A x`, counting every entry as one multiply-add.
    #[inline]
    pub fn apply_add(&self, x: &[T], y: &mut [T], counter: &mut impl OpCounter) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (row, yi) in self.data.chunks_exact(self.n_cols).zip(y.iter_mut()) {
            let mut acc = T::ZERO;
            for (a, b) in row.iter().zip(x) {
                acc += *a * *b;
            }
            *yi += acc;
        }
        counter.add((self.n_rows * self.n_cols) as u64);
    }
}

/// Coordinate-list dump of a dense matrix (zeros skipped).
pub fn dense_to_coo_text(a: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            if v != 0.0 {
                out.push_str(&format!("{i} {j} {v:.16e}\n"));
            }
        }
    }
    out
}
