//! Compressed sparse row storage for complex operators.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Sparse complex matrix over a basis catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Assemble from `(row, col, value)` triplets. Duplicate positions are
    /// summed and exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>, hermitian: bool) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
            hermitian,
        }
    }

    pub fn diagonal_matrix(diag: &[C64], hermitian: bool) -> Self {
        let triplets = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), triplets, hermitian)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.cols[p], self.vals[p])))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]];
        match span.binary_search(&col) {
            Ok(p) => self.vals[self.row_ptr[row] + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yr = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩`
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let y = self.apply(x);
        x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entrywise deviation `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for (r, k, a) in self.entries() {
            for p in other.row_ptr[k]..other.row_ptr[k + 1] {
                triplets.push((r, other.cols[p], a * other.vals[p]));
            }
        }
        OperatorMatrix::from_triplets(self.dim, triplets, false)
    }

    pub fn scaled_sum(&self, a: C64, other: &OperatorMatrix, b: C64) -> OperatorMatrix {
        assert_eq!(self.dim, other.dim);
        let triplets = self
            .entries()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.entries().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        OperatorMatrix::from_triplets(self.dim, triplets, self.hermitian && other.hermitian)
    }

    /// Coordinate text dump, one `row col re im` line per stored entry.
    pub fn write_coordinates<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# dim {} nnz {}", self.dim, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = OperatorMatrix::from_triplets(
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (1, 0, c(0.0, 0.0)),
                (1, 1, c(0.5, 0.0)),
            ],
            false,
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(3.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn matvec_matches_dense() {
        let m = OperatorMatrix::from_triplets(
            3,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 2, c(0.0, 1.0)),
                (2, 0, c(0.0, -1.0)),
                (1, 1, c(-2.0, 0.0)),
            ],
            true,
        );
        let x = vec![c(1.0, 1.0), c(0.5, 0.0), c(-1.0, 2.0)];
        let y = m.apply(&x);
        let d = m.to_dense() * nalgebra::DVector::from_vec(x.clone());
        for i in 0..3 {
            assert!((y[i] - d[i]).norm() < 1e-15);
        }
        assert_eq!(m.hermiticity_residual(), 0.0);
        assert!(m.expectation(&x).im.abs() < 1e-15);
    }

    #[test]
    fn sparse_product_matches_dense() {
        let a = OperatorMatrix::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (1, 1, c(0.0, 2.0))], false);
        let b = OperatorMatrix::from_triplets(2, vec![(1, 0, c(3.0, 0.0)), (0, 0, c(1.0, 1.0))], false);
        let prod = a.mul(&b).to_dense();
        let expect = a.to_dense() * b.to_dense();
        assert!((prod - expect).norm() < 1e-15);
    }

    #[test]
    fn coordinate_dump() {
        let a = OperatorMatrix::from_triplets(2, vec![(0, 1, c(1.0, -1.0))], false);
        let mut buf = Vec::new();
        a.write_coordinates(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("0 1 1.0"));
    }
}
