//! Compressed sparse row matrices and the Gauss-Seidel solver.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real square matrix in compressed sparse row layout.
///
/// Column indices are strictly ascending within a row. Explicitly stored
/// zeros are allowed and are part of the pattern: the pattern is what stays
/// fixed across outer iterations, the values are what change.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn from_csr(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 {
            return Err(Error::Dimension(format!(
                "row pointer length {} for rank {n}",
                row_ptr.len()
            )));
        }
        if col_idx.len() != values.len() || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::Dimension(
                "column/value arrays disagree with row pointers".into(),
            ));
        }
        for r in 0..n {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::Dimension(format!("row pointers decrease at row {r}")));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.iter().any(|&c| c >= n) {
                return Err(Error::Dimension(format!("column index out of range in row {r}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Dimension(format!(
                    "columns not strictly ascending in row {r} (duplicate or unsorted entry)"
                )));
            }
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        if let Some(&(r, c, _)) = sorted.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(Error::Dimension(format!("entry ({r},{c}) outside rank {n}")));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::from_csr(n, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Converts a dense matrix, storing only nonzero entries.
    pub fn from_dense(dense: &DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != dense.ncols() {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        let n = dense.nrows();
        let mut trip = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = dense[(r, c)];
                if v != 0.0 {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(n, &trip)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Iterates the stored entries of row `r` as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Iterates every stored entry as (row, column, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Position of (r, c) in the value array, if stored.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|off| span.start + off)
    }

    /// Value at (r, c); zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |p| self.values[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let trip: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.n, &trip).expect("transpose of a valid matrix is valid")
    }

    /// Exact structural and numerical symmetry test.
    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| match self.position(c, r) {
            Some(p) => self.values[p] == v,
            None => v == 0.0,
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.entries() {
            d[(r, c)] += v;
        }
        d
    }

    /// Same rank, row pointers and column indices.
    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// Stable 64-bit FNV-1a hash of the sparsity pattern (rank, rows, columns).
    pub fn pattern_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.n as u64);
        for &p in &self.row_ptr {
            feed(p as u64);
        }
        for &c in &self.col_idx {
            feed(c as u64);
        }
        h
    }

    /// Largest absolute entry-wise difference, treating missing entries as zero.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (r, c, v) in self.entries() {
            worst = worst.max((v - other.get(r, c)).abs());
        }
        for (r, c, v) in other.entries() {
            if self.position(r, c).is_none() {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// Root mean square of a slice; zero for an empty slice.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Outcome of a Gauss-Seidel solve.
#[derive(Debug, Clone, PartialEq)]
pub struct GsSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lexicographic Gauss-Seidel.
///
/// A sweep is accepted as converged when either the RMS of its update or the
/// RMS of the diagonally scaled residual after it falls below `tol`. The
/// residual test lets exact systems (such as the identity) stop after the
/// sweep that solves them instead of one confirming sweep later.
pub fn gauss_seidel(a: &SparseMatrix, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<GsSolution> {
    let n = a.rank();
    if b.len() != n || x0.len() != n {
        return Err(Error::Dimension(format!(
            "system of rank {n} with rhs length {} and guess length {}",
            b.len(),
            x0.len()
        )));
    }
    let mut diag_pos = Vec::with_capacity(n);
    for r in 0..n {
        match a.position(r, r) {
            Some(p) if a.values[p] != 0.0 => diag_pos.push(p),
            _ => return Err(Error::Singular(format!("zero diagonal in row {r}"))),
        }
    }
    let mut x = x0.to_vec();
    let inv_n = 1.0 / n.max(1) as f64;
    for it in 1..=max_iter {
        let mut upd2 = 0.0;
        for r in 0..n {
            let mut s = b[r];
            let mut diag = 0.0;
            for p in a.row_ptr[r]..a.row_ptr[r + 1] {
                if p == diag_pos[r] {
                    diag = a.values[p];
                } else {
                    s -= a.values[p] * x[a.col_idx[p]];
                }
            }
            let new = s / diag;
            let d = new - x[r];
            upd2 += d * d;
            x[r] = new;
        }
        if (upd2 * inv_n).sqrt() < tol {
            return Ok(GsSolution {
                x,
                iterations: it,
                converged: true,
            });
        }
        let mut res2 = 0.0;
        for r in 0..n {
            let ax: f64 = a.row(r).map(|(c, v)| v * x[c]).sum();
            let d = (b[r] - ax) / a.values[diag_pos[r]];
            res2 += d * d;
        }
        if (res2 * inv_n).sqrt() < tol {
            return Ok(GsSolution {
                x,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(GsSolution {
        x,
        iterations: max_iter,
        converged: false,
    })
}

/// Dense LU solve, used as the exact reference solver.
pub fn direct_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rank() {
        return Err(Error::Dimension("rhs length differs from matrix rank".into()));
    }
    let lu = a.to_dense().lu();
    let rhs = nalgebra::DVector::from_column_slice(b);
    lu.solve(&rhs)
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| Error::Singular("LU factorization found a zero pivot".into()))
}
