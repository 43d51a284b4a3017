//! Compressed-row complex matrices for superoperators, plus a
//! threshold-pivoted row-echelon null-space solver that exploits band
//! structure.

use nalgebra::{Complex, ComplexField};

use crate::operator::ComplexMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T: Real> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, Complex<T>)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
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
        let zero = Complex::new(T::zero(), T::zero());
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v == zero {
                continue;
            }
            row_ptr[r + 1] += 1;
            out_cols.push(c);
            out_vals.push(v);
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            cols: out_cols,
            vals: out_vals,
        }
    }

    pub fn from_dense(m: &ComplexMatrix<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != zero {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn kron(a: &Self, b: &Self) -> Self {
        let mut t = Vec::with_capacity(a.nnz() * b.nnz());
        for (i, j, x) in a.triplets() {
            for (k, l, y) in b.triplets() {
                t.push((i * b.nrows + k, j * b.ncols + l, x * y));
            }
        }
        Self::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, t)
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = v.conj();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn identity(n: usize) -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, one)).collect())
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                self.row(r)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (c, v)| acc + v * x[c])
            })
            .collect()
    }

    /// `self * m` for dense `m`.
    pub fn mul_dense(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.ncols, m.nrows());
        let mut out = ComplexMatrix::zeros(self.nrows, m.ncols());
        for j in 0..m.ncols() {
            let col = m.column(j);
            for r in 0..self.nrows {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (c, v) in self.row(r) {
                    acc += v * col[c];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }

    /// `m * self` for dense `m`.
    pub fn dense_mul(m: &ComplexMatrix<T>, s: &Self) -> ComplexMatrix<T> {
        assert_eq!(m.ncols(), s.nrows);
        let mut out = ComplexMatrix::zeros(m.nrows(), s.ncols);
        for k in 0..s.nrows {
            for (j, v) in s.row(k) {
                for i in 0..m.nrows() {
                    out[(i, j)] += m[(i, k)] * v;
                }
            }
        }
        out
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = vec![zero; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == zero {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = zero;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.nrows)
            .map(|r| self.row(r).fold(T::zero(), |acc, (_, v)| acc + v.modulus()))
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn norm_max(&self) -> T {
        self.vals.iter().fold(T::zero(), |a, v| a.max(v.modulus()))
    }
}

/// Row segment `[start, base + vals.len())` of a matrix under elimination.
struct Segment<T: Real> {
    base: usize,
    start: usize,
    vals: Vec<Complex<T>>,
}

impl<T: Real> Segment<T> {
    fn end(&self) -> usize {
        self.base + self.vals.len()
    }

    fn at(&self, c: usize) -> Complex<T> {
        if c < self.start || c >= self.end() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.vals[c - self.base]
        }
    }
}

/// Row-echelon form produced by banded elimination with partial pivoting.
struct Echelon<T: Real> {
    rows: Vec<Segment<T>>,
    /// Original row index of each segment.
    origin: Vec<usize>,
    pivot_of: Vec<Option<usize>>,
    free_columns: Vec<usize>,
    min_pivot: Option<T>,
    /// Per column: `(segment, factor)` pairs eliminated against its pivot.
    ops: Vec<Vec<(usize, Complex<T>)>>,
}

fn eliminate<T: Real>(m: &SparseMatrix<T>, threshold: T, record: bool) -> Echelon<T> {
    let n = m.ncols();
    let zero = Complex::new(T::zero(), T::zero());
    let mut rows: Vec<Segment<T>> = Vec::with_capacity(m.nrows());
    let mut origin = Vec::with_capacity(m.nrows());
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..m.nrows() {
        let entries: Vec<(usize, Complex<T>)> = m.row(r).collect();
        if entries.is_empty() {
            continue;
        }
        let first = entries[0].0;
        let last = entries[entries.len() - 1].0;
        let mut vals = vec![zero; last - first + 1];
        for (c, v) in entries {
            vals[c - first] = v;
        }
        buckets[first].push(rows.len());
        origin.push(r);
        rows.push(Segment {
            base: first,
            start: first,
            vals,
        });
    }

    let mut active: Vec<usize> = Vec::new();
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    let mut free_columns = Vec::new();
    let mut min_pivot: Option<T> = None;
    let mut ops = Vec::with_capacity(if record { n } else { 0 });

    for j in 0..n {
        active.append(&mut buckets[j]);
        let mut best: Option<(usize, T)> = None;
        for (slot, &r) in active.iter().enumerate() {
            let a = rows[r].at(j).modulus();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((slot, a));
            }
        }
        let mut col_ops = Vec::new();
        match best {
            Some((slot, mag)) if mag > threshold => {
                let p = active.swap_remove(slot);
                pivot_of[j] = Some(p);
                min_pivot = Some(min_pivot.map_or(mag, |m: T| m.min(mag)));
                let pivot = rows[p].at(j);
                let p_end = rows[p].end();
                let p_vals: Vec<Complex<T>> = (j + 1..p_end).map(|c| rows[p].at(c)).collect();
                for &r in &active {
                    let row = &mut rows[r];
                    let f = row.at(j) / pivot;
                    row.start = j + 1;
                    if f == zero {
                        continue;
                    }
                    if record {
                        col_ops.push((r, f));
                    }
                    if row.end() < p_end {
                        row.vals.resize(p_end - row.base, zero);
                    }
                    for (k, pv) in p_vals.iter().enumerate() {
                        let c = j + 1 + k;
                        row.vals[c - row.base] -= f * *pv;
                    }
                }
            }
            _ => {
                free_columns.push(j);
                for &r in &active {
                    rows[r].start = j + 1;
                }
            }
        }
        if record {
            ops.push(col_ops);
        }
        active.retain(|&r| rows[r].start < rows[r].end());
    }
    Echelon {
        rows,
        origin,
        pivot_of,
        free_columns,
        min_pivot,
        ops,
    }
}

/// Result of [`null_space`].
#[derive(Debug, Clone)]
pub struct NullSpace<T: Real> {
    /// One vector per free column, unnormalized.
    pub basis: Vec<Vec<Complex<T>>>,
    pub free_columns: Vec<usize>,
    /// Smallest accepted pivot modulus.
    pub min_pivot: T,
    /// Pivot threshold used to declare a column free.
    pub threshold: T,
}

/// Right null space of `m` by Gaussian elimination with partial pivoting,
/// declaring a column free when no remaining row has a pivot candidate
/// above `threshold`. Work and fill stay inside the band of `m`.
///
/// Dependencies are detected left to right, so a kernel vector whose
/// entries span many orders of magnitude can be missed; [`LuFactor`] with
/// inverse iteration is the robust route for such kernels.
pub fn null_space<T: Real>(m: &SparseMatrix<T>, threshold: T) -> NullSpace<T> {
    let n = m.ncols();
    let zero = Complex::new(T::zero(), T::zero());
    let e = eliminate(m, threshold, false);
    let mut basis = Vec::with_capacity(e.free_columns.len());
    for &f in &e.free_columns {
        let mut x = vec![zero; n];
        x[f] = Complex::new(T::one(), T::zero());
        for j in (0..f).rev() {
            let Some(p) = e.pivot_of[j] else { continue };
            let row = &e.rows[p];
            let mut s = zero;
            for c in (j + 1)..row.end().min(f + 1) {
                s += row.at(c) * x[c];
            }
            x[j] = -s / row.at(j);
        }
        basis.push(x);
    }
    NullSpace {
        basis,
        free_columns: e.free_columns,
        min_pivot: e.min_pivot.unwrap_or(T::zero()),
        threshold,
    }
}

/// LU factorization of a square banded matrix with partial pivoting.
pub struct LuFactor<T: Real> {
    e: Echelon<T>,
}

impl<T: Real> LuFactor<T> {
    /// Fails with `None` when a column has no nonzero pivot candidate.
    pub fn new(m: &SparseMatrix<T>) -> Option<Self> {
        if m.nrows() != m.ncols() {
            return None;
        }
        let e = eliminate(m, T::zero(), true);
        e.free_columns.is_empty().then_some(LuFactor { e })
    }

    pub fn dim(&self) -> usize {
        self.e.pivot_of.len()
    }

    /// Solve `m x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut w: Vec<Complex<T>> = self.e.origin.iter().map(|&r| b[r]).collect();
        for j in 0..n {
            let p = self.e.pivot_of[j].expect("factorization has a pivot in every column");
            let bp = w[p];
            for &(r, f) in &self.e.ops[j] {
                w[r] -= f * bp;
            }
        }
        let mut x = vec![zero; n];
        for j in (0..n).rev() {
            let p = self.e.pivot_of[j].expect("factorization has a pivot in every column");
            let row = &self.e.rows[p];
            let mut s = w[p];
            for c in (j + 1)..row.end() {
                s -= row.at(c) * x[c];
            }
            x[j] = s / row.at(j);
        }
        x
    }
}
