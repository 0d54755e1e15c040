//! Exact sparse linear algebra over GF(p) and the rationals.
//!
//! Row reduction uses deterministic pivoting (leftmost nonzero column, first
//! qualifying row) so that every basis and retraction choice downstream is
//! reproducible across runs. Matrices are immutable after construction and
//! all operations are pure.

use crate::field::{Field, FieldScalar};
use std::collections::BTreeMap;

/// A sparse vector: index -> nonzero scalar.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SparseVec {
    entries: BTreeMap<usize, FieldScalar>,
}

impl SparseVec {
    pub fn zero() -> SparseVec {
        SparseVec { entries: BTreeMap::new() }
    }

    pub fn unit(i: usize, one: FieldScalar) -> SparseVec {
        let mut v = SparseVec::zero();
        v.entries.insert(i, one);
        v
    }

    pub fn from_entries(field: &Field, it: impl IntoIterator<Item = (usize, FieldScalar)>) -> SparseVec {
        let mut v = SparseVec::zero();
        for (i, c) in it {
            v.add_entry(field, i, &c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Option<&FieldScalar> {
        self.entries.get(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &FieldScalar)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    /// Index of the leading (smallest-index) entry.
    pub fn leading(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn add_entry(&mut self, field: &Field, i: usize, c: &FieldScalar) {
        if field.is_zero(c) {
            return;
        }
        match self.entries.get(&i) {
            None => {
                self.entries.insert(i, c.clone());
            }
            Some(old) => {
                let s = field.add(old, c);
                if field.is_zero(&s) {
                    self.entries.remove(&i);
                } else {
                    self.entries.insert(i, s);
                }
            }
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, field: &Field, other: &SparseVec, c: &FieldScalar) {
        if field.is_zero(c) {
            return;
        }
        for (i, x) in other.iter() {
            self.add_entry(field, i, &field.mul(x, c));
        }
    }

    pub fn scale(&mut self, field: &Field, c: &FieldScalar) {
        if field.is_zero(c) {
            self.entries.clear();
            return;
        }
        for x in self.entries.values_mut() {
            *x = field.mul(x, c);
        }
    }

    pub fn neg(&self, field: &Field) -> SparseVec {
        let mut v = self.clone();
        for x in v.entries.values_mut() {
            *x = field.neg(x);
        }
        v
    }

    /// Re-index the entries through `map` (must be injective on the support).
    pub fn reindex(&self, map: impl Fn(usize) -> usize) -> SparseVec {
        let mut v = SparseVec::zero();
        for (i, c) in self.iter() {
            let prev = v.entries.insert(map(i), c.clone());
            debug_assert!(prev.is_none());
        }
        v
    }
}

/// A sparse matrix stored row-major. No explicit zeros, no duplicate keys.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseMatrix {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    row_data: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(field: Field, rows: usize, cols: usize) -> SparseMatrix {
        SparseMatrix { field, rows, cols, row_data: vec![SparseVec::zero(); rows] }
    }

    pub fn identity(field: Field, n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::zero(field, n, n);
        for i in 0..n {
            m.row_data[i] = SparseVec::unit(i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, cols: usize, rows: Vec<SparseVec>) -> SparseMatrix {
        for r in &rows {
            if let Some(last) = r.entries.keys().next_back() {
                assert!(*last < cols, "entry column out of range");
            }
        }
        SparseMatrix { field, rows: rows.len(), cols, row_data: rows }
    }

    /// Builds a matrix from integer entries in row-major order (tests mostly).
    pub fn from_dense_i64(field: Field, data: &[&[i64]]) -> SparseMatrix {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let mut m = SparseMatrix::zero(field, rows, cols);
        for (i, r) in data.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, n) in r.iter().enumerate() {
                m.row_data[i].add_entry(&field, j, &field.from_i64(*n));
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.row_data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> FieldScalar {
        self.row_data[i].get(j).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn set(&mut self, i: usize, j: usize, c: FieldScalar) {
        assert!(i < self.rows && j < self.cols);
        let existing = self.row_data[i].entries.remove(&j);
        drop(existing);
        if !self.field.is_zero(&c) {
            self.row_data[i].entries.insert(j, c);
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_data.iter().map(|r| r.nnz()).sum()
    }

    /// Extracts column j as a sparse vector.
    pub fn column(&self, j: usize) -> SparseVec {
        let mut v = SparseVec::zero();
        for (i, r) in self.row_data.iter().enumerate() {
            if let Some(c) = r.get(j) {
                v.add_entry(&self.field, i, c);
            }
        }
        v
    }

    /// Matrix-vector product, treating `v` as a column vector.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero();
        for (i, r) in self.row_data.iter().enumerate() {
            let mut acc = self.field.zero();
            // iterate over the sparser side
            if r.nnz() <= v.nnz() {
                for (j, c) in r.iter() {
                    if let Some(x) = v.get(j) {
                        acc = self.field.add(&acc, &self.field.mul(c, x));
                    }
                }
            } else {
                for (j, x) in v.iter() {
                    if let Some(c) = r.get(j) {
                        acc = self.field.add(&acc, &self.field.mul(c, x));
                    }
                }
            }
            out.add_entry(&self.field, i, &acc);
        }
        out
    }

    pub fn compose(&self, inner: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, inner.rows, "composition shape mismatch");
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = SparseVec::zero();
            for (k, c) in self.row_data[i].iter() {
                acc.add_scaled(&self.field, inner.row(k), c);
            }
            rows.push(acc);
        }
        SparseMatrix::from_rows(self.field, inner.cols, rows)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![SparseVec::zero(); self.cols];
        for (i, r) in self.row_data.iter().enumerate() {
            for (j, c) in r.iter() {
                rows[j].entries.insert(i, c.clone());
            }
        }
        SparseMatrix::from_rows(self.field, self.rows, rows)
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, other.rows);
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut r = self.row_data[i].clone();
            for (j, c) in other.row(i).iter() {
                r.entries.insert(self.cols + j, c.clone());
            }
            rows.push(r);
        }
        SparseMatrix::from_rows(self.field, self.cols + other.cols, rows)
    }

    pub fn from_columns(field: Field, rows: usize, cols: &[SparseVec]) -> SparseMatrix {
        let mut m = SparseMatrix::zero(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, c) in col.iter() {
                assert!(i < rows);
                m.row_data[i].entries.insert(j, c.clone());
            }
        }
        m
    }
}

/// Reduced row echelon form with the ordered list of pivot columns.
///
/// Pivoting is deterministic: columns are visited left to right and the first
/// remaining row whose leading entry sits in the current column is chosen.
pub fn rref(m: &SparseMatrix) -> (SparseMatrix, Vec<usize>) {
    let field = m.field;
    let mut rows = m.row_data.clone();
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for col in 0..m.cols {
        let Some(r) = (next..rows.len()).find(|&r| rows[r].leading() == Some(col)) else {
            continue;
        };
        rows.swap(next, r);
        let lead = rows[next].get(col).cloned().unwrap();
        let inv = field.inv(&lead).expect("leading entry is nonzero");
        rows[next].scale(&field, &inv);
        let pivot_row = rows[next].clone();
        for (r2, row) in rows.iter_mut().enumerate() {
            if r2 == next {
                continue;
            }
            if let Some(c) = row.get(col).cloned() {
                row.add_scaled(&field, &pivot_row, &field.neg(&c));
            }
        }
        pivots.push(col);
        next += 1;
    }
    (SparseMatrix::from_rows(field, m.cols, rows), pivots)
}

/// A basis of the right null space. Size is always `cols - rank`.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<SparseVec> {
    let field = m.field;
    let (r, pivots) = rref(m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for j in 0..m.cols {
        if pivot_set.contains(&j) {
            continue;
        }
        let mut v = SparseVec::unit(j, field.one());
        for (k, pc) in pivots.iter().enumerate() {
            if let Some(c) = r.row(k).get(j) {
                v.add_entry(&field, *pc, &field.neg(c));
            }
        }
        debug_assert!(m.apply(&v).is_zero());
        basis.push(v);
    }
    basis
}

/// Some solution of `m x = b`, or `None` if the system is inconsistent.
pub fn solve(m: &SparseMatrix, b: &SparseVec) -> Option<SparseVec> {
    let field = m.field;
    let aug_col = m.cols;
    let mut rows = Vec::with_capacity(m.rows);
    for i in 0..m.rows {
        let mut r = m.row(i).clone();
        if let Some(c) = b.get(i) {
            r.add_entry(&field, aug_col, c);
        }
        rows.push(r);
    }
    let aug = SparseMatrix::from_rows(field, aug_col + 1, rows);
    let (r, pivots) = rref(&aug);
    if pivots.contains(&aug_col) {
        return None;
    }
    let mut x = SparseVec::zero();
    for (k, pc) in pivots.iter().enumerate() {
        if let Some(c) = r.row(k).get(aug_col) {
            x.add_entry(&field, *pc, c);
        }
    }
    debug_assert_eq!(m.apply(&x), {
        let mut bb = SparseVec::zero();
        for (i, c) in b.iter() {
            bb.add_entry(&field, i, c);
        }
        bb
    });
    Some(x)
}

pub fn rank(m: &SparseMatrix) -> usize {
    rref(m).1.len()
}

/// Incremental span of vectors in a fixed ambient dimension, kept in reduced
/// echelon form. Used for all subspace computations downstream.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub field: Field,
    pub ambient: usize,
    rows: Vec<SparseVec>, // echelonized: strictly increasing leading indices
}

impl Subspace {
    pub fn new(field: Field, ambient: usize) -> Subspace {
        Subspace { field, ambient, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the span; the remainder is zero iff `v` is contained.
    fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        for row in &self.rows {
            let lead = row.leading().unwrap();
            if let Some(c) = v.get(lead).cloned() {
                v.add_scaled(&self.field, row, &self.field.neg(&c));
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts a vector; returns true if the span grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let mut rem = self.reduce(v);
        if rem.is_zero() {
            return false;
        }
        let lead = rem.leading().unwrap();
        let inv = self.field.inv(rem.get(lead).unwrap()).unwrap();
        rem.scale(&self.field, &inv);
        // keep fully reduced form
        for row in &mut self.rows {
            if let Some(c) = row.get(lead).cloned() {
                row.add_scaled(&self.field, &rem, &self.field.neg(&c));
            }
        }
        let pos = self.rows.partition_point(|r| r.leading().unwrap() < lead);
        self.rows.insert(pos, rem);
        true
    }

    pub fn contains_all(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn vectors(&self) -> &[SparseVec] {
        &self.rows
    }
}
