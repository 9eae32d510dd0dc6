//! Exact linear algebra over a [`Field`]: matrices, reduced row-echelon form,
//! canonical subspaces, intersection, sum, kernels and exact solving.
//!
//! Subspaces are always stored canonically (RREF basis), so equal subspaces
//! have identical basis matrices and containers can hash and compare by
//! representation. GF(2) matrices are eliminated on bit-packed rows; the
//! generic path is kept as the oracle for that fast path.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::Field;

/// Cap on q^dim for vector enumeration.
pub const MAX_VECTOR_ENUMERATION: u128 = 1 << 24;

/// Dense row-major matrix of packed field-element reps.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<u32>>) -> Result<Matrix> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let order = field.order();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            for &x in r {
                if x >= order {
                    return Err(Error::InvalidElement {
                        index: x as u64,
                        order: order as u64,
                    });
                }
                data.push(x);
            }
        }
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(v < self.field.order());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Entry-wise conjugation x -> x^(p^sigma).
    pub fn conjugate(&self, sigma: i64) -> Matrix {
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            *x = self.field.frobenius(*x, sigma);
        }
        m
    }

    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zero(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let add = f.mul(a, other.get(l, j));
                    out.set(i, j, f.add(out.get(i, j), add));
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs {} rows",
                v.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut out = vec![0u32; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] = f.add(out[j], f.mul(a, self.get(i, j)));
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Reduced row-echelon form and rank. Dispatches to the bit-packed
    /// eliminator over GF(2), the generic eliminator elsewhere; both produce
    /// the (unique) RREF.
    pub fn rref(&self) -> (Matrix, usize) {
        if self.field.order() == 2 {
            let bm = BitMatrix::from_matrix(self);
            let (red, rank) = bm.rref();
            (red.to_matrix(&self.field), rank)
        } else {
            self.rref_generic()
        }
    }

    /// Generic-path RREF; the test oracle for the GF(2) fast path.
    pub fn rref_generic(&self) -> (Matrix, usize) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivot_row = 0usize;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let mut sel = None;
            for r in pivot_row..m.rows {
                if m.get(r, col) != 0 {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != pivot_row {
                for c in 0..m.cols {
                    let tmp = m.get(sel, c);
                    m.set(sel, c, m.get(pivot_row, c));
                    m.set(pivot_row, c, tmp);
                }
            }
            let inv = f.inv(m.get(pivot_row, col)).expect("pivot nonzero");
            if inv != 1 {
                for c in 0..m.cols {
                    m.set(pivot_row, c, f.mul(inv, m.get(pivot_row, c)));
                }
            }
            for r in 0..m.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..m.cols {
                    let sub = f.mul(factor, m.get(pivot_row, c));
                    m.set(r, c, f.sub(m.get(r, c), sub));
                }
            }
            pivot_row += 1;
        }
        (m, pivot_row)
    }

    /// Right kernel {x : M x = 0} as a canonical subspace of F^cols.
    pub fn kernel(&self) -> Subspace {
        let (red, rank) = self.rref();
        let mut pivots = Vec::with_capacity(rank);
        let mut col = 0usize;
        for r in 0..rank {
            while red.get(r, col) == 0 {
                col += 1;
            }
            pivots.push(col);
            col += 1;
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = &self.field;
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0u32; self.cols];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(red.get(r, fc));
            }
            basis.push(v);
        }
        Subspace::span(self.field.clone(), self.cols, &basis).expect("kernel vectors well formed")
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zero(self.field.clone(), n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let (red, _) = aug.rref();
        // invertible iff the left block reduced to the identity
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { 1 } else { 0 };
                if red.get(r, c) != want {
                    return None;
                }
            }
        }
        let mut inv = Matrix::zero(self.field.clone(), n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, red.get(r, n + c));
            }
        }
        Some(inv)
    }

    /// One solution x of M x = rhs (column convention), if any.
    pub fn solve(&self, rhs: &[u32]) -> Result<Option<Vec<u32>>> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} vs {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zero(self.field.clone(), self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, rhs[r]);
        }
        let (red, rank) = aug.rref();
        let mut sol = vec![0u32; self.cols];
        for r in 0..rank {
            let mut col = 0;
            while col <= self.cols && red.get(r, col) == 0 {
                col += 1;
            }
            if col == self.cols {
                return Ok(None); // pivot in the rhs column: inconsistent
            }
            sol[col] = red.get(r, self.cols);
        }
        Ok(Some(sol))
    }
}

impl PartialOrd for Matrix {
    fn partial_cmp(&self, other: &Matrix) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Matrix {
    fn cmp(&self, other: &Matrix) -> Ordering {
        (self.field.p(), self.field.k(), self.rows, self.cols, &self.data).cmp(&(
            other.field.p(),
            other.field.k(),
            other.rows,
            other.cols,
            &other.data,
        ))
    }
}

/// Bit-packed GF(2) matrix with word-parallel elimination.
pub(crate) struct BitMatrix {
    pub cols: usize,
    words: usize,
    pub rows: Vec<Vec<u64>>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> BitMatrix {
        BitMatrix {
            cols,
            words: cols.div_ceil(64).max(1),
            rows: Vec::new(),
        }
    }

    pub fn from_matrix(m: &Matrix) -> BitMatrix {
        let mut bm = BitMatrix::new(m.cols());
        for r in 0..m.rows() {
            bm.push_row_bits(m.row(r).iter().map(|&x| x == 1));
        }
        bm
    }

    pub fn push_row_bits(&mut self, bits: impl Iterator<Item = bool>) {
        let mut row = vec![0u64; self.words];
        for (i, b) in bits.enumerate() {
            if b {
                row[i / 64] |= 1 << (i % 64);
            }
        }
        self.rows.push(row);
    }

    fn bit(row: &[u64], c: usize) -> bool {
        row[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn to_matrix(&self, field: &Field) -> Matrix {
        let mut m = Matrix::zero(field.clone(), self.rows.len(), self.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for c in 0..self.cols {
                if Self::bit(row, c) {
                    m.set(r, c, 1);
                }
            }
        }
        m
    }

    pub fn rref(&self) -> (BitMatrix, usize) {
        let mut rows = self.rows.clone();
        let n = rows.len();
        let mut pivot_row = 0usize;
        for col in 0..self.cols {
            if pivot_row == n {
                break;
            }
            let mut sel = None;
            for (r, row) in rows.iter().enumerate().take(n).skip(pivot_row) {
                if Self::bit(row, col) {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            rows.swap(sel, pivot_row);
            let pivot = rows[pivot_row].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pivot_row && Self::bit(row, col) {
                    for (w, pw) in row.iter_mut().zip(&pivot) {
                        *w ^= pw;
                    }
                }
            }
            pivot_row += 1;
        }
        (
            BitMatrix {
                cols: self.cols,
                words: self.words,
                rows,
            },
            pivot_row,
        )
    }
}

/// A subspace of V(ambient_dim, q), stored as a canonical RREF basis with no
/// zero rows.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace dim {} of V({},{}) {:?}",
            self.dim(),
            self.ambient_dim,
            self.field().order(),
            (0..self.basis.rows()).map(|r| self.basis.row(r)).collect::<Vec<_>>()
        )
    }
}

impl Subspace {
    /// Canonical subspace spanned by the given row vectors; the empty list
    /// spans the zero subspace.
    pub fn span(field: Field, ambient_dim: usize, generators: &[Vec<u32>]) -> Result<Subspace> {
        if generators.is_empty() {
            return Ok(Subspace::zero(field, ambient_dim));
        }
        if generators.iter().any(|g| g.len() != ambient_dim) {
            return Err(Error::DimensionMismatch(format!(
                "generators must have length {ambient_dim}"
            )));
        }
        let m = Matrix::from_rows(field, generators.to_vec())?;
        Ok(Self::from_matrix_rows(&m))
    }

    /// Canonicalizes the row space of a matrix.
    pub fn from_matrix_rows(m: &Matrix) -> Subspace {
        let (red, rank) = m.rref();
        let rows: Vec<Vec<u32>> = (0..rank).map(|r| red.row(r).to_vec()).collect();
        Subspace {
            ambient_dim: m.cols(),
            basis: Matrix::from_rows(m.field().clone(), rows).expect("rows already validated"),
        }
    }

    pub fn zero(field: Field, ambient_dim: usize) -> Subspace {
        Subspace {
            ambient_dim,
            basis: Matrix::zero(field, 0, ambient_dim),
        }
    }

    pub fn full(field: Field, ambient_dim: usize) -> Subspace {
        Subspace {
            ambient_dim,
            basis: Matrix::identity(field, ambient_dim),
        }
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.basis.rows()).map(|r| self.basis.row(r))
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::MixedFields);
        }
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let mut rows: Vec<Vec<u32>> = self.basis_rows().map(|r| r.to_vec()).collect();
        rows.extend(other.basis_rows().map(|r| r.to_vec()));
        Subspace::span(self.field().clone(), self.ambient_dim, &rows)
    }

    /// Intersection via Zassenhaus: row-reduce [A|A; B|0] and read the right
    /// blocks of rows whose left block vanished.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.intersect_inner(other, false)
    }

    /// Intersection forced through the generic eliminator (fast-path oracle).
    pub fn intersect_generic(&self, other: &Subspace) -> Result<Subspace> {
        self.intersect_inner(other, true)
    }

    fn intersect_inner(&self, other: &Subspace, force_generic: bool) -> Result<Subspace> {
        self.check_compatible(other)?;
        let n = self.ambient_dim;
        let field = self.field().clone();
        let mut stacked =
            Matrix::zero(field.clone(), self.dim() + other.dim(), 2 * n);
        for (r, row) in self.basis_rows().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                stacked.set(r, c, x);
                stacked.set(r, n + c, x);
            }
        }
        for (r, row) in other.basis_rows().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                stacked.set(self.dim() + r, c, x);
            }
        }
        let (red, rank) = if force_generic {
            stacked.rref_generic()
        } else {
            stacked.rref()
        };
        let mut rows = Vec::new();
        for r in 0..rank {
            if red.row(r)[..n].iter().all(|&x| x == 0) {
                rows.push(red.row(r)[n..].to_vec());
            }
        }
        Subspace::span(field, n, &rows)
    }

    pub fn contains(&self, v: &[u32]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs ambient {}",
                v.len(),
                self.ambient_dim
            )));
        }
        // reduce v against the RREF basis
        let f = self.field();
        let mut v = v.to_vec();
        for row in self.basis_rows() {
            let pivot = row.iter().position(|&x| x != 0).expect("no zero rows");
            let c = v[pivot];
            if c != 0 {
                for (x, &b) in v.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(c, b));
                }
            }
        }
        Ok(v.iter().all(|&x| x == 0))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        for row in other.basis_rows() {
            if !self.contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All q^dim vectors, zero first, in the deterministic order induced by
    /// base-q coefficient counting against the canonical basis.
    pub fn vectors(&self) -> Result<VectorIter<'_>> {
        let q = self.field().order() as u128;
        let total = q.pow(self.dim() as u32);
        if total > MAX_VECTOR_ENUMERATION {
            return Err(Error::EnumerationTooLarge {
                size: total,
                cap: MAX_VECTOR_ENUMERATION,
            });
        }
        Ok(VectorIter {
            space: self,
            next: 0,
            total: total as u64,
        })
    }
}

#[derive(Debug)]
pub struct VectorIter<'a> {
    space: &'a Subspace,
    next: u64,
    total: u64,
}

impl Iterator for VectorIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.next >= self.total {
            return None;
        }
        let f = self.space.field();
        let q = f.order() as u64;
        let mut idx = self.next;
        self.next += 1;
        let mut v = vec![0u32; self.space.ambient_dim()];
        for row in self.space.basis_rows() {
            let c = (idx % q) as u32;
            idx /= q;
            if c != 0 {
                for (x, &b) in v.iter_mut().zip(row) {
                    *x = f.add(*x, f.mul(c, b));
                }
            }
        }
        Some(v)
    }
}

// External interface:
// {"field": FieldRef, "ambient_dim": N, "basis": [[elementIndex,...],...]}
// with basis in RREF; readers reject non-canonical input.
#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    field: Field,
    ambient_dim: usize,
    basis: Vec<Vec<u32>>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr {
            field: self.field().clone(),
            ambient_dim: self.ambient_dim,
            basis: self.basis_rows().map(|r| r.to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Subspace, D::Error> {
        let r = SubspaceRepr::deserialize(d)?;
        let s = Subspace::span(r.field, r.ambient_dim, &r.basis).map_err(D::Error::custom)?;
        let canonical: Vec<Vec<u32>> = s.basis_rows().map(|x| x.to_vec()).collect();
        if canonical != r.basis {
            return Err(D::Error::custom("basis is not in canonical reduced form"));
        }
        Ok(s)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    fn mat(q: u64, rows: Vec<Vec<u32>>) -> Matrix {
        Matrix::from_rows(gf(q), rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let id = Matrix::identity(gf(2), 3);
        let (red, rank) = id.rref();
        assert_eq!(red, id);
        assert_eq!(rank, 3);

        let m = mat(2, vec![vec![1, 1], vec![0, 0]]);
        let (red, rank) = m.rref();
        assert_eq!(rank, 1);
        assert_eq!(red.row(0), &[1, 1]);
        assert_eq!(red.row(1), &[0, 0]);

        // third row is the sum of the first two
        let m = mat(2, vec![vec![0, 1, 1], vec![1, 1, 0], vec![1, 0, 1]]);
        assert_eq!(m.rref().1, 2);

        // idempotent
        let (red, _) = m.rref();
        assert_eq!(red.rref().0, red);
    }

    #[test]
    fn span_examples() {
        let z = Subspace::span(gf(2), 3, &[]).unwrap();
        assert_eq!(z.dim(), 0);
        assert_eq!(z, Subspace::zero(gf(2), 3));

        let full = Subspace::span(gf(2), 2, &[vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(full, Subspace::full(gf(2), 2));

        let s = Subspace::span(gf(2), 3, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(s.dim(), 2);

        assert!(Subspace::span(gf(2), 3, &[vec![1, 0]]).is_err());
    }

    #[test]
    fn canonical_equality() {
        let a = Subspace::span(gf(2), 2, &[vec![1, 1], vec![0, 1]]).unwrap();
        let b = Subspace::span(gf(2), 2, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.basis().row(0), &[1, 0]);
    }

    #[test]
    fn intersect_examples() {
        let f = gf(2);
        let s = Subspace::span(f.clone(), 4, &[vec![1, 0, 1, 0], vec![0, 1, 1, 1]]).unwrap();
        assert_eq!(s.intersect(&s).unwrap(), s);

        let e1 = Subspace::span(f.clone(), 2, &[vec![1, 0]]).unwrap();
        let e2 = Subspace::span(f.clone(), 2, &[vec![0, 1]]).unwrap();
        assert_eq!(e1.intersect(&e2).unwrap().dim(), 0);
    }

    #[test]
    fn sum_and_dim_formula_exhaustive() {
        // dim(S cap T) + dim(S + T) = dim S + dim T over all subspace pairs
        // of V(4,2) and V(4,3)
        for q in [2u64, 3] {
            let f = gf(q);
            let all = all_subspaces(&f, 4);
            for s in &all {
                for t in &all {
                    let i = s.intersect(t).unwrap();
                    let u = s.sum(t).unwrap();
                    assert_eq!(i.dim() + u.dim(), s.dim() + t.dim());
                    // intersection commutative
                    assert_eq!(i, t.intersect(s).unwrap());
                    assert!(u.contains_subspace(s).unwrap());
                    assert!(i.contains_subspace(&i.intersect(s).unwrap()).unwrap());
                }
            }
        }
    }

    /// Every subspace of V(n,q), built level by level.
    pub(crate) fn all_subspaces(f: &Field, n: usize) -> Vec<Subspace> {
        let mut levels = vec![vec![Subspace::zero(f.clone(), n)]];
        let full = Subspace::full(f.clone(), n);
        let vectors: Vec<Vec<u32>> = full.vectors().unwrap().collect();
        loop {
            let last = levels.last().unwrap();
            let mut next = std::collections::BTreeSet::new();
            for s in last {
                for v in &vectors {
                    if v.iter().all(|&x| x == 0) || s.contains(v).unwrap() {
                        continue;
                    }
                    let mut rows: Vec<Vec<u32>> = s.basis_rows().map(|r| r.to_vec()).collect();
                    rows.push(v.clone());
                    next.insert(Subspace::span(f.clone(), n, &rows).unwrap());
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next.into_iter().collect());
        }
        levels.into_iter().flatten().collect()
    }

    #[test]
    fn all_subspaces_counts() {
        // Gaussian binomials: V(4,2) has 1+15+35+15+1 = 67 subspaces
        assert_eq!(all_subspaces(&gf(2), 4).len(), 67);
        // V(4,3): 1+40+130+40+1 = 212
        assert_eq!(all_subspaces(&gf(3), 4).len(), 212);
    }

    #[test]
    fn kernel_and_solve() {
        let id = Matrix::identity(gf(3), 3);
        assert_eq!(id.kernel().dim(), 0);
        assert_eq!(id.solve(&[1, 2, 0]).unwrap().unwrap(), vec![1, 2, 0]);

        let m = mat(2, vec![vec![1, 1, 0], vec![0, 0, 1]]);
        let k = m.kernel();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis().row(0), &[1, 1, 0]);
        // inconsistent system
        let m = mat(2, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(m.solve(&[1, 0]).unwrap(), None);
    }

    #[test]
    fn kernel_matches_definition() {
        for q in [2u64, 3, 4] {
            let f = gf(q);
            let m = Matrix::from_rows(
                f.clone(),
                vec![vec![1, 2 % q as u32, 0, 1], vec![0, 1, 1, 0]],
            )
            .unwrap();
            let k = m.kernel();
            assert_eq!(k.dim(), 2);
            for v in k.vectors().unwrap() {
                // M v = 0
                for r in 0..m.rows() {
                    let mut acc = 0u32;
                    for c in 0..m.cols() {
                        acc = f.add(acc, f.mul(m.get(r, c), v[c]));
                    }
                    assert_eq!(acc, 0);
                }
            }
        }
    }

    #[test]
    fn vector_enumeration() {
        let s = Subspace::span(
            gf(2),
            4,
            &[vec![1, 0, 0, 1], vec![0, 1, 0, 0], vec![0, 0, 1, 1]],
        )
        .unwrap();
        let vs: Vec<_> = s.vectors().unwrap().collect();
        assert_eq!(vs.len(), 8);
        assert_eq!(vs[0], vec![0, 0, 0, 0]);
        // coefficient counting: second vector is the first basis row
        assert_eq!(vs[1], vec![1, 0, 0, 1]);
        let unique: std::collections::HashSet<_> = vs.iter().collect();
        assert_eq!(unique.len(), 8);

        let big = Subspace::full(gf(4), 13);
        assert!(matches!(
            big.vectors().unwrap_err(),
            Error::EnumerationTooLarge { .. }
        ));
    }

    #[test]
    fn subspace_serde_rejects_noncanonical() {
        let s = Subspace::span(gf(2), 3, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: Subspace = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        // non-canonical basis for the same space is rejected
        let bad = js.replace("[[1,0,1],[0,1,1]]", "[[1,1,0],[0,1,1]]");
        assert_ne!(bad, js);
        assert!(serde_json::from_str::<Subspace>(&bad).is_err());
    }

    proptest! {
        #[test]
        fn span_round_trip(q in prop::sample::select(vec![2u64, 3, 4]),
                           seed in 0u64..1000) {
            let f = gf(q);
            let n = 5usize;
            // deterministic pseudo-random generators from the seed
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut rows = Vec::new();
            for _ in 0..3 {
                let mut row = Vec::new();
                for _ in 0..n {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    row.push((state >> 33) as u32 % f.order());
                }
                rows.push(row);
            }
            let s = Subspace::span(f.clone(), n, &rows).unwrap();
            let again = Subspace::span(
                f.clone(), n, &s.basis_rows().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(&again, &s);
            // every original generator lies in the span
            for row in &rows {
                prop_assert!(s.contains(row).unwrap());
            }
        }
    }
}
