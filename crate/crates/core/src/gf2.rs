//! Dense bit-packed vectors and matrices over GF(2).
//!
//! Storage is row-major with 64 columns per word. Sparse coordinate lists
//! are only an import/export format.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

#[inline]
fn n_words(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BinaryVector {
    len: usize,
    words: Vec<u64>,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        BinaryVector { len, words: vec![0; n_words(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in ones {
            v.set(i, true);
        }
        v
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(n_words(len), 0);
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        BinaryVector { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        iter_ones(&self.words).collect()
    }

    pub fn xor_assign(&mut self, other: &BinaryVector) {
        assert_eq!(self.len, other.len, "vector length mismatch");
        xor_into(&mut self.words, &other.words);
    }

    pub fn and(&self, other: &BinaryVector) -> BinaryVector {
        assert_eq!(self.len, other.len, "vector length mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        BinaryVector { len: self.len, words }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BinaryVector) -> bool {
        assert_eq!(self.len, other.len, "vector length mismatch");
        parity_and(&self.words, &other.words)
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

/// Iterate over set bit positions of a word slice.
pub fn iter_ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            }
        })
    })
}

#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub fn parity_and(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() % 2 == 1
}

/// Dense matrix over GF(2), bit-packed row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Result of reduced row-echelon elimination.
#[derive(Clone, Debug)]
pub struct RowReduction {
    pub reduced: BinaryMatrix,
    pub pivots: Vec<usize>,
    pub transform: BinaryMatrix,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = n_words(cols);
        BinaryMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged dense matrix");
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BinaryVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            m.row_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn from_sparse(rows: usize, cols: usize, ones: &[(usize, usize)]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows, cols);
        for &(r, c) in ones {
            if r >= rows || c >= cols {
                return Err(Gf2Error::OutOfRange { row: r, col: c, rows, cols });
            }
            m.set(r, c, true);
        }
        Ok(m)
    }

    /// Nonzero coordinates in row-major order.
    pub fn to_sparse(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in iter_ones(self.row(r)) {
                out.push((r, c));
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        let m = 1u64 << (c % 64);
        if value {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_vector(&self, r: usize) -> BinaryVector {
        BinaryVector { len: self.cols, words: self.row(r).to_vec() }
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        iter_ones(self.row(r)).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_support(&self, c: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.get(r, c)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// XOR row `src` into row `dst`.
    pub fn add_row(&mut self, dst: usize, src: usize) {
        if dst == src {
            self.row_mut(dst).fill(0);
            return;
        }
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s] as &[u64])
        };
        xor_into(a, b);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn push_row(&mut self, row: &BinaryVector) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row.words());
        self.rows += 1;
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in iter_ones(self.row(r)) {
                t.set(c, r, true);
            }
        }
        t
    }

    pub fn matmul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let (lo, hi) = (r * out.stride, (r + 1) * out.stride);
            for k in iter_ones(self.row(r)) {
                xor_into(&mut out.data[lo..hi], other.row(k));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &BinaryVector) -> Result<BinaryVector, Gf2Error> {
        if self.cols != x.len() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = BinaryVector::zeros(self.rows);
        for r in 0..self.rows {
            if parity_and(self.row(r), x.words()) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.shape() != other.shape() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "{:?} plus {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = self.clone();
        xor_into(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn hstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in iter_ones(self.row(r)) {
                out.set(r, c, true);
            }
            for c in iter_ones(other.row(r)) {
                out.set(r, self.cols + c, true);
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut out = self.clone();
        out.data.extend_from_slice(&other.data);
        out.rows += other.rows;
        Ok(out)
    }

    /// Kronecker product.
    pub fn kron(&self, other: &BinaryMatrix) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for (r1, c1) in self.to_sparse() {
            for (r2, c2) in other.to_sparse() {
                out.set(r1 * other.rows + r2, c1 * other.cols + c2, true);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            for (j, &c) in cols.iter().enumerate() {
                if (row[c / 64] >> (c % 64)) & 1 == 1 {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Eliminate in place to reduced row-echelon form, applying each row
    /// operation to `shadow` as well when given. Returns pivot columns.
    fn eliminate(&mut self, mut shadow: Option<&mut BinaryMatrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            if let Some(s) = shadow.as_deref_mut() {
                s.swap_rows(r, p);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.add_row(i, r);
                    if let Some(s) = shadow.as_deref_mut() {
                        s.add_row(i, r);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate(None).len()
    }

    /// Reduced row-echelon form with pivot columns and the invertible
    /// transform `T` such that `T * self == reduced`.
    pub fn row_reduce(&self) -> RowReduction {
        let mut reduced = self.clone();
        let mut transform = BinaryMatrix::identity(self.rows);
        let pivots = reduced.eliminate(Some(&mut transform));
        RowReduction { reduced, pivots, transform }
    }

    /// Rows form a basis of the right kernel `{x : A x = 0}`.
    pub fn kernel_basis(&self) -> BinaryMatrix {
        let mut m = self.clone();
        let pivots = m.eliminate(None);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = BinaryMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, f) {
                    out.set(i, p, true);
                }
            }
        }
        out
    }

    /// Some `x` with `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &BinaryVector) -> Option<BinaryVector> {
        assert_eq!(self.rows, b.len(), "right-hand side length mismatch");
        let mut aug = BinaryMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in iter_ones(self.row(r)) {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let pivots = aug.eliminate(None);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BinaryVector::zeros(self.cols);
        for (r, &p) in pivots.iter().enumerate() {
            if aug.get(r, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<BinaryMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let red = self.row_reduce();
        (red.pivots.len() == self.rows).then_some(red.transform)
    }

    /// True when `v` lies in the row space.
    pub fn row_space_contains(&self, v: &BinaryVector) -> bool {
        self.transpose().solve(v).is_some()
    }
}

/// Incrementally built echelon basis of a subspace of GF(2)^n.
///
/// Every stored row is zero on the pivots of all rows inserted before it,
/// so reducing in insertion order is exact.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<BinaryVector>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        EchelonBasis { len, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_matrix(m: &BinaryMatrix) -> Self {
        let mut b = Self::new(m.cols());
        for r in 0..m.rows() {
            b.insert(m.row_vector(r));
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &mut BinaryVector) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &BinaryVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Adds `v` to the span; returns false if it was already inside.
    pub fn insert(&mut self, mut v: BinaryVector) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        self.reduce(&mut v);
        let lead = iter_ones(v.words()).next();
        match lead {
            Some(p) => {
                self.rows.push(v);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SparseJson {
    rows: usize,
    cols: usize,
    ones: Vec<[usize; 2]>,
}

impl Serialize for BinaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SparseJson {
            rows: self.rows,
            cols: self.cols,
            ones: self.to_sparse().into_iter().map(|(r, c)| [r, c]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BinaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SparseJson::deserialize(d)?;
        let ones: Vec<(usize, usize)> = j.ones.iter().map(|&[r, c]| (r, c)).collect();
        BinaryMatrix::from_sparse(j.rows, j.cols, &ones).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rep3() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]])
    }

    fn naive_mul(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let n = a.len();
        let k = b.len();
        let m = if k == 0 { 0 } else { b[0].len() };
        let mut c = vec![vec![0u8; m]; n];
        for i in 0..n {
            for j in 0..m {
                let mut s = 0u8;
                for t in 0..k {
                    s ^= a[i][t] & b[t][j];
                }
                c[i][j] = s;
            }
        }
        c
    }

    fn to_dense(m: &BinaryMatrix) -> Vec<Vec<u8>> {
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c) as u8).collect()).collect()
    }

    fn dense(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
        prop::collection::vec(prop::collection::vec(0u8..2, cols), rows)
    }

    #[test]
    fn identity_times_m() {
        let m = BinaryMatrix::from_dense(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
        assert_eq!(BinaryMatrix::identity(3).matmul(&m).unwrap(), m);
    }

    #[test]
    fn rep3_annihilates_all_ones() {
        let ones = BinaryVector::ones(3);
        assert!(rep3().mul_vec(&ones).unwrap().is_zero());
    }

    #[test]
    fn matmul_dimension_error() {
        let a = BinaryMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Gf2Error::DimensionMismatch(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BinaryMatrix::zeros(4, 5).rank(), 0);
        assert_eq!(rep3().rank(), 2);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(BinaryMatrix::identity(6).kernel_basis().rows(), 0);
        let k = rep3().kernel_basis();
        assert_eq!(to_dense(&k), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn row_reduce_examples() {
        let id = BinaryMatrix::identity(5);
        let red = id.row_reduce();
        assert_eq!(red.reduced, id);
        assert_eq!(red.pivots, vec![0, 1, 2, 3, 4]);
        assert_eq!(red.transform, id);
        assert_eq!(rep3().row_reduce().pivots, vec![0, 1]);
    }

    #[test]
    fn solve_examples() {
        let b = BinaryVector::from_bits(&[1, 0, 1, 1]);
        assert_eq!(BinaryMatrix::identity(4).solve(&b), Some(b.clone()));
        let z = BinaryVector::zeros(2);
        assert!(rep3().solve(&z).unwrap().is_zero());
        let a = BinaryMatrix::from_dense(&[vec![1, 1], vec![0, 0]]);
        assert_eq!(a.solve(&BinaryVector::from_bits(&[0, 1])), None);
    }

    #[test]
    fn sparse_json_roundtrip() {
        let m = rep3();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":3,"ones":[[0,0],[0,1],[1,1],[1,2]]}"#);
        let back: BinaryMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn echelon_basis_tracks_rank() {
        let m = BinaryMatrix::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, 1, 1]]);
        let b = EchelonBasis::from_matrix(&m);
        assert_eq!(b.dim(), m.rank());
        assert!(b.contains(&BinaryVector::from_bits(&[1, 0, 1, 1])));
        assert!(!b.contains(&BinaryVector::from_bits(&[0, 0, 0, 1])));
    }

    #[test]
    fn kron_of_identities() {
        let k = BinaryMatrix::identity(2).kron(&BinaryMatrix::identity(3));
        assert_eq!(k, BinaryMatrix::identity(6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matmul_matches_naive(
            (a, b) in (1usize..=64, 1usize..=64, 1usize..=64)
                .prop_flat_map(|(n, k, m)| (dense(n, k), dense(k, m)))
        ) {
            let am = BinaryMatrix::from_dense(&a);
            let bm = BinaryMatrix::from_dense(&b);
            prop_assert_eq!(to_dense(&am.matmul(&bm).unwrap()), naive_mul(&a, &b));
        }

        #[test]
        fn rank_nullity(a in (1usize..20, 1usize..90).prop_flat_map(|(r, c)| dense(r, c))) {
            let m = BinaryMatrix::from_dense(&a);
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.rows(), m.cols());
            prop_assert_eq!(k.rank(), k.rows());
            prop_assert!(m.matmul(&k.transpose()).unwrap().is_zero());
        }

        #[test]
        fn rank_symmetric(a in dense(10, 14)) {
            let m = BinaryMatrix::from_dense(&a);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn row_reduce_contract(a in (1usize..16).prop_flat_map(|n| dense(n, n))) {
            let m = BinaryMatrix::from_dense(&a);
            let red = m.row_reduce();
            prop_assert_eq!(red.transform.matmul(&m).unwrap(), red.reduced.clone());
            prop_assert_eq!(red.transform.rank(), m.rows());
            prop_assert!(red.pivots.windows(2).all(|w| w[0] < w[1]));
            for (r, &p) in red.pivots.iter().enumerate() {
                prop_assert_eq!(red.reduced.col_support(p), vec![r]);
            }
        }

        #[test]
        fn solve_is_exact(a in dense(12, 9), bits in prop::collection::vec(0u8..2, 12)) {
            let m = BinaryMatrix::from_dense(&a);
            let b = BinaryVector::from_bits(&bits);
            if let Some(x) = m.solve(&b) {
                prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
            }
        }

        #[test]
        fn sparse_roundtrip(a in dense(7, 70)) {
            let m = BinaryMatrix::from_dense(&a);
            let back = BinaryMatrix::from_sparse(7, 70, &m.to_sparse()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
