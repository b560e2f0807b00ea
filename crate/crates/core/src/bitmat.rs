//! Dense bit-packed vectors and matrices over GF(2).
//!
//! Bits are stored little-endian by index inside 64-bit words: bit `i` lives in
//! word `i / 64` at position `i % 64`. Matrices are row-major, one [`BitVec`]
//! per row. Textual forms are bitstrings such as `"0101"` where character `k`
//! is bit `k`.

use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, BitXorAssign};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; word_count(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Vector with the given bit positions set.
    ///
    /// # Panics
    /// Panics if an index is `>= len`.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    /// Parses a bitstring of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid bit character {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(v)
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
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    /// Parity of the inner product `<self, other>`.
    pub fn dot(&self, other: &Self) -> bool {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// Returns a copy resized to `len` bits: truncated, or zero-padded.
    pub fn resized(&self, len: usize) -> Self {
        let mut out = Self::zeros(len);
        for i in self.iter_ones().take_while(|&i| i < len) {
            out.set(i, true);
        }
        out
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(
            self.len, other.len,
            "bit vector length mismatch ({} vs {})",
            self.len, other.len
        );
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bitstring())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl BitXorAssign<&BitVec> for BitVec {
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        self.check_len(rhs);
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

macro_rules! bitwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &BitVec {
            type Output = BitVec;

            fn $method(self, rhs: &BitVec) -> BitVec {
                self.check_len(rhs);
                BitVec {
                    words: self
                        .words
                        .iter()
                        .zip(&rhs.words)
                        .map(|(a, b)| a $op b)
                        .collect(),
                    len: self.len,
                }
            }
        }
    };
}

bitwise_op!(BitXor, bitxor, ^);
bitwise_op!(BitOr, bitor, |);
bitwise_op!(BitAnd, bitand, &);

/// Popcount of `(a ^ b) | c` without allocating.
pub(crate) fn weight_xor_or(a: &BitVec, b: &BitVec, c: &BitVec) -> usize {
    a.words
        .iter()
        .zip(&b.words)
        .zip(&c.words)
        .map(|((x, y), z)| ((x ^ y) | z).count_ones() as usize)
        .sum()
}

/// Popcount of `a ^ b` without allocating.
pub(crate) fn weight_xor(a: &BitVec, b: &BitVec) -> usize {
    a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// A dense `rows x cols` matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Lower-triangular all-ones matrix, diagonal included.
    pub fn lower_ones(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    /// Strictly lower-triangular all-ones matrix.
    pub fn strict_lower_ones(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            for j in 0..i {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self> {
        let cols = rows.first().map(BitVec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(Error::InvalidArgument("matrix must be non-empty".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "matrix row length",
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    pub fn from_bitstrings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|s| BitVec::parse(s.as_ref())).collect::<Result<_>>()?)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    /// Row `i`. Panics when out of range; see [`BinaryMatrix::try_row`].
    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn try_row(&self, i: usize) -> Result<&BitVec> {
        self.rows.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            bound: self.rows.len(),
        })
    }

    pub fn row_vectors(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> BitVec {
        BitVec::from_indices(self.rows.len(), (0..self.rows.len()).filter(|&i| self.get(i, j)))
    }

    pub fn transpose(&self) -> Self {
        Self {
            cols: self.rows.len(),
            rows: (0..self.cols).map(|j| self.column(j)).collect(),
        }
    }

    /// Popcount of row `i`.
    pub fn row_weight(&self, i: usize) -> Result<usize> {
        Ok(self.try_row(i)?.count_ones())
    }

    /// Matrix product over GF(2).
    pub fn multiply(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.rows() {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BitVec::zeros(other.cols);
                for k in row.iter_ones() {
                    acc ^= &other.rows[k];
                }
                acc
            })
            .collect();
        Ok(BinaryMatrix { cols: other.cols, rows })
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(BitVec::from_indices(
            self.rows.len(),
            (0..self.rows.len()).filter(|&i| self.rows[i].dot(v)),
        ))
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn invert(&self) -> Result<BinaryMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "matrix inversion (square required)",
                expected: self.rows.len(),
                found: self.cols,
            });
        }
        let n = self.cols;
        let mut work = self.rows.clone();
        let mut inv = BinaryMatrix::identity(n)?.rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| work[r].get(col)).ok_or(Error::SingularMatrix)?;
            work.swap(col, pivot);
            inv.swap(col, pivot);
            let (pivot_row, pivot_inv) = (work[col].clone(), inv[col].clone());
            for r in 0..n {
                if r != col && work[r].get(col) {
                    work[r] ^= &pivot_row;
                    inv[r] ^= &pivot_inv;
                }
            }
        }
        Ok(BinaryMatrix { cols: n, rows: inv })
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| r.count_ones() == 1 && r.get(i))
    }

    /// Rows as bitstrings, little-endian by column index.
    pub fn to_bitstrings(&self) -> Vec<String> {
        self.rows.iter().map(BitVec::to_bitstring).collect()
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_bitstrings()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&str]) -> BinaryMatrix {
        BinaryMatrix::from_bitstrings(rows).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = m(&["101", "011", "110"]);
        let i3 = BinaryMatrix::identity(3).unwrap();
        assert_eq!(i3.multiply(&a).unwrap(), a);
        assert_eq!(a.multiply(&i3).unwrap(), a);
    }

    #[test]
    fn unipotent_two_by_two_is_an_involution() {
        let a = m(&["11", "01"]);
        assert!(a.multiply(&a).unwrap().is_identity());
    }

    #[test]
    fn strict_lower_times_identity() {
        let l = BinaryMatrix::strict_lower_ones(3).unwrap();
        assert_eq!(l.multiply(&BinaryMatrix::identity(3).unwrap()).unwrap(), l);
        assert_eq!(l.to_bitstrings(), ["000", "100", "110"]);
    }

    #[test]
    fn multiply_rejects_mismatched_shapes() {
        let a = BinaryMatrix::zeros(2, 3).unwrap();
        let b = BinaryMatrix::zeros(2, 3).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invert_lower_ones_gives_bidiagonal() {
        let l = BinaryMatrix::lower_ones(3).unwrap();
        let inv = l.invert().unwrap();
        assert_eq!(inv.to_bitstrings(), ["100", "110", "011"]);
        assert!(l.multiply(&inv).unwrap().is_identity());
        assert_eq!(inv.row_weight(2).unwrap(), 2);
    }

    #[test]
    fn invert_identity() {
        let i4 = BinaryMatrix::identity(4).unwrap();
        assert_eq!(i4.invert().unwrap(), i4);
    }

    #[test]
    fn singular_matrix_is_reported() {
        assert!(matches!(m(&["11", "11"]).invert(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn row_weights() {
        assert_eq!(BinaryMatrix::identity(4).unwrap().row_weight(2).unwrap(), 1);
        assert_eq!(m(&["1111", "1111", "1111", "1111"]).row_weight(0).unwrap(), 4);
        assert!(matches!(
            BinaryMatrix::identity(4).unwrap().row_weight(4),
            Err(Error::IndexOutOfRange { index: 4, bound: 4 })
        ));
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(BinaryMatrix::zeros(0, 3).is_err());
        assert!(BinaryMatrix::identity(0).is_err());
    }

    #[test]
    fn bitvec_words_cross_boundary() {
        let v = BitVec::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.count_ones(), 4);
        let w = BitVec::from_indices(130, [63, 100]);
        assert_eq!((&v ^ &w).iter_ones().collect::<Vec<_>>(), vec![0, 64, 100, 129]);
        assert_eq!(weight_xor_or(&v, &w, &BitVec::from_indices(130, [0, 1])), 5);
    }

    fn random_invertible(n: usize, seed: u64) -> BinaryMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = BinaryMatrix::identity(n).unwrap().rows;
        for _ in 0..4 * n * n {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                let src = rows[b].clone();
                rows[a] ^= &src;
            }
        }
        BinaryMatrix::from_rows(rows).unwrap()
    }

    fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(r, c).unwrap();
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, rng.gen());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided_and_involutive(n in 1usize..80, seed in any::<u64>()) {
            let u = random_invertible(n, seed);
            let f = u.invert().unwrap();
            prop_assert!(f.multiply(&u).unwrap().is_identity());
            prop_assert!(u.multiply(&f).unwrap().is_identity());
            prop_assert_eq!(f.invert().unwrap(), u);
        }

        #[test]
        fn multiply_is_associative(a in 1usize..20, b in 1usize..20, c in 1usize..20, d in 1usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_matrix(a, b, &mut rng);
            let y = random_matrix(b, c, &mut rng);
            let z = random_matrix(c, d, &mut rng);
            let left = x.multiply(&y).unwrap().multiply(&z).unwrap();
            let right = x.multiply(&y.multiply(&z).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn bitstring_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let v = BitVec::from_bools(&bits);
            prop_assert_eq!(BitVec::parse(&v.to_bitstring()).unwrap(), v);
        }
    }
}
