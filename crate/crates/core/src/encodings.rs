//! Linear fermion-qubit encodings.
//!
//! A linear encoding sends the occupation bitstring `f` of `n` modes to the
//! qubit basis state `U f` for an invertible `U` over GF(2). Everything the
//! rest of the crate needs is derived from `U`:
//!
//! * `F = U^-1`; row `F_i` is the set of qubits whose parity is the occupation
//!   of mode `i`.
//! * `P_i = F_0 ^ ... ^ F_{i-1}`, the qubits carrying the sign of modes below `i`.
//! * `R_i = P_i ^ F_i`.
//! * Column `U(i)` is the set of qubits flipped by a ladder operator on mode `i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitmat::{BinaryMatrix, BitVec};
use crate::error::{Error, Result};

/// The supported encoding families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingKind {
    #[serde(alias = "jw")]
    JordanWigner,
    #[serde(alias = "pb")]
    ParityBasis,
    #[serde(alias = "bk")]
    BravyiKitaev,
    #[serde(alias = "tt")]
    TernaryTree,
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 4] = [
        EncodingKind::JordanWigner,
        EncodingKind::ParityBasis,
        EncodingKind::BravyiKitaev,
        EncodingKind::TernaryTree,
    ];

    /// Two-letter code used on the command line and in reports.
    pub fn code(self) -> &'static str {
        match self {
            EncodingKind::JordanWigner => "jw",
            EncodingKind::ParityBasis => "pb",
            EncodingKind::BravyiKitaev => "bk",
            EncodingKind::TernaryTree => "tt",
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" => Ok(EncodingKind::JordanWigner),
            "pb" | "parity" | "parity-basis" => Ok(EncodingKind::ParityBasis),
            "bk" | "bravyi-kitaev" => Ok(EncodingKind::BravyiKitaev),
            "tt" | "ternary-tree" => Ok(EncodingKind::TernaryTree),
            other => Err(Error::InvalidArgument(format!("unknown encoding {other:?}"))),
        }
    }
}

/// An encoding together with its derived set families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEncoding {
    kind: EncodingKind,
    u: BinaryMatrix,
    f: BinaryMatrix,
    p: BinaryMatrix,
    r: BinaryMatrix,
    u_columns: Vec<BitVec>,
}

impl LinearEncoding {
    /// Builds the encoding of the given family on `n` modes.
    pub fn build(kind: EncodingKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("mode count must be at least 1".into()));
        }
        let u = match kind {
            EncodingKind::JordanWigner => BinaryMatrix::identity(n)?,
            EncodingKind::ParityBasis => BinaryMatrix::lower_ones(n)?,
            EncodingKind::BravyiKitaev => fenwick_matrix(n)?,
            EncodingKind::TernaryTree => pruned_ternary_tree(n)?,
        };
        Self::from_matrix(kind, u)
    }

    /// Wraps an arbitrary invertible `U`, tagging it with `kind`.
    pub fn from_matrix(kind: EncodingKind, u: BinaryMatrix) -> Result<Self> {
        let (f, p, r) = derive_pr(&u)?;
        let u_columns = (0..u.cols()).map(|j| u.column(j)).collect();
        Ok(Self {
            kind,
            u,
            f,
            p,
            r,
            u_columns,
        })
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn u(&self) -> &BinaryMatrix {
        &self.u
    }

    pub fn f(&self) -> &BinaryMatrix {
        &self.f
    }

    pub fn p(&self) -> &BinaryMatrix {
        &self.p
    }

    pub fn r(&self) -> &BinaryMatrix {
        &self.r
    }

    /// Column `U(i)`: the qubits flipped by a ladder operator on mode `i`.
    pub fn u_column(&self, i: usize) -> &BitVec {
        &self.u_columns[i]
    }

    pub(crate) fn check_mode(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                bound: self.n(),
            })
        }
    }

    /// Qubit basis state `U f` encoding the occupation vector `f`.
    pub fn encode_state(&self, occupation: &BitVec) -> Result<BitVec> {
        self.u.mul_vec(occupation)
    }

    pub fn dump(&self) -> EncodingDump {
        EncodingDump {
            kind: self.kind,
            n: self.n(),
            u: self.u.to_bitstrings(),
            f: self.f.to_bitstrings(),
            p: self.p.to_bitstrings(),
            r: self.r.to_bitstrings(),
        }
    }
}

/// JSON form of an encoding: matrices as arrays of row bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingDump {
    pub kind: EncodingKind,
    pub n: usize,
    #[serde(rename = "U")]
    pub u: Vec<String>,
    #[serde(rename = "F")]
    pub f: Vec<String>,
    #[serde(rename = "P")]
    pub p: Vec<String>,
    #[serde(rename = "R")]
    pub r: Vec<String>,
}

/// Derives `(F, P, R)` from `U`.
pub fn derive_pr(u: &BinaryMatrix) -> Result<(BinaryMatrix, BinaryMatrix, BinaryMatrix)> {
    let f = u.invert()?;
    let n = f.rows();
    let mut p_rows = Vec::with_capacity(n);
    let mut r_rows = Vec::with_capacity(n);
    let mut acc = BitVec::zeros(n);
    for i in 0..n {
        p_rows.push(acc.clone());
        acc ^= f.row(i);
        r_rows.push(acc.clone());
    }
    Ok((f, BinaryMatrix::from_rows(p_rows)?, BinaryMatrix::from_rows(r_rows)?))
}

/// Bravyi-Kitaev matrix for any `n`: column `j` is set on `j` and on each
/// Fenwick-update ancestor `j | (j + 1)` below `n`.
fn fenwick_matrix(n: usize) -> Result<BinaryMatrix> {
    let mut u = BinaryMatrix::zeros(n, n)?;
    for j in 0..n {
        let mut row = j;
        while row < n {
            u.set(row, j, true);
            row |= row + 1;
        }
    }
    Ok(u)
}

/// One step of the ternary-tree block recursion, size `m -> 3m + 1`.
fn ternary_step(prev: &BinaryMatrix) -> Result<BinaryMatrix> {
    let m = prev.rows();
    let size = 3 * m + 1;
    let mut next = BinaryMatrix::zeros(size, size)?;
    for i in 0..m {
        for j in 0..m {
            if prev.get(i, j) {
                next.set(i, j, true);
                next.set(2 * m + 1 + i, 2 * m + 1 + j, true);
            }
            // anti-transpose: (A)_{i,j} = prev_{m-1-j, m-1-i}
            if prev.get(m - 1 - j, m - 1 - i) {
                next.set(m + 1 + i, m + 1 + j, true);
            }
        }
    }
    for j in 0..=2 * m {
        next.set(m, j, true);
    }
    Ok(next)
}

/// Sizes produced by the ternary-tree recursion: 1, 4, 13, 40, 121, ...
pub fn ternary_tree_size_at_least(n: usize) -> usize {
    let mut size = 1;
    while size < n {
        size = 3 * size + 1;
    }
    size
}

/// Full ternary-tree matrix of the smallest recursion size `>= n`.
pub fn ternary_tree_matrix(n: usize) -> Result<BinaryMatrix> {
    let target = ternary_tree_size_at_least(n.max(1));
    let mut u = BinaryMatrix::identity(1)?;
    while u.rows() < target {
        u = ternary_step(&u)?;
    }
    Ok(u)
}

fn pruned_ternary_tree(n: usize) -> Result<BinaryMatrix> {
    let full = ternary_tree_matrix(n)?;
    if full.rows() == n {
        return Ok(full);
    }
    let rows = (0..n).map(|i| full.row(i).resized(n)).collect();
    let pruned = BinaryMatrix::from_rows(rows)?;
    match pruned.invert() {
        Ok(_) => Ok(pruned),
        Err(Error::SingularMatrix) => Err(Error::PruningFailed { n }),
        Err(e) => Err(e),
    }
}
