//! Symplectic Pauli strings and symbolic construction of encoded Hamiltonians.
//!
//! A [`PauliString`] is `i^phase` times a tensor product of the literal
//! single-qubit matrices `I, X, Y, Z`, where qubit `q` carries `X` when only its
//! x-bit is set, `Z` when only its z-bit is set and `Y` when both are. Products
//! follow the matrix convention `XZ = -iY`.
//!
//! Hamiltonian terms are obtained by multiplying Majorana images, never by
//! transcribing closed-form weight formulas, so the weights here act as an
//! independent check on [`crate::cost`].

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitVec;
use crate::encodings::{EncodingKind, LinearEncoding};
use crate::error::{Error, Result};
use crate::graphs::{HamiltonianGraph, Ordering};

const COEFF_EPS: f64 = 1e-12;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliString {
    pub fn identity(width: usize) -> Self {
        Self {
            x: BitVec::zeros(width),
            z: BitVec::zeros(width),
            phase: 0,
        }
    }

    pub fn from_masks(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                context: "pauli masks",
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(Self { x, z, phase: phase % 4 })
    }

    /// `X` on every qubit of `support`.
    pub fn x_on(support: &BitVec) -> Self {
        Self {
            x: support.clone(),
            z: BitVec::zeros(support.len()),
            phase: 0,
        }
    }

    /// `Z` on every qubit of `support`.
    pub fn z_on(support: &BitVec) -> Self {
        Self {
            x: BitVec::zeros(support.len()),
            z: support.clone(),
            phase: 0,
        }
    }

    /// Builds a string from `(qubit, letter)` pairs. Later letters on the same
    /// qubit overwrite earlier ones.
    pub fn from_letters(width: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = Self::identity(width);
        for &(q, letter) in letters {
            if q >= width {
                return Err(Error::IndexOutOfRange { index: q, bound: width });
            }
            let (x, z) = letter.bits();
            out.x.set(q, x);
            out.z.set(q, z);
        }
        Ok(out)
    }

    /// Parses the export notation, e.g. `"X0 Z1 Y3"` or `"I"`.
    pub fn parse(width: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            if token == "I" {
                continue;
            }
            let (head, tail) = token.split_at(1);
            let letter = match head {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                _ => return Err(Error::InvalidArgument(format!("bad pauli token {token:?}"))),
            };
            let q = tail
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad pauli token {token:?}")))?;
            letters.push((q, letter));
        }
        Self::from_letters(width, &letters)
    }

    pub fn width(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &BitVec {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVec {
        &self.z
    }

    /// Exponent `k` of the global factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn letter(&self, q: usize) -> Pauli {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn weight(&self) -> usize {
        (&self.x | &self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Literal Pauli products are Hermitian; the global factor must be real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Pads with identity up to `width` qubits.
    pub fn extended(&self, width: usize) -> Self {
        Self {
            x: self.x.resized(width),
            z: self.z.resized(width),
            phase: self.phase,
        }
    }

    fn check_width(&self, other: &Self) -> Result<()> {
        if self.width() == other.width() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "pauli width",
                expected: self.width(),
                found: other.width(),
            })
        }
    }

    /// The product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        let x = &self.x ^ &other.x;
        let z = &self.z ^ &other.z;
        // Each literal letter is i^{x z} X^x Z^z; moving Z^{z1} past X^{x2}
        // costs (-1)^{z1 x2}.
        let count = |a: &BitVec, b: &BitVec| (a & b).count_ones() as i64;
        let k = self.phase as i64
            + other.phase as i64
            + count(&self.x, &self.z)
            + count(&other.x, &other.z)
            + 2 * count(&self.z, &other.x)
            - count(&x, &z);
        Ok(Self {
            x,
            z,
            phase: k.rem_euclid(4) as u8,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_width(other)?;
        Ok(self.x.dot(&other.z) == self.z.dot(&other.x))
    }

    fn masks_key(&self) -> (BitVec, BitVec) {
        (self.x.clone(), self.z.clone())
    }

    fn phase_factor(&self) -> Complex64 {
        match self.phase {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Export notation without the phase: `X3 Y5 Z7`, or `I`.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = &self.x | &self.z;
        if support.is_zero() {
            return f.write_str("I");
        }
        let mut first = true;
        for q in support.iter_ones() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let letter = match self.letter(q) {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
                Pauli::I => unreachable!(),
            };
            write!(f, "{letter}{q}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}[{self}]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTerm {
    pub coeff: Complex64,
    pub op: PauliString,
}

impl WeightedTerm {
    pub fn new(coeff: Complex64, op: PauliString) -> Self {
        Self { coeff, op }
    }

    pub fn weight(&self) -> usize {
        self.op.weight()
    }

    /// Moves the operator's phase into the coefficient.
    fn normalized(mut self) -> Self {
        self.coeff *= self.op.phase_factor();
        self.op.phase = 0;
        self
    }
}

/// A linear combination of Pauli strings used for symbolic products.
#[derive(Debug, Clone, Default)]
struct OperatorSum(Vec<WeightedTerm>);

impl OperatorSum {
    fn single(coeff: Complex64, op: PauliString) -> Self {
        Self(vec![WeightedTerm::new(coeff, op)])
    }

    fn plus(mut self, other: OperatorSum) -> Self {
        self.0.extend(other.0);
        self
    }

    fn scaled(mut self, c: Complex64) -> Self {
        for t in &mut self.0 {
            t.coeff *= c;
        }
        self
    }

    fn times(&self, other: &OperatorSum) -> Result<OperatorSum> {
        let mut out = Vec::with_capacity(self.0.len() * other.0.len());
        for a in &self.0 {
            for b in &other.0 {
                out.push(WeightedTerm::new(a.coeff * b.coeff, a.op.mul(&b.op)?));
            }
        }
        Ok(OperatorSum(out))
    }

    /// Merges equal strings and drops vanishing coefficients, keeping the order
    /// of first appearance.
    fn collected(self) -> Vec<WeightedTerm> {
        let mut index: HashMap<(BitVec, BitVec), usize> = HashMap::new();
        let mut merged: Vec<WeightedTerm> = Vec::new();
        for term in self.0.into_iter().map(WeightedTerm::normalized) {
            match index.get(&term.op.masks_key()) {
                Some(&at) => merged[at].coeff += term.coeff,
                None => {
                    index.insert(term.op.masks_key(), merged.len());
                    merged.push(term);
                }
            }
        }
        merged.into_iter().filter(|t| t.coeff.norm() > COEFF_EPS).collect()
    }
}

/// Images of the Majorana operators of mode `i`.
///
/// `gamma = X_{U(i)} Z_{P(i)}` and `gamma_bar = i X_{U(i)} Z_{R(i)}`. Both are
/// Hermitian with a real global sign.
pub fn majorana_images(enc: &LinearEncoding, i: usize) -> Result<(PauliString, PauliString)> {
    enc.check_mode(i)?;
    let x = PauliString::x_on(enc.u_column(i));
    let gamma = x.mul(&PauliString::z_on(enc.p().row(i)))?;
    let gamma_bar = x.mul(&PauliString::z_on(enc.r().row(i)))?;
    let gamma_bar = gamma_bar.clone().with_phase(gamma_bar.phase + 1);
    Ok((gamma, gamma_bar))
}

/// Annihilation and creation operators of mode `i` as Majorana sums.
fn ladder_operators(enc: &LinearEncoding, i: usize) -> Result<(OperatorSum, OperatorSum)> {
    let (g, gb) = majorana_images(enc, i)?;
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let lower = OperatorSum::single(half, g.clone()).plus(OperatorSum::single(half_i, gb.clone()));
    let raise = OperatorSum::single(half, g).plus(OperatorSum::single(-half_i, gb));
    Ok((lower, raise))
}

fn number_operator(enc: &LinearEncoding, i: usize) -> Result<OperatorSum> {
    let (lower, raise) = ladder_operators(enc, i)?;
    raise.times(&lower)
}

/// Pauli expansion of `c a_i^dag a_j + conj(c) a_j^dag a_i`.
pub fn hopping_terms(enc: &LinearEncoding, i: usize, j: usize, coeff: Complex64) -> Result<Vec<WeightedTerm>> {
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "hopping term needs distinct modes, got ({i}, {j})"
        )));
    }
    if coeff.norm() <= COEFF_EPS {
        return Err(Error::InvalidArgument("hopping coefficient is zero".into()));
    }
    let (lower_i, raise_i) = ladder_operators(enc, i)?;
    let (lower_j, raise_j) = ladder_operators(enc, j)?;
    let forward = raise_i.times(&lower_j)?.scaled(coeff);
    let backward = raise_j.times(&lower_i)?.scaled(coeff.conj());
    Ok(forward.plus(backward).collected())
}

/// Pauli expansion of `n_i n_j`: identity, `Z_{F_i}`, `Z_{F_j}` and
/// `Z_{F_i ^ F_j}` with coefficients 1/4, -1/4, -1/4, 1/4.
pub fn interaction_term(enc: &LinearEncoding, i: usize, j: usize) -> Result<Vec<WeightedTerm>> {
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "interaction term needs distinct modes, got ({i}, {j})"
        )));
    }
    Ok(number_operator(enc, i)?.times(&number_operator(enc, j)?)?.collected())
}

/// Pauli expansion of `n_i = (1 + i gamma_i gamma_bar_i) / 2`.
pub fn number_term(enc: &LinearEncoding, i: usize) -> Result<Vec<WeightedTerm>> {
    Ok(number_operator(enc, i)?.collected())
}

/// Which fermionic term a qubit term came from, in mode positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermOrigin {
    Number { mode: usize },
    Hopping { i: usize, j: usize },
    Interaction { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub origin: TermOrigin,
    pub term: WeightedTerm,
}

/// An encoded qubit Hamiltonian, one entry per Pauli string of each fermionic
/// term. Strings are not merged across fermionic terms.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitHamiltonian {
    pub encoding: EncodingKind,
    /// Number of data qubits (fermionic modes).
    pub modes: usize,
    /// Total qubit count, data plus ancillas.
    pub width: usize,
    pub terms: Vec<HamiltonianTerm>,
}

impl QubitHamiltonian {
    fn non_identity(&self) -> impl Iterator<Item = &HamiltonianTerm> {
        self.terms.iter().filter(|t| !t.term.op.is_identity())
    }

    pub fn total_weight(&self) -> u64 {
        self.non_identity().map(|t| t.term.weight() as u64).sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.non_identity().map(|t| t.term.weight() as u64).max().unwrap_or(0)
    }

    /// Total weight of the strings coming from hopping terms.
    pub fn hopping_weight(&self) -> u64 {
        self.terms
            .iter()
            .filter(|t| matches!(t.origin, TermOrigin::Hopping { .. }))
            .map(|t| t.term.weight() as u64)
            .sum()
    }

    /// One line per term: `(<re>,<im>) <pauli>`.
    pub fn export_lines(&self) -> Vec<String> {
        fn num(v: f64) -> f64 {
            if v == 0.0 {
                0.0
            } else {
                v
            }
        }
        self.terms
            .iter()
            .map(|t| {
                let c = t.term.coeff * t.term.op.phase_factor();
                format!("({},{}) {}", num(c.re), num(c.im), t.term.op)
            })
            .collect()
    }
}

/// Builds `H_q(order)`: every vertex `v` is placed on mode `order[v]` before
/// encoding.
pub fn assemble_hamiltonian(
    graph: &HamiltonianGraph,
    enc: &LinearEncoding,
    order: &Ordering,
) -> Result<QubitHamiltonian> {
    if enc.n() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "encoding modes vs graph vertices",
            expected: graph.n(),
            found: enc.n(),
        });
    }
    if order.len() != graph.n() {
        return Err(Error::NonBijectiveOrder {
            n: graph.n(),
            reason: format!("ordering has length {}", order.len()),
        });
    }
    let mut terms = Vec::new();
    let mut push_all = |origin: TermOrigin, ts: Vec<WeightedTerm>| {
        terms.extend(ts.into_iter().map(|term| HamiltonianTerm { origin, term }));
    };
    for mode in 0..graph.n() {
        if graph.has_number_term(order.vertex_at(mode)) {
            push_all(TermOrigin::Number { mode }, number_term(enc, mode)?);
        }
    }
    for edge in graph.edges() {
        let (a, b) = (order.position(edge.u), order.position(edge.v));
        let (i, j) = (a.min(b), a.max(b));
        if edge.attrs.hopping {
            push_all(
                TermOrigin::Hopping { i, j },
                hopping_terms(enc, i, j, edge.attrs.coeff.representative())?,
            );
        }
        if edge.attrs.interaction {
            push_all(TermOrigin::Interaction { i, j }, interaction_term(enc, i, j)?);
        }
    }
    Ok(QubitHamiltonian {
        encoding: enc.kind(),
        modes: enc.n(),
        width: enc.n(),
        terms,
    })
}
