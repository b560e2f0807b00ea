//! Linear fermion-to-qubit encodings over GF(2), Pauli-weight cost models,
//! label-order optimization and ancilla-assisted Jordan-Wigner constructions.

pub mod ancilla;
pub mod bitmat;
pub mod cost;
pub mod encodings;
pub mod error;
pub mod experiment;
pub mod graphs;
pub mod pauli;
pub mod qap;

pub use error::{Error, Result};
