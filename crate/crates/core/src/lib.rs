//! Symplectic normal forms for positive-semidefinite quadratic Hamiltonians,
//! and a lowering pipeline from lumped superconducting circuits to quantized
//! models built on top of it.

pub mod circuit_builder;
pub mod linalg;
pub mod models;
pub mod netlist;
pub mod quantizer;
pub mod williamson;
