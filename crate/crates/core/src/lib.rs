//! Exact and certified numerical checks on modular forms: theta series of even
//! unimodular lattices, Eisenstein series, Rankin–Selberg unfolding against
//! closed forms, certified Euler products at `s = 4`, degree-2 theta tables, and
//! Rankin convolutions of Saito–Kurokawa lifts.

pub mod app;
pub mod arith;
pub mod binary;
pub mod error;
pub mod jacobi;
pub mod lattice;
pub mod linalg;
pub mod lseries;
pub mod modforms;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
