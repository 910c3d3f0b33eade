//! Exact polynomials, monotone algebraic circuits with projection,
//! summation and production gates, their transformations, and Newton
//! polygon shadows.

pub mod abp;
pub mod acceptance;
pub mod circuit;
pub mod error;
pub mod gen;
pub mod geometry;
pub mod oracle;
pub mod poly;
pub mod semantics;
pub mod transforms;

pub use circuit::{Circuit, CircuitBuilder, GateId, GateKind, QuantifiedCircuit, Quantifier, Universe};
pub use error::{Error, Result};
pub use poly::{Degree, Monomial, Polynomial, Var, VarSet};
pub use semantics::ExpansionGuards;
