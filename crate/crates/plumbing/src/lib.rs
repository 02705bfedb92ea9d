//! Exact combinatorics of plumbing graphs for surface singularity links.
//!
//! Graphs carry integer framings and arrowheads. Every decision (definiteness,
//! integrality, embeddability) is made over exact integers or rationals; the
//! linear algebra is generic over [`ExactField`], which floats do not implement.

pub mod birational;
pub mod canonical;
pub mod embedding;
mod error;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod milnor;
pub mod nlf;
pub mod rationality;
pub mod report;
mod scalar;

pub use error::{Error, Result};
pub use graph::{Arrow, PlumbingGraph, Vertex, VertexId};
pub use lattice::{DefinitenessClass, DefinitenessReport, Divisor, IntersectionMatrix};
pub use scalar::ExactField;

/// Arbitrary precision integer used for determinants and kernels.
pub type Integer = num_bigint::BigInt;
/// Exact rational scalar used by default in every decision path.
pub type Rational = num_rational::BigRational;
/// Fixed width rational for hot loops where entries are known to stay small.
pub type SmallRational = num_rational::Rational64;
