//! Stable Grothendieck polynomials, their duals, and the probability models
//! built on them: the branching graph of partitions with weights (1−p)^r,
//! its coherent systems, the five-vertex model and TASEP with geometric jumps.
//!
//! Exact computations use [`Rational`]; probes and quadrature use [`Real`].

#![allow(non_snake_case)]

pub mod asymptotics;
pub mod branching;
pub mod contour;
pub mod error;
pub mod fivevertex;
pub mod graph;
pub mod grothendieck;
pub mod partitions;
pub mod scalar;
pub mod symfunc;
pub mod tasep;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use scalar::{LogPos, Rational, Scalar, Semiring};

pub type Real = f64;
pub type Complex = num_complex::Complex64;
