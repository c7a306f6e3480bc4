//! Certified computation of dimension-theoretic quantities for homogeneous
//! self-similar measures with algebraic parameters.
//!
//! The crate is organized in layers:
//!
//! * [`dyadic`] / [`ball`]: exact dyadic floats and certified ball
//!   arithmetic. Everything above runs on these.
//! * [`intpoly`] / [`roots`]: integer polynomials, squarefree decomposition,
//!   and certified complex root isolation.
//! * [`field`] / [`algebra`]: number field elements, Mahler measure, lifts of
//!   field polynomials to integer polynomials, and the certified zero test.
//! * [`ifs`]: iterated function system atoms, overlap detection,
//!   meet-in-the-middle separation minima, and small-root counting.
//! * [`entropy`]: exact atom entropies, scale entropies, smoothed (Gaussian)
//!   entropies, matrix lifts, and the dimension bracket.
//! * [`report`]: serialization shared with the command line tool.

pub mod algebra;
pub mod ball;
pub mod dyadic;
pub mod entropy;
pub mod error;
pub mod field;
pub mod ifs;
pub mod intpoly;
pub mod report;
pub mod roots;

pub use error::{Error, Result};
