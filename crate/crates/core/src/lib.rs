//! Exact K-stability invariants of toric filtrations.
//!
//! Everything is computed over the rationals: polytopes and lattice points,
//! convex transforms, min-plus extensions of level tables, expansion
//! coefficients and the invariants built from them, lattice-sum bounds on
//! simplices, and local factorizations of matrix families.

pub mod arcs;
pub mod convexfn;
pub mod corpus;
pub mod error;
pub mod exactgeom;
pub mod filtration;
pub mod invariants;
pub mod io;
pub mod rational;
pub mod riemann;

pub use error::{Error, Result};
pub use rational::{QVec, Rational};
