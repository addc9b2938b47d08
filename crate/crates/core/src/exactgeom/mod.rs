//! Exact rational geometry: linear algebra, polytopes, lattice points,
//! volumes, boundary measures and convex hulls.

mod corner;
pub mod hull;
mod lattice;
pub mod linalg;
mod measure;
mod polytope;

use serde::{Deserialize, Serialize};

pub use corner::{corner_simplex, max_corner_eps, Simplex};
pub use hull::{convex_hull, lower_facets, HullFacet};
pub use lattice::{integer_points, lattice_points, PointIndex};
pub use measure::{
    boundary_integral, integrate_affine_simplex, integrate_pl, integrate_pl_sq, integrate_sq_affine_simplex, volume,
};
pub use polytope::{simplex_volume, Facet, QPolytope};

use crate::rational::{dot, serde_q, QVec, Rational};

/// The affine function `x -> <linear, x> + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineForm {
    #[serde(with = "serde_q::vec")]
    pub linear: QVec,
    #[serde(with = "serde_q")]
    pub constant: Rational,
}

impl AffineForm {
    pub fn new(linear: QVec, constant: Rational) -> Self {
        AffineForm { linear, constant }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        AffineForm {
            linear: vec![Rational::default(); n],
            constant: c,
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.linear, x) + &self.constant
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }
}
