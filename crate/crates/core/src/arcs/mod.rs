//! Meromorphic matrix families `g(t)`: local factorizations `L t^A R`,
//! determinantal exponents, induced flags and arc Chow weights.

mod factor;
mod flag;
mod laurent;
mod source;

pub use factor::{birkhoff_factor, default_order, det_pole_order, invariant_exponents, ArcFactorization};
pub use flag::{adapted_basis, arc_flag_direct, induced_flag, ArcFlag};
pub use laurent::{random_family, random_unit, Laurent, LaurentMatrix};
pub use source::{arc_chow, valuation_levels, ArcChowReport, ArcChowRow, ArcDegree, ArcFamily, SymPowerSource};
