//! Filtrations of the coordinate ring in the toric setting: level tables,
//! their min-plus extensions, convex transforms and the product construction.

mod minplus;
mod table;
mod transform;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

pub use minplus::{convolve, minplus_extend, TestConfig};
pub use table::{multiplicativity_violation, LevelTable};
pub use transform::{convex_transform, g_func, normal_cone_example, product_filtration, ConvexTransform};

use crate::convexfn::ConvexPL;
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, AffineForm, QPolytope};
use crate::rational::{ceil_int, floor_int, int, lcm_denominators, Rational};

/// Where the levels of a filtration come from.
#[derive(Debug, Clone)]
pub enum Source {
    /// `i_k(α) = ⌈k f(α/k)⌉`.
    Toric(ConvexPL),
    /// Tables stored up to a maximal degree.
    Explicit,
    /// Tables induced by a matrix family, materialized at the degrees it provides.
    Arc { label: String },
}

/// A multiplicative filtration on the lattice points of the dilates of `Δ`.
#[derive(Debug)]
pub struct Filtration {
    polytope: QPolytope,
    source: Source,
    shift: i64,
    period: u32,
    stored: BTreeMap<u32, Arc<LevelTable>>,
    cache: Mutex<BTreeMap<u32, Arc<LevelTable>>>,
}

impl Clone for Filtration {
    fn clone(&self) -> Self {
        Filtration {
            polytope: self.polytope.clone(),
            source: self.source.clone(),
            shift: self.shift,
            period: self.period,
            stored: self.stored.clone(),
            cache: Mutex::new(self.cache.lock().expect("cache poisoned").clone()),
        }
    }
}

fn period_of(f: &ConvexPL) -> u32 {
    let mut l = lcm_denominators(f.domain().vertices().iter().flatten());
    for c in f.cells() {
        l = l.lcm(&lcm_denominators(c.polytope.vertices().iter().flatten()));
    }
    for p in f.pieces() {
        l = l.lcm(&lcm_denominators(p.linear.iter().chain(std::iter::once(&p.constant))));
    }
    l.to_u32().expect("period fits in u32")
}

impl Filtration {
    /// Toric filtration `F_i R_k = span{s_α : k f(α/k) <= i}`. If `min f <= 0`
    /// the levels are raised by `k·s` for the smallest integer `s` making them positive.
    pub fn toric(f: ConvexPL) -> Result<Self> {
        let m = f.min();
        let shift = if m.is_positive() {
            0
        } else {
            (floor_int(&-m) + BigInt::one())
                .to_i64()
                .ok_or_else(|| Error::Invalid("shift out of range".into()))?
        };
        let period = period_of(&f);
        Ok(Filtration {
            polytope: f.domain().clone(),
            source: Source::Toric(f),
            shift,
            period,
            stored: BTreeMap::new(),
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    /// Filtration given by tables of raw levels, one per degree, each listing
    /// every lattice point of `kΔ` in lexicographic order. Nonpositive data is
    /// shifted by `k·s` at degree `k` for the smallest integer `s` making all levels positive.
    pub fn explicit(polytope: QPolytope, tables: Vec<(u32, Vec<i64>)>, period: Option<u32>) -> Result<Self> {
        Self::from_raw(polytope, tables, period, Source::Explicit)
    }

    /// Explicit filtration with levels `level(k, α)` for `1 <= k <= kmax`.
    pub fn explicit_fn(
        polytope: QPolytope,
        kmax: u32,
        level: impl Fn(u32, &[i64]) -> i64,
        period: Option<u32>,
    ) -> Result<Self> {
        let tables = (1..=kmax)
            .map(|k| (k, integer_points(&polytope, k).iter().map(|a| level(k, a)).collect()))
            .collect();
        Self::explicit(polytope, tables, period)
    }

    /// Filtration materialized from an arc source.
    pub fn from_arc(polytope: QPolytope, tables: Vec<(u32, Vec<i64>)>, label: &str) -> Result<Self> {
        Self::from_raw(
            polytope,
            tables,
            None,
            Source::Arc {
                label: label.to_string(),
            },
        )
    }

    fn from_raw(
        polytope: QPolytope,
        tables: Vec<(u32, Vec<i64>)>,
        period: Option<u32>,
        source: Source,
    ) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::InvalidTable("no tables given".into()));
        }
        let mut shift = 0i64;
        for (k, levels) in &tables {
            if *k == 0 {
                return Err(Error::InvalidTable("degree must be positive".into()));
            }
            if let Some(&m) = levels.iter().min() {
                // smallest s with m + s·k >= 1
                let need = Integer::div_ceil(&(1 - m), &(*k as i64));
                shift = shift.max(need);
            }
        }
        let mut stored = BTreeMap::new();
        for (k, levels) in tables {
            let points = integer_points(&polytope, k);
            if points.len() != levels.len() {
                return Err(Error::InvalidTable(format!(
                    "degree {k} needs {} levels, got {}",
                    points.len(),
                    levels.len()
                )));
            }
            let shifted = levels.iter().map(|l| l + shift * k as i64).collect();
            if stored
                .insert(k, Arc::new(LevelTable::new(k, points, shifted)?))
                .is_some()
            {
                return Err(Error::InvalidTable(format!("degree {k} given twice")));
            }
        }
        let f = Filtration {
            polytope,
            source,
            shift,
            period: period.unwrap_or(1).max(1),
            stored,
            cache: Mutex::new(BTreeMap::new()),
        };
        f.check_multiplicativity(u32::MAX)?;
        Ok(f)
    }

    pub fn polytope(&self) -> &QPolytope {
        &self.polytope
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn is_toric(&self) -> bool {
        matches!(self.source, Source::Toric(_))
    }

    /// Integer `s` added (times `k`) to every degree-`k` level to make levels positive.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Common period of the level sums as quasi-polynomials in `k`.
    pub fn period(&self) -> u32 {
        self.period
    }

    /// Largest stored degree; `None` for toric filtrations, which exist in every degree.
    pub fn max_degree(&self) -> Option<u32> {
        match self.source {
            Source::Toric(_) => None,
            _ => self.stored.keys().next_back().copied(),
        }
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.stored.keys().copied().collect()
    }

    /// The unshifted convex function of a toric filtration.
    pub fn base_function(&self) -> Option<&ConvexPL> {
        match &self.source {
            Source::Toric(f) => Some(f),
            _ => None,
        }
    }

    /// The convex transform `G` in the units of the stored levels (toric only).
    pub fn transform(&self) -> Option<ConvexPL> {
        self.base_function().map(|f| f.add_constant(&int(self.shift)))
    }

    pub fn table(&self, k: u32) -> Result<Arc<LevelTable>> {
        match &self.source {
            Source::Toric(f) => {
                let mut cache = self.cache.lock().expect("cache poisoned");
                if let Some(t) = cache.get(&k) {
                    return Ok(t.clone());
                }
                let kk = int(k as i64);
                let shift = self.shift * k as i64;
                let t = Arc::new(LevelTable::from_fn(&self.polytope, k, |a| {
                    let x: Vec<Rational> = a.iter().map(|&c| Rational::new(c.into(), k.into())).collect();
                    ceil_int(&(f.value(&x) * &kk)).to_i64().expect("level fits in i64") + shift
                })?);
                cache.insert(k, t.clone());
                Ok(t)
            }
            Source::Explicit => self.stored.get(&k).cloned().ok_or(Error::MissingDegree(k)),
            Source::Arc { label } => self
                .stored
                .get(&k)
                .cloned()
                .ok_or_else(|| Error::UnsupportedVariant(format!("arc source {label} does not provide degree {k}"))),
        }
    }

    /// Bound `N` with `i_1 <= N`.
    pub fn bound(&self) -> Result<i64> {
        Ok(self.table(1)?.max_level())
    }

    /// The test configuration `χ^(k)` generated in degree `k`.
    pub fn testconfig(&self, k: u32) -> Result<TestConfig> {
        Ok(TestConfig::new(self.polytope.clone(), self.table(k)?))
    }

    /// Checks `i_{k+l}(α+β) <= i_k(α) + i_l(β)` for available degrees with `k + l <= max_total`.
    pub fn check_multiplicativity(&self, max_total: u32) -> Result<()> {
        let top = match self.max_degree() {
            Some(d) => d.min(max_total),
            None => max_total,
        };
        for a in 1..top {
            for b in a..=(top - a) {
                let (Ok(ta), Ok(tb), Ok(ts)) = (self.table(a), self.table(b), self.table(a + b)) else {
                    continue;
                };
                if let Some((p, q)) = multiplicativity_violation(&ta, &tb, &ts) {
                    return Err(Error::NotMultiplicative(format!(
                        "i_{}({:?}) > i_{a}({p:?}) + i_{b}({q:?})",
                        a + b,
                        p.iter().zip(&q).map(|(x, y)| x + y).collect::<Vec<_>>()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Every degree-`k` level raised by `c·k`.
    pub fn shifted(&self, c: i64) -> Result<Filtration> {
        match &self.source {
            Source::Toric(f) => Filtration::toric(f.add_constant(&int(c + self.shift))),
            _ => self.map_tables(|k, l| l + c * k as i64),
        }
    }

    fn map_tables(&self, h: impl Fn(u32, i64) -> i64) -> Result<Filtration> {
        let tables = self
            .stored
            .iter()
            .map(|(&k, t)| (k, t.levels().iter().map(|&l| h(k, l)).collect()))
            .collect();
        Self::from_raw(self.polytope.clone(), tables, Some(self.period), self.source.clone())
    }
}

/// Max of affine forms with integer `(linear, constant)` data.
pub fn pl_from_ints(domain: &QPolytope, pieces: &[(&[i64], i64)]) -> Result<ConvexPL> {
    ConvexPL::new(
        domain.clone(),
        pieces
            .iter()
            .map(|(l, c)| AffineForm::new(l.iter().map(|&x| int(x)).collect(), int(*c)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    fn segment() -> QPolytope {
        QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap()
    }

    #[test]
    fn toric_levels() {
        let f = pl_from_ints(&segment(), &[(&[1], 1)]).unwrap();
        let chi = Filtration::toric(f).unwrap();
        assert_eq!(chi.table(2).unwrap().levels(), &[2, 3, 4]);
        let g = pl_from_ints(&segment(), &[(&[0], 1), (&[2], 0)]).unwrap();
        let chi = Filtration::toric(g).unwrap();
        assert_eq!(chi.table(4).unwrap().levels(), &[4, 4, 4, 6, 8]);
        assert_eq!(chi.shift(), 0);
    }

    #[test]
    fn toric_shift_and_period() {
        let f = pl_from_ints(&segment(), &[(&[0], 0), (&[2], -1)]).unwrap();
        let chi = Filtration::toric(f).unwrap();
        assert_eq!(chi.shift(), 1);
        assert_eq!(chi.period(), 2);
        assert_eq!(chi.table(4).unwrap().levels(), &[4, 4, 4, 6, 8]);
        chi.check_multiplicativity(10).unwrap();
    }

    #[test]
    fn explicit_tables_are_shifted_and_checked() {
        let chi = Filtration::explicit(segment(), vec![(1, vec![0, 1]), (2, vec![0, 1, 2])], None).unwrap();
        assert_eq!(chi.shift(), 1);
        assert_eq!(chi.table(2).unwrap().levels(), &[2, 3, 4]);
        assert_eq!(chi.table(3).unwrap_err(), Error::MissingDegree(3));
        let bad = Filtration::explicit(segment(), vec![(1, vec![1, 1]), (2, vec![1, 5, 1])], None);
        assert!(matches!(bad, Err(Error::NotMultiplicative(_))));
        let short = Filtration::explicit(segment(), vec![(1, vec![1])], None);
        assert!(matches!(short, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn constant_function_levels() {
        let f = pl_from_ints(&segment(), &[(&[0], 1)]).unwrap();
        let chi = Filtration::toric(f).unwrap();
        for k in 1..6 {
            assert!(chi.table(k).unwrap().levels().iter().all(|&l| l == k as i64));
        }
    }
}
