use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use super::factor::{birkhoff_factor, ArcFactorization};
use super::flag::{induced_flag, ArcFlag};
use super::laurent::{Laurent, LaurentMatrix};
use crate::error::{Error, Result};
use crate::exactgeom::linalg::rref;
use crate::exactgeom::{integer_points, volume, PointIndex, QPolytope};
use crate::filtration::Filtration;
use crate::invariants::{filtration_chow, fit_poly};
use crate::rational::{int, QReport, Rational};

/// Matrices `g_k(t)` acting on `R_k`, whose basis is indexed by the lattice points
/// of `kP` in lexicographic order.
#[derive(Debug, Clone)]
pub struct ArcFamily {
    polytope: QPolytope,
    degrees: BTreeMap<u32, LaurentMatrix>,
    label: String,
}

/// Per-degree data extracted from an arc: exponents, flag and lattice-point levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcDegree {
    pub k: u32,
    pub lambda: Vec<i64>,
    /// `Tr(A_k) = Σ λ_j`.
    pub trace: i64,
    /// Power of `t` removed at this degree so that `F_0 R_k ≠ 0`.
    pub shift: i64,
    pub flag: ArcFlag,
    /// Level of each lattice point: the first flag step whose leading terms contain it.
    pub levels: Vec<i64>,
    pub residual_order: Option<usize>,
}

impl ArcFamily {
    pub fn new(polytope: QPolytope, degrees: Vec<(u32, LaurentMatrix)>, label: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, g) in degrees {
            let d = integer_points(&polytope, k).len();
            if g.size() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: g.size(),
                });
            }
            if map.insert(k, g).is_some() {
                return Err(Error::Invalid(format!("degree {k} given twice")));
            }
        }
        Ok(ArcFamily {
            polytope,
            degrees: map,
            label: label.to_string(),
        })
    }

    pub fn polytope(&self) -> &QPolytope {
        &self.polytope
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.degrees.keys().copied().collect()
    }

    pub fn matrix(&self, k: u32) -> Result<&LaurentMatrix> {
        self.degrees.get(&k).ok_or(Error::MissingDegree(k))
    }

    pub fn factor(&self, k: u32) -> Result<ArcFactorization> {
        birkhoff_factor(self.matrix(k)?, None)
    }

    pub fn degree(&self, k: u32) -> Result<ArcDegree> {
        let fac = self.factor(k)?;
        let flag = induced_flag(&fac)?;
        Ok(ArcDegree {
            k,
            trace: fac.trace(),
            lambda: fac.lambda.clone(),
            shift: flag.shift,
            levels: valuation_levels(&flag),
            flag,
            residual_order: fac.residual_order,
        })
    }

    /// The filtration whose degree-`k` table is read off the induced flags.
    pub fn filtration(&self, ks: &[u32]) -> Result<Filtration> {
        let tables = ks
            .iter()
            .map(|&k| Ok((k, self.degree(k)?.levels)))
            .collect::<Result<Vec<_>>>()?;
        Filtration::from_arc(self.polytope.clone(), tables, &self.label)
    }
}

/// Leading terms are taken at the lexicographically smallest lattice point, so the
/// pivot columns of a reduced echelon basis of `F_i` are its set of valuations.
pub fn valuation_levels(flag: &ArcFlag) -> Vec<i64> {
    let mut levels = vec![i64::MAX; flag.size];
    for (i, basis) in flag.steps.iter().enumerate() {
        for p in rref(basis.clone(), flag.size).1 {
            levels[p] = levels[p].min(i as i64);
        }
    }
    levels
}

/// `g_k = Sym^k g_1` on the standard simplex, where `g_1` acts on the linear forms
/// `x_0, ..., x_n` and the monomial `x_0^{k-|β|} x^β` corresponds to `β ∈ kΔ`.
#[derive(Debug, Clone)]
pub struct SymPowerSource {
    pub g1: LaurentMatrix,
}

impl SymPowerSource {
    pub fn new(g1: LaurentMatrix) -> Result<Self> {
        if g1.size() < 2 {
            return Err(Error::Invalid("need at least two linear forms".into()));
        }
        Ok(SymPowerSource { g1 })
    }

    pub fn dim(&self) -> usize {
        self.g1.size() - 1
    }

    pub fn polytope(&self) -> QPolytope {
        QPolytope::standard_simplex(self.dim(), &Rational::one()).expect("standard simplex")
    }

    pub fn matrix(&self, k: u32) -> Result<LaurentMatrix> {
        let n = self.dim();
        let pts = integer_points(&self.polytope(), k);
        let index = PointIndex::new(&pts);
        let mut entries = vec![vec![Laurent::zero(); pts.len()]; pts.len()];
        for (col, gamma) in pts.iter().enumerate() {
            let full: Vec<i64> = std::iter::once(k as i64 - gamma.iter().sum::<i64>())
                .chain(gamma.iter().copied())
                .collect();
            let mut poly: HashMap<Vec<i64>, Laurent> = HashMap::from([(vec![0; n], Laurent::one())]);
            for (j, &e) in full.iter().enumerate() {
                for _ in 0..e {
                    let mut next: HashMap<Vec<i64>, Laurent> = HashMap::new();
                    for (beta, c) in &poly {
                        for i in 0..=n {
                            let a = self.g1.get(i, j);
                            if a.is_zero() {
                                continue;
                            }
                            let mut b = beta.clone();
                            if i > 0 {
                                b[i - 1] += 1;
                            }
                            let slot = next.entry(b).or_default();
                            *slot = slot.add(&c.mul(a));
                        }
                    }
                    poly = next;
                }
            }
            for (beta, c) in poly {
                let row = index.get(&beta).expect("monomial of degree k");
                entries[row][col] = c;
            }
        }
        LaurentMatrix::new(entries)
    }

    pub fn family(&self, ks: &[u32]) -> Result<ArcFamily> {
        let degrees = ks
            .iter()
            .map(|&k| Ok((k, self.matrix(k)?)))
            .collect::<Result<Vec<_>>>()?;
        ArcFamily::new(self.polytope(), degrees, "symmetric-power")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcChowRow {
    pub k: u32,
    pub trace: i64,
    pub shift: i64,
    pub d: i128,
    pub w: i128,
    /// `k b0 / a0 - w_k / d_k` with `b0` fitted from the arc weights.
    pub chow_tilde: QReport,
    /// `Chow_k(χ)` from the convex transform of the degree-`k` levels.
    pub chow: QReport,
    pub difference: QReport,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcChowReport {
    pub a0: QReport,
    pub b0: QReport,
    /// Whether the weight series is exactly polynomial on every sampled degree.
    pub b0_exact: bool,
    pub rows: Vec<ArcChowRow>,
}

/// Arc Chow weights against the Chow weights of the induced filtration.
pub fn arc_chow(family: &ArcFamily, ks: &[u32], a0: Option<&Rational>) -> Result<ArcChowReport> {
    let n = family.polytope().dim();
    if ks.len() < n + 2 {
        return Err(Error::InsufficientDegrees {
            needed: n + 2,
            got: ks.len(),
        });
    }
    let chi = family.filtration(ks)?;
    let vol = volume(family.polytope());
    let a0 = a0.cloned().unwrap_or_else(|| vol.clone());
    let mut degrees = Vec::new();
    for &k in ks {
        degrees.push((family.degree(k)?, chi.table(k)?));
    }
    let xs: Vec<Rational> = ks.iter().map(|&k| int(k as i64)).collect();
    let ys: Vec<Rational> = degrees
        .iter()
        .map(|(_, t)| Rational::from_integer(t.weight().into()))
        .collect();
    let (coeffs, residuals) = fit_poly(&xs, &ys, n + 1)?;
    let b0 = coeffs[n + 1].clone();
    let mut rows = Vec::new();
    for (deg, t) in &degrees {
        let k = deg.k;
        let w = t.weight();
        let d = t.dim() as i128;
        let tilde = int(k as i64) * &b0 / &a0 - Rational::new(w.into(), d.into());
        let chow = filtration_chow(&vol, t)?;
        let diff = &tilde - &chow;
        rows.push(ArcChowRow {
            k,
            trace: deg.trace,
            shift: deg.shift,
            d,
            w,
            holds: diff >= Rational::zero(),
            chow_tilde: tilde.into(),
            chow: chow.into(),
            difference: diff.into(),
        });
    }
    Ok(ArcChowReport {
        a0: a0.into(),
        b0: b0.into(),
        b0_exact: residuals.iter().all(Zero::is_zero),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::pl_from_ints;

    #[test]
    fn diagonal_sym_power_is_toric() {
        // x^β has weight -β_1 - 2β_2, so the levels are β_1 + 2β_2 before the
        // positivity shift, matching f(x) = x_1 + 2x_2 + 1
        let src = SymPowerSource::new(LaurentMatrix::diagonal(&[0, -1, -2])).unwrap();
        let ks = [1, 2, 3, 4];
        let fam = src.family(&ks).unwrap();
        let chi = fam.filtration(&ks).unwrap();
        let p = src.polytope();
        let f = pl_from_ints(&p, &[(&[1, 2], 1)]).unwrap();
        let toric = Filtration::toric(f).unwrap();
        for k in ks {
            assert_eq!(chi.table(k).unwrap().levels(), toric.table(k).unwrap().levels());
        }
        let d = fam.degree(2).unwrap();
        assert_eq!(d.shift, 0);
        assert_eq!(d.trace, -12);
    }

    #[test]
    fn toric_arc_chow_equality() {
        let src = SymPowerSource::new(LaurentMatrix::diagonal(&[0, 1])).unwrap();
        let ks: Vec<u32> = (1..=5).collect();
        let rep = arc_chow(&src.family(&ks).unwrap(), &ks, None).unwrap();
        assert!(rep.b0_exact);
        for r in &rep.rows {
            assert!(r.difference.exact.is_zero());
        }
    }

    #[test]
    fn sym_power_entries() {
        let g1 = LaurentMatrix::new(vec![
            vec![Laurent::one(), Laurent::monomial(Rational::one(), 1)],
            vec![Laurent::zero(), Laurent::one()],
        ])
        .unwrap();
        let g2 = SymPowerSource::new(g1).unwrap().matrix(2).unwrap();
        // x_0 -> x_0, x_1 -> t x_0 + x_1, so x_1^2 -> t^2 x_0^2 + 2t x_0 x_1 + x_1^2
        assert_eq!(g2.get(0, 2), &Laurent::monomial(Rational::one(), 2));
        assert_eq!(g2.get(1, 2), &Laurent::monomial(int(2), 1));
        assert_eq!(g2.get(2, 2), &Laurent::one());
    }

    #[test]
    fn seeded_sym_powers_are_multiplicative() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let ks: Vec<u32> = (1..=4).collect();
        for _ in 0..3 {
            let g1 = crate::arcs::random_family(&mut rng, 2, -1, 1);
            let fam = SymPowerSource::new(g1).unwrap().family(&ks).unwrap();
            let rep = arc_chow(&fam, &ks, None).unwrap();
            for r in &rep.rows {
                assert!(r.holds, "{r:?}");
            }
        }
    }
}
