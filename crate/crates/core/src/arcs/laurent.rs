use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{int, parse, render, Rational};

/// A Laurent polynomial in `t` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Laurent {
    terms: BTreeMap<i64, Rational>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn one() -> Self {
        Laurent::monomial(Rational::one(), 0)
    }

    pub fn monomial(c: Rational, pow: i64) -> Self {
        let mut l = Laurent::zero();
        l.add_term(pow, c);
        l
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Rational)>) -> Self {
        let mut l = Laurent::zero();
        for (e, c) in terms {
            l.add_term(e, c);
        }
        l
    }

    fn add_term(&mut self, pow: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(pow).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&pow);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, pow: i64) -> Rational {
        self.terms.get(&pow).cloned().unwrap_or_else(Rational::zero)
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn shift(&self, e: i64) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(p, c)| (p + e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Laurent::from_terms(self.terms.iter().map(|(p, c)| (*p, c * s)))
    }

    pub fn add(&self, o: &Laurent) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Laurent) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, -c);
        }
        r
    }

    pub fn mul(&self, o: &Laurent) -> Self {
        let mut r = Laurent::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                r.add_term(a + b, x * y);
            }
        }
        r
    }

    /// `self / o` when the quotient is a Laurent polynomial.
    pub fn div_exact(&self, o: &Laurent) -> Option<Laurent> {
        let (vo, dego) = (o.valuation()?, o.degree()?);
        let Some(qmin) = self.valuation().map(|v| v - vo) else {
            return Some(Laurent::zero());
        };
        let lead = o.coeff(dego);
        let mut rem = self.clone();
        let mut q = Laurent::zero();
        while let Some(d) = rem.degree() {
            let e = d - dego;
            if e < qmin {
                return None;
            }
            let t = Laurent::monomial(rem.coeff(d) / &lead, e);
            rem = rem.sub(&t.mul(o));
            q = q.add(&t);
        }
        Some(q)
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match e {
                0 => render(c),
                _ => format!("{}*t^{}", render(c), e),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct Term {
    pow: i64,
    coef: String,
}

impl Serialize for Laurent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(e, c)| Term {
                pow: *e,
                coef: render(c),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Laurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        let mut l = Laurent::zero();
        for t in terms {
            if !seen.insert(t.pow) {
                return Err(D::Error::custom(format!("power {} listed twice", t.pow)));
            }
            l.add_term(t.pow, parse(&t.coef).map_err(D::Error::custom)?);
        }
        Ok(l)
    }
}

/// A square matrix of Laurent polynomials with nonzero determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentMatrix {
    entries: Vec<Vec<Laurent>>,
}

impl LaurentMatrix {
    pub fn new(entries: Vec<Vec<Laurent>>) -> Result<Self> {
        let m = Self::unchecked(entries)?;
        if m.det().is_zero() {
            return Err(Error::SingularFamily);
        }
        Ok(m)
    }

    /// Square-shape check only; the determinant may vanish.
    pub fn unchecked(entries: Vec<Vec<Laurent>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Invalid("matrix must be nonempty".into()));
        }
        if let Some(r) = entries.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Ok(LaurentMatrix { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![0; n])
    }

    /// `diag(t^{e_0}, ..., t^{e_{n-1}})`.
    pub fn diagonal(exps: &[i64]) -> Self {
        let n = exps.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Laurent::monomial(Rational::one(), exps[i])
                        } else {
                            Laurent::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        LaurentMatrix { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Laurent>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i][j]
    }

    pub fn mul(&self, o: &LaurentMatrix) -> LaurentMatrix {
        let n = self.size();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Laurent::zero(), |acc, k| {
                            acc.add(&self.entries[i][k].mul(&o.entries[k][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        LaurentMatrix { entries }
    }

    pub fn shift(&self, e: i64) -> LaurentMatrix {
        LaurentMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|x| x.shift(e)).collect())
                .collect(),
        }
    }

    /// Lowest power appearing in any entry.
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().flatten().filter_map(Laurent::valuation).min()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.entries.iter().flatten().filter_map(Laurent::degree).max()
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> Laurent {
        det_of(self.entries.clone())
    }

    /// Determinant of the submatrix on the given rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Laurent {
        det_of(
            rows.iter()
                .map(|&r| cols.iter().map(|&c| self.entries[r][c].clone()).collect())
                .collect(),
        )
    }

    /// Constant-coefficient matrix, valid when all entries are polynomials.
    pub fn at_zero(&self) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.coeff(0)).collect())
            .collect()
    }
}

fn det_of(mut a: Vec<Vec<Laurent>>) -> Laurent {
    let n = a.len();
    let mut sign = false;
    let mut prev = Laurent::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return Laurent::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = Laurent::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.scale(&-Rational::one())
    } else {
        d
    }
}

#[derive(Deserialize)]
struct MatrixJson {
    size: usize,
    entries: serde_json::Value,
}

impl Serialize for LaurentMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            size: usize,
            entries: Vec<&'a Laurent>,
        }
        Out {
            size: self.size(),
            entries: self.entries.iter().flatten().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let n = raw.size;
        let shaped = |rows: &Vec<Vec<Laurent>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        let rows = match serde_json::from_value::<Vec<Vec<Laurent>>>(raw.entries.clone()) {
            Ok(rows) if shaped(&rows) => rows,
            _ => {
                let flat: Vec<Laurent> = serde_json::from_value(raw.entries).map_err(D::Error::custom)?;
                if flat.len() != n * n {
                    return Err(D::Error::custom(format!(
                        "expected {} entries for size {n}, got {}",
                        n * n,
                        flat.len()
                    )));
                }
                flat.chunks(n.max(1)).map(|c| c.to_vec()).collect()
            }
        };
        LaurentMatrix::new(rows).map_err(D::Error::custom)
    }
}

fn random_laurent(rng: &mut impl Rng, lo: i64, hi: i64, density: f64) -> Laurent {
    let mut terms = Vec::new();
    for e in lo..=hi {
        if rng.gen_bool(density) {
            terms.push((e, int(rng.gen_range(-3..=3))));
        }
    }
    Laurent::from_terms(terms)
}

/// A random nonsingular family with entries supported on powers `lo..=hi`.
pub fn random_family(rng: &mut impl Rng, n: usize, lo: i64, hi: i64) -> LaurentMatrix {
    loop {
        let entries = (0..n)
            .map(|_| (0..n).map(|_| random_laurent(rng, lo, hi, 0.5)).collect())
            .collect();
        if let Ok(m) = LaurentMatrix::new(entries) {
            return m;
        }
    }
}

/// A random polynomial matrix whose value at `t = 0` is invertible.
pub fn random_unit(rng: &mut impl Rng, n: usize, deg: i64) -> LaurentMatrix {
    loop {
        let entries: Vec<Vec<Laurent>> = (0..n)
            .map(|_| (0..n).map(|_| random_laurent(rng, 0, deg, 0.6)).collect())
            .collect();
        let m = LaurentMatrix { entries };
        if m.det().valuation() == Some(0) {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn t(e: i64) -> Laurent {
        Laurent::monomial(Rational::one(), e)
    }

    #[test]
    fn arithmetic() {
        let a = t(-1).add(&Laurent::monomial(int(2), 1));
        let b = a.mul(&a);
        assert_eq!(b, Laurent::from_terms([(-2, int(1)), (0, int(4)), (2, int(4))]));
        assert_eq!(b.div_exact(&a), Some(a.clone()));
        assert_eq!(t(0).add(&t(1)).div_exact(&t(0).sub(&t(1))), None);
        assert_eq!(a.valuation(), Some(-1));
    }

    #[test]
    fn determinants() {
        let g = LaurentMatrix::new(vec![vec![t(0), t(1)], vec![t(1), t(1)]]).unwrap();
        assert_eq!(g.det(), t(1).sub(&t(2)));
        assert_eq!(LaurentMatrix::diagonal(&[2, 3]).det(), t(5));
        let z = LaurentMatrix::unchecked(vec![vec![t(0), t(1)], vec![t(0), t(1)]]).unwrap();
        assert!(z.det().is_zero());
        assert!(matches!(
            LaurentMatrix::new(vec![vec![t(0), t(1)], vec![t(0), t(1)]]),
            Err(Error::SingularFamily)
        ));
    }

    #[test]
    fn det_matches_permutation_expansion() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let g = random_family(&mut rng, n, -1, 2);
            let mut total = Laurent::zero();
            for perm in itertools::Itertools::permutations(0..n, n) {
                let inv = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| perm[i] > perm[j])
                    .count();
                let mut p = if inv % 2 == 0 {
                    Laurent::one()
                } else {
                    Laurent::monomial(-Rational::one(), 0)
                };
                for (i, &j) in perm.iter().enumerate() {
                    p = p.mul(g.get(i, j));
                }
                total = total.add(&p);
            }
            assert_eq!(g.det(), total);
        }
    }

    #[test]
    fn json_layouts() {
        let flat = r#"{"size":2,"entries":[[{"pow":0,"coef":"1"}],[{"pow":1,"coef":"1"}],[{"pow":1,"coef":"1"}],[{"pow":1,"coef":"1/2"}]]}"#;
        let g: LaurentMatrix = serde_json::from_str(flat).unwrap();
        assert_eq!(g.get(1, 1), &Laurent::monomial(frac(1, 2), 1));
        let back: LaurentMatrix = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let rows = r#"{"size":1,"entries":[[[{"pow":2,"coef":"3"}]]]}"#;
        let h: LaurentMatrix = serde_json::from_str(rows).unwrap();
        assert_eq!(h.get(0, 0), &Laurent::monomial(int(3), 2));
        let bad = r#"{"size":1,"entries":[[{"pow":0,"coef":"1/0"}]]}"#;
        assert!(serde_json::from_str::<LaurentMatrix>(bad).is_err());
    }
}
