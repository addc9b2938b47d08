use num_traits::Zero;
use serde::Serialize;

use super::factor::{det_pole_order, ArcFactorization};
use super::laurent::LaurentMatrix;
use crate::error::{Error, Result};
use crate::exactgeom::linalg::{inverse, nullspace, rref};
use crate::rational::{serde_q, QVec, Rational};

/// An increasing flag `F_0 ⊂ F_1 ⊂ ... ⊂ F_top = Q^m`, each step stored as a
/// reduced row echelon basis. `shift` is the power of `t` removed so that `F_0 ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcFlag {
    pub size: usize,
    pub shift: i64,
    pub dims: Vec<usize>,
    #[serde(serialize_with = "ser_steps")]
    pub steps: Vec<Vec<QVec>>,
}

fn ser_steps<S: serde::Serializer>(steps: &[Vec<QVec>], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(with = "serde_q::vecvec")] &'a [QVec]);
    serde::Serialize::serialize(&steps.iter().map(|b| Wrap(b)).collect::<Vec<_>>(), s)
}

impl ArcFlag {
    fn from_steps(size: usize, shift: i64, steps: Vec<Vec<QVec>>) -> Self {
        ArcFlag {
            size,
            shift,
            dims: steps.iter().map(Vec::len).collect(),
            steps,
        }
    }

    /// Smallest level `i` with `x ∈ F_i`, or `None` for the zero vector.
    pub fn level_of(&self, x: &[Rational]) -> Option<usize> {
        if x.iter().all(Zero::is_zero) {
            return None;
        }
        self.steps.iter().position(|basis| {
            let mut rows = basis.clone();
            rows.push(x.to_vec());
            rref(rows, self.size).1.len() == basis.len()
        })
    }
}

fn echelon(vectors: Vec<QVec>, size: usize) -> Vec<QVec> {
    rref(vectors, size).0
}

/// Vectors adapted to the flag: the columns of `R(0)^{-1}`, with level `max λ - λ_j`.
pub fn adapted_basis(f: &ArcFactorization) -> Result<Vec<(i64, QVec)>> {
    let inv = inverse(&f.r_at_zero()).ok_or_else(|| Error::Invalid("R(0) is singular".into()))?;
    let top = *f.lambda.iter().max().expect("nonempty");
    Ok((0..f.size)
        .map(|j| (top - f.lambda[j], inv.iter().map(|row| row[j].clone()).collect()))
        .collect())
}

/// `x ∈ F_i` iff `t^A` acts on `R(0)x` with weights at least `-i`, after
/// multiplying `g` by `t^{-max λ}`.
pub fn induced_flag(f: &ArcFactorization) -> Result<ArcFlag> {
    let basis = adapted_basis(f)?;
    let top = *f.lambda.iter().max().expect("nonempty");
    let span = top - *f.lambda.iter().min().expect("nonempty");
    let steps = (0..=span)
        .map(|l| {
            let vs = basis
                .iter()
                .filter(|(lv, _)| *lv <= l)
                .map(|(_, v)| v.clone())
                .collect();
            echelon(vs, f.size)
        })
        .collect();
    Ok(ArcFlag::from_steps(f.size, top, steps))
}

/// `F_i` at raw level `i`: the `u` for which some polynomial `v` makes
/// `t^i g (u + t v)` holomorphic.
fn direct_step(g: &LaurentMatrix, i: i64, order: usize) -> Result<Vec<QVec>> {
    let m = g.size();
    let p = g.min_valuation().ok_or(Error::SingularFamily)?;
    // only v_j with j + 1 < -(i + p) can reach a negative power
    let terms = (-(i + p) - 1).max(0) as usize;
    if terms > order {
        return Err(Error::TruncationTooSmall {
            order,
            reason: format!("level {i} needs {terms} correction terms"),
        });
    }
    let cols = m * (1 + terms);
    let mut rows: Vec<QVec> = Vec::new();
    for e in (i + p)..0 {
        for r in 0..m {
            let mut row = vec![Rational::zero(); cols];
            for c in 0..m {
                row[c] = g.get(r, c).coeff(e - i);
                for j in 0..terms {
                    row[m * (1 + j) + c] = g.get(r, c).coeff(e - i - j as i64 - 1);
                }
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    let sols = nullspace(&rows, cols);
    Ok(echelon(sols.into_iter().map(|v| v[..m].to_vec()).collect(), m))
}

/// The flag computed straight from the definition by truncated linear algebra,
/// independent of any factorization.
pub fn arc_flag_direct(g: &LaurentMatrix, order: usize) -> Result<ArcFlag> {
    det_pole_order(g)?;
    let m = g.size();
    let p = g.min_valuation().ok_or(Error::SingularFamily)?;
    // F_i is everything once every weight is at least -i, i.e. for i >= -λ_0 = -p
    let mut raw = vec![direct_step(g, -p, order)?];
    let mut i = -p;
    loop {
        let next = direct_step(g, i - 1, order)?;
        if next.is_empty() {
            break;
        }
        raw.push(next);
        i -= 1;
    }
    raw.reverse();
    if raw.last().map(Vec::len) != Some(m) {
        return Err(Error::Invalid("flag does not exhaust the space".into()));
    }
    Ok(ArcFlag::from_steps(m, -i, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::factor::birkhoff_factor;
    use crate::arcs::laurent::{random_family, Laurent};
    use crate::rational::{int, qvec};
    use num_traits::One;
    use rand::SeedableRng;

    fn t(e: i64) -> Laurent {
        Laurent::monomial(Rational::one(), e)
    }

    #[test]
    fn diagonal_flag() {
        let g = LaurentMatrix::diagonal(&[0, 1]);
        let f = induced_flag(&birkhoff_factor(&g, Some(4)).unwrap()).unwrap();
        assert_eq!(f.dims, vec![1, 2]);
        assert_eq!(f.steps[0], vec![qvec(&[0, 1])]);
        assert_eq!(arc_flag_direct(&g, 4).unwrap(), f);
    }

    #[test]
    fn invertible_at_zero() {
        let g = LaurentMatrix::new(vec![vec![t(0), t(1)], vec![t(2), t(0)]]).unwrap();
        let f = arc_flag_direct(&g, 4).unwrap();
        assert_eq!(f.dims, vec![2]);
        assert_eq!(f.shift, 0);
    }

    #[test]
    fn mixed_example() {
        let g = LaurentMatrix::new(vec![vec![t(0), t(1)], vec![t(1), t(1)]]).unwrap();
        let fac = birkhoff_factor(&g, Some(6)).unwrap();
        let f = induced_flag(&fac).unwrap();
        assert_eq!(f.dims, vec![1, 2]);
        assert_eq!(f.steps[0], vec![qvec(&[0, 1])]);
        assert_eq!(f.level_of(&qvec(&[1, 0])), Some(1));
        assert_eq!(f.level_of(&[int(0), int(3)]), Some(0));
        assert_eq!(arc_flag_direct(&g, 6).unwrap(), f);
    }

    #[test]
    fn seeded_oracle_equivalence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 3..=4 {
            for _ in 0..5 {
                let g = random_family(&mut rng, n, -1, 2);
                let fac = birkhoff_factor(&g, None).unwrap();
                let order = (fac.lambda[n - 1] - fac.lambda[0] + 2) as usize;
                assert_eq!(induced_flag(&fac).unwrap(), arc_flag_direct(&g, order).unwrap());
            }
        }
    }

    #[test]
    fn short_truncation_is_reported() {
        let g = LaurentMatrix::diagonal(&[0, 4]);
        assert!(matches!(arc_flag_direct(&g, 1), Err(Error::TruncationTooSmall { .. })));
    }
}
