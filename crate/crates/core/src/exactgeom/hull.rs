//! Exact convex hulls by gift wrapping.
//!
//! Facets are found by rotating a supporting hyperplane about each ridge of a
//! known facet. Ridges come from a recursive hull of the facet's own points,
//! projected to one dimension lower, so coplanar point sets need no special
//! treatment: a facet always carries every input point lying on it.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::linalg::{affine_dim, nullspace, rank};
use crate::error::{Error, Result};
use crate::rational::{big, dot, primitive, QVec, Rational};

/// The affine function `x -> <w, x> + c`.
#[derive(Debug, Clone, PartialEq)]
struct Aff {
    w: QVec,
    c: Rational,
}

impl Aff {
    fn eval(&self, p: &[Rational]) -> Rational {
        dot(&self.w, p) + &self.c
    }

    fn as_vec(&self) -> QVec {
        let mut v = self.w.clone();
        v.push(self.c.clone());
        v
    }

    /// Positive rescaling making `w` a primitive integer vector.
    fn normalized(&self) -> (Vec<BigInt>, Rational) {
        let mut all = self.w.clone();
        all.push(self.c.clone());
        let wint = primitive(&self.w);
        let (i, wi) = self
            .w
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_zero())
            .expect("facet normal is nonzero");
        let factor = big(&wint[i]) / wi;
        (wint, &self.c * factor)
    }

    fn from_normalized(w: &[BigInt], c: &Rational) -> Self {
        Aff {
            w: w.iter().map(big).collect(),
            c: c.clone(),
        }
    }
}

/// A facet `{x : <normal, x> >= offset}` with the indices of the input points on it.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFacet {
    pub normal: Vec<BigInt>,
    pub offset: Rational,
    pub points: Vec<usize>,
}

/// Facets of the convex hull of distinct, affinely spanning points.
pub fn convex_hull(points: &[QVec]) -> Result<Vec<HullFacet>> {
    let Some(first) = points.first() else {
        return Err(Error::Degenerate("no points".into()));
    };
    let d = first.len();
    let refs: Vec<&QVec> = points.iter().collect();
    if d == 0 || affine_dim(&refs) != Some(d) {
        return Err(Error::Degenerate(format!(
            "{} points do not span dimension {d}",
            points.len()
        )));
    }
    Ok(hull_rec(points)
        .into_iter()
        .map(|(a, pts)| {
            let (w, c) = a.normalized();
            HullFacet {
                normal: w,
                offset: -c,
                points: pts,
            }
        })
        .collect())
}

fn hull_rec(points: &[QVec]) -> Vec<(Aff, Vec<usize>)> {
    let d = points[0].len();
    if d == 1 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        return vec![
            (
                Aff {
                    w: vec![Rational::one()],
                    c: -points[lo][0].clone(),
                },
                vec![lo],
            ),
            (
                Aff {
                    w: vec![-Rational::one()],
                    c: points[hi][0].clone(),
                },
                vec![hi],
            ),
        ];
    }

    let initial = initial_facet(points);
    let mut seen: HashSet<(Vec<BigInt>, Rational)> = HashSet::new();
    seen.insert(initial.normalized());
    let mut facets: Vec<(Aff, Vec<usize>)> = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back(initial);

    while let Some(h) = queue.pop_front() {
        let values: Vec<Rational> = points.iter().map(|p| h.eval(p)).collect();
        let on: Vec<usize> = (0..points.len()).filter(|&i| values[i].is_zero()).collect();
        let j = h.w.iter().position(|x| !x.is_zero()).expect("nonzero normal");
        let projected: Vec<QVec> = on.iter().map(|&i| drop_coord(&points[i], j)).collect();
        for (ridge, _) in hull_rec(&projected) {
            let mut w = ridge.w.clone();
            w.insert(j, Rational::zero());
            let hp = Aff { w, c: ridge.c };
            let g = rotate(points, &h, &values, &hp);
            let key = g.normalized();
            if seen.insert(key.clone()) {
                queue.push_back(Aff::from_normalized(&key.0, &key.1));
            }
        }
        facets.push((h, on));
    }
    facets
}

/// Rotates `h` about the zero set of `hp` until it hits another point.
fn rotate(points: &[QVec], h: &Aff, hvals: &[Rational], hp: &Aff) -> Aff {
    let mut best: Option<Rational> = None;
    for (p, hv) in points.iter().zip(hvals) {
        if hv.is_positive() {
            let r = -hp.eval(p) / hv;
            if best.as_ref().is_none_or(|b| r > *b) {
                best = Some(r);
            }
        }
    }
    let s = best.expect("full-dimensional point set has points off every facet");
    Aff {
        w: hp.w.iter().zip(&h.w).map(|(a, b)| a + &s * b).collect(),
        c: &hp.c + &s * &h.c,
    }
}

fn initial_facet(points: &[QVec]) -> Aff {
    let d = points[0].len();
    let min0 = points.iter().map(|p| p[0].clone()).min().expect("nonempty");
    let mut w = vec![Rational::zero(); d];
    w[0] = Rational::one();
    let mut h = Aff { w, c: -min0 };
    loop {
        let values: Vec<Rational> = points.iter().map(|p| h.eval(p)).collect();
        let on: Vec<&QVec> = points
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_zero())
            .map(|(p, _)| p)
            .collect();
        if affine_dim(&on) == Some(d - 1) {
            return h;
        }
        let rows: Vec<QVec> = on
            .iter()
            .map(|p| {
                let mut r = (*p).clone();
                r.push(Rational::one());
                r
            })
            .collect();
        let hv = h.as_vec();
        let hp = nullspace(&rows, d + 1)
            .into_iter()
            .find(|v| rank(&[v.clone(), hv.clone()]) == 2)
            .expect("supporting set of dimension < d-1 leaves a free direction");
        let hp = Aff {
            w: hp[..d].to_vec(),
            c: hp[d].clone(),
        };
        h = rotate(points, &h, &values, &hp);
    }
}

pub(crate) fn drop_coord(p: &[Rational], j: usize) -> QVec {
    p.iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, x)| x.clone())
        .collect()
}

/// Lower facets of the lifted point set `(x_i, v_i)`: each is an affine
/// function of `x` together with the indices of the points on its graph.
pub fn lower_facets(xs: &[QVec], vals: &[Rational]) -> Result<Vec<(QVec, Rational, Vec<usize>)>> {
    let n = xs.first().map(|x| x.len()).unwrap_or(0);
    let refs: Vec<&QVec> = xs.iter().collect();
    if n == 0 || affine_dim(&refs) != Some(n) {
        return Err(Error::DegenerateSpan);
    }
    let top = vals.iter().max().expect("nonempty").clone() + Rational::one();
    let mut lifted: Vec<QVec> = xs
        .iter()
        .zip(vals)
        .map(|(x, v)| {
            let mut p = x.clone();
            p.push(v.clone());
            p
        })
        .collect();
    lifted.extend(xs.iter().map(|x| {
        let mut p = x.clone();
        p.push(top.clone());
        p
    }));
    let count = xs.len();
    let mut out = Vec::new();
    for (a, pts) in hull_rec(&lifted) {
        let wy = a.w[n].clone();
        if !wy.is_positive() {
            continue;
        }
        let linear: QVec = a.w[..n].iter().map(|x| -x / &wy).collect();
        let constant = -&a.c / &wy;
        let on: Vec<usize> = pts.into_iter().filter(|&i| i < count).collect();
        out.push((linear, constant, on));
    }
    Ok(out)
}
