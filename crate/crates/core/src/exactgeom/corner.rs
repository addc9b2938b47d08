use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::linalg::{det, inverse};
use super::polytope::QPolytope;
use crate::error::{Error, Result};
use crate::rational::{big, dot_int, primitive, render, sub, QVec, Rational};

/// The simplex `{v + sum a_i e_i : a_i >= 0, sum a_i <= eps}` at a polytope corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub base: QVec,
    pub edges: Vec<Vec<BigInt>>,
    pub eps: Rational,
}

impl Simplex {
    /// Coordinates `a` with `x = base + sum a_i edges_i`.
    pub fn corner_coords(&self, x: &[Rational]) -> QVec {
        let m: Vec<QVec> = (0..self.base.len())
            .map(|r| self.edges.iter().map(|e| big(&e[r])).collect())
            .collect();
        let inv = inverse(&m).expect("unimodular edges");
        let d = sub(x, &self.base);
        inv.iter()
            .map(|row| row.iter().zip(&d).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Sum of corner coordinates, the toric vanishing order at the corner.
    pub fn height(&self, x: &[Rational]) -> Rational {
        self.corner_coords(x).into_iter().sum()
    }

    pub fn vertices(&self) -> Vec<QVec> {
        let mut out = vec![self.base.clone()];
        for e in &self.edges {
            out.push(self.base.iter().zip(e).map(|(b, x)| b + &self.eps * big(x)).collect());
        }
        out
    }

    pub fn to_polytope(&self) -> Result<QPolytope> {
        QPolytope::from_vertices(&self.vertices())
    }

    /// The closed complement `{x in p : height(x) >= eps}`.
    pub fn complement_in(&self, p: &QPolytope) -> Option<QPolytope> {
        // height(x) = <row sums of inverse edge matrix, x - base>
        let n = self.base.len();
        let m: Vec<QVec> = (0..n)
            .map(|r| self.edges.iter().map(|e| big(&e[r])).collect())
            .collect();
        let inv = inverse(&m).expect("unimodular edges");
        let a: QVec = (0..n).map(|c| inv.iter().map(|row| row[c].clone()).sum()).collect();
        let b = &self.eps + a.iter().zip(&self.base).map(|(x, y)| x * y).sum::<Rational>();
        p.clip(&a, &b)
    }
}

fn smooth_edges(p: &QPolytope, v: usize) -> Result<Vec<Vec<BigInt>>> {
    let base = &p.vertices()[v];
    let name = || format!("[{}]", base.iter().map(render).collect::<Vec<_>>().join(", "));
    let nb = p.neighbours(v);
    if nb.len() != p.dim() {
        return Err(Error::NonSmoothCorner {
            vertex: name(),
            reason: format!("{} incident edges in dimension {}", nb.len(), p.dim()),
        });
    }
    let edges: Vec<Vec<BigInt>> = nb.iter().map(|&u| primitive(&sub(&p.vertices()[u], base))).collect();
    let m: Vec<QVec> = edges.iter().map(|e| e.iter().map(big).collect()).collect();
    let d = det(&m);
    if d.abs() != Rational::one() {
        return Err(Error::NonSmoothCorner {
            vertex: name(),
            reason: format!("edge determinant {}", render(&d)),
        });
    }
    Ok(edges)
}

/// Corner simplex of scale `eps` at vertex index `v`; containment is not checked.
pub fn corner_simplex(p: &QPolytope, v: usize, eps: &Rational) -> Result<Simplex> {
    Ok(Simplex {
        base: p.vertices()[v].clone(),
        edges: smooth_edges(p, v)?,
        eps: eps.clone(),
    })
}

/// Largest `eps` for which the corner simplex at `v` lies in `p`.
pub fn max_corner_eps(p: &QPolytope, v: usize) -> Result<Rational> {
    let edges = smooth_edges(p, v)?;
    let base = &p.vertices()[v];
    let mut best: Option<Rational> = None;
    for f in p.facets() {
        let s = f.slack(base);
        for e in &edges {
            let step = dot_int(&f.normal, &e.iter().map(big).collect::<Vec<_>>());
            if step.is_negative() {
                let lim = &s / -step;
                if best.as_ref().is_none_or(|b| lim < *b) {
                    best = Some(lim);
                }
            }
        }
    }
    Ok(best.unwrap_or_else(Rational::zero))
}
