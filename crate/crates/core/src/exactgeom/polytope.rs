use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::hull::{convex_hull, drop_coord, HullFacet};
use super::linalg::{affine_dim, rank, solve};
use crate::error::{Error, Result};
use crate::rational::{big, dot, dot_int, primitive, sub, QVec, Rational};

/// Inequality `<normal, x> >= offset` with a primitive integer normal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: Rational,
    /// Indices into the polytope's vertex list.
    pub vertices: Vec<usize>,
}

impl Facet {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot_int(&self.normal, x) - &self.offset
    }
}

/// A full-dimensional rational polytope held in both V- and H-representation.
#[derive(Debug, Clone, PartialEq)]
pub struct QPolytope {
    dim: usize,
    vertices: Vec<QVec>,
    facets: Vec<Facet>,
}

impl QPolytope {
    /// Convex hull of `points`; non-vertices are discarded.
    pub fn from_vertices(points: &[QVec]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        let pts: Vec<QVec> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let hull = convex_hull(&pts)?;
        Ok(Self::from_hull(dim, &pts, hull))
    }

    fn from_hull(dim: usize, pts: &[QVec], hull: Vec<HullFacet>) -> Self {
        // a point is a vertex iff the normals of the facets through it span R^d
        let mut incident: Vec<Vec<QVec>> = vec![Vec::new(); pts.len()];
        for f in &hull {
            let n: QVec = f.normal.iter().map(big).collect();
            for &i in &f.points {
                incident[i].push(n.clone());
            }
        }
        let mut new_index = vec![None; pts.len()];
        let mut vertices = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            if rank(&incident[i]) == dim {
                new_index[i] = Some(vertices.len());
                vertices.push(p.clone());
            }
        }
        let mut facets: Vec<Facet> = hull
            .into_iter()
            .map(|f| {
                let mut vs: Vec<usize> = f.points.iter().filter_map(|&i| new_index[i]).collect();
                vs.sort_unstable();
                Facet {
                    normal: f.normal,
                    offset: f.offset,
                    vertices: vs,
                }
            })
            .collect();
        facets.sort();
        QPolytope { dim, vertices, facets }
    }

    /// Polytope `{x : <a_i, x> >= b_i}`; fails unless the set is bounded and full-dimensional.
    pub fn from_inequalities(ineqs: &[(QVec, Rational)]) -> Result<Self> {
        let dim = ineqs.first().map(|(a, _)| a.len()).ok_or(Error::Unbounded)?;
        if let Some((a, _)) = ineqs.iter().find(|(a, _)| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.len(),
            });
        }
        if ineqs.iter().any(|(a, _)| a.iter().all(|x| x.is_zero())) {
            return Err(Error::Invalid("inequality with zero normal".into()));
        }
        let feasible = |x: &QVec| ineqs.iter().all(|(a, b)| dot(a, x) >= *b);
        let mut pts = BTreeSet::new();
        for combo in (0..ineqs.len()).combinations(dim) {
            let a: Vec<QVec> = combo.iter().map(|&i| ineqs[i].0.clone()).collect();
            let b: QVec = combo.iter().map(|&i| ineqs[i].1.clone()).collect();
            if let Some(x) = solve(&a, &b) {
                if feasible(&x) {
                    pts.insert(x);
                }
            }
        }
        let pts: Vec<QVec> = pts.into_iter().collect();
        let refs: Vec<&QVec> = pts.iter().collect();
        match affine_dim(&refs) {
            None => return Err(Error::Unbounded),
            Some(d) if d < dim => {
                return Err(Error::Degenerate(format!(
                    "inequalities cut out a set of dimension {d} in R^{dim}"
                )))
            }
            _ => {}
        }
        let p = Self::from_hull(dim, &pts, convex_hull(&pts)?);
        // bounded iff every facet of the vertex hull is one of the given inequalities
        let given: BTreeSet<(Vec<BigInt>, Rational)> = ineqs
            .iter()
            .map(|(a, b)| {
                let n = primitive(a);
                let i = a.iter().position(|x| !x.is_zero()).expect("nonzero normal");
                let factor = big(&n[i]) / &a[i];
                (n, b * factor)
            })
            .collect();
        if p.facets
            .iter()
            .any(|f| !given.contains(&(f.normal.clone(), f.offset.clone())))
        {
            return Err(Error::Unbounded);
        }
        Ok(p)
    }

    /// The box `prod [lo_i, hi_i]`.
    pub fn cube(lo: &[Rational], hi: &[Rational]) -> Result<Self> {
        let n = lo.len();
        let pts: Vec<QVec> = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            hi[i].clone()
                        } else {
                            lo[i].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_vertices(&pts)
    }

    /// `{x >= 0, sum x <= c}`.
    pub fn standard_simplex(n: usize, c: &Rational) -> Result<Self> {
        let mut pts = vec![vec![Rational::zero(); n]];
        for i in 0..n {
            let mut p = vec![Rational::zero(); n];
            p[i] = c.clone();
            pts.push(p);
        }
        Self::from_vertices(&pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| !f.slack(x).is_negative())
    }

    /// Pairs of vertices spanning an edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let nv = self.vertices.len();
        let mut on: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (fi, f) in self.facets.iter().enumerate() {
            for &v in &f.vertices {
                on[v].push(fi);
            }
        }
        let mut out = Vec::new();
        for i in 0..nv {
            for j in (i + 1)..nv {
                let common: Vec<QVec> = on[i]
                    .iter()
                    .filter(|f| on[j].contains(f))
                    .map(|&f| self.facets[f].normal.iter().map(big).collect())
                    .collect();
                if rank(&common) + 1 == self.dim {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Indices of vertices adjacent to `v` along an edge.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges()
            .into_iter()
            .filter_map(|(a, b)| match (a == v, b == v) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    /// Intersection with `{x : <a, x> >= b}`, or `None` if it is not full-dimensional.
    pub fn clip(&self, a: &[Rational], b: &Rational) -> Option<QPolytope> {
        let vals: Vec<Rational> = self.vertices.iter().map(|v| dot(a, v) - b).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            return Some(self.clone());
        }
        if vals.iter().all(|v| !v.is_positive()) {
            return None;
        }
        let mut pts: Vec<QVec> = self
            .vertices
            .iter()
            .zip(&vals)
            .filter(|(_, v)| !v.is_negative())
            .map(|(p, _)| p.clone())
            .collect();
        for (i, j) in self.edges() {
            let (vi, vj) = (&vals[i], &vals[j]);
            if (vi.is_positive() && vj.is_negative()) || (vi.is_negative() && vj.is_positive()) {
                let s = vi / (vi - vj);
                let p: QVec = self.vertices[i]
                    .iter()
                    .zip(&self.vertices[j])
                    .map(|(x, y)| x + &s * (y - x))
                    .collect();
                pts.push(p);
            }
        }
        let refs: Vec<&QVec> = pts.iter().collect();
        if affine_dim(&refs) != Some(self.dim) {
            return None;
        }
        QPolytope::from_vertices(&pts).ok()
    }

    /// Deterministic pulling triangulation; each simplex is a list of `dim + 1` vertex indices.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        let ids: Vec<usize> = (0..self.vertices.len()).collect();
        pull(&ids, &self.vertices)
    }

    /// Image under `x -> s x + t`.
    pub fn affine_image(&self, s: &Rational, t: &[Rational]) -> Result<QPolytope> {
        let pts: Vec<QVec> = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(t).map(|(x, y)| x * s + y).collect())
            .collect();
        QPolytope::from_vertices(&pts)
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &QPolytope) -> Result<QPolytope> {
        let pts: Vec<QVec> = self
            .vertices
            .iter()
            .flat_map(|a| {
                other.vertices.iter().map(move |b| {
                    let mut p = a.clone();
                    p.extend(b.iter().cloned());
                    p
                })
            })
            .collect();
        QPolytope::from_vertices(&pts)
    }

    /// Whether every vertex is integral after scaling by `k`.
    pub fn is_lattice_at(&self, k: u32) -> bool {
        let kk = Rational::from_integer(BigInt::from(k));
        self.vertices.iter().all(|v| v.iter().all(|x| (x * &kk).is_integer()))
    }

    /// Smallest `k` with `k * self` a lattice polytope.
    pub fn denominator(&self) -> BigInt {
        crate::rational::lcm_denominators(self.vertices.iter().flatten())
    }
}

/// Pulling triangulation of the polytope with the given vertices (all of which are vertices).
fn pull(ids: &[usize], coords: &[QVec]) -> Vec<Vec<usize>> {
    let d = coords[0].len();
    if ids.len() == d + 1 {
        return vec![ids.to_vec()];
    }
    if d == 1 {
        return vec![ids.to_vec()];
    }
    let apex = 0;
    let hull = convex_hull(coords).expect("vertices of a full-dimensional face");
    let mut out = Vec::new();
    for f in hull {
        if f.points.contains(&apex) {
            continue;
        }
        let j = f.normal.iter().position(|x| !x.is_zero()).expect("nonzero normal");
        let mut local = f.points.clone();
        local.sort_unstable();
        let sub_ids: Vec<usize> = local.iter().map(|&i| ids[i]).collect();
        let sub_coords: Vec<QVec> = local.iter().map(|&i| drop_coord(&coords[i], j)).collect();
        for mut s in pull(&sub_ids, &sub_coords) {
            s.insert(0, ids[apex]);
            out.push(s);
        }
    }
    out
}

/// Euclidean volume of the simplex with the given vertices.
pub fn simplex_volume(vs: &[&QVec]) -> Rational {
    let d = vs.len() - 1;
    let m: Vec<QVec> = vs[1..].iter().map(|v| sub(v, vs[0])).collect();
    let fact: BigInt = (1..=d).map(BigInt::from).product();
    super::linalg::det(&m).abs() / big(&fact)
}
