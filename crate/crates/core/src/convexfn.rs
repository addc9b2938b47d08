//! Piecewise-linear convex functions on polytopes, the rounded envelopes
//! `f_k`, and sublevel bodies.

use std::sync::OnceLock;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactgeom::{lattice_points, lower_facets, AffineForm, QPolytope};
use crate::rational::{big, ceil_int, int, render, sub, QVec, Rational};

/// A region of the domain on which one affine piece attains the maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub polytope: QPolytope,
    pub piece: usize,
}

/// `x -> max_i pieces[i](x)` on a polytope.
#[derive(Debug, Clone)]
pub struct ConvexPL {
    domain: QPolytope,
    pieces: Vec<AffineForm>,
    cells: OnceLock<Vec<Cell>>,
}

impl PartialEq for ConvexPL {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.pieces == other.pieces
    }
}

impl ConvexPL {
    pub fn new(domain: QPolytope, pieces: Vec<AffineForm>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Invalid("convex function needs at least one piece".into()));
        }
        if let Some(p) = pieces.iter().find(|p| p.dim() != domain.dim()) {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: p.dim(),
            });
        }
        Ok(ConvexPL {
            domain,
            pieces,
            cells: OnceLock::new(),
        })
    }

    fn with_cells(domain: QPolytope, pieces: Vec<AffineForm>, cells: Vec<Cell>) -> Self {
        ConvexPL {
            domain,
            pieces,
            cells: OnceLock::from(cells),
        }
    }

    pub fn constant(domain: QPolytope, c: Rational) -> Self {
        let n = domain.dim();
        ConvexPL::new(domain, vec![AffineForm::constant(n, c)]).expect("one piece")
    }

    pub fn domain(&self) -> &QPolytope {
        &self.domain
    }

    pub fn pieces(&self) -> &[AffineForm] {
        &self.pieces
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        self.pieces.iter().map(|p| p.eval(x)).max().expect("nonempty pieces")
    }

    /// Full-dimensional regions where each piece is maximal; they tile the domain.
    pub fn cells(&self) -> &[Cell] {
        self.cells.get_or_init(|| self.compute_cells())
    }

    fn compute_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        'piece: for (i, p) in self.pieces.iter().enumerate() {
            let mut cell = self.domain.clone();
            for (j, q) in self.pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                let a = sub(&p.linear, &q.linear);
                if a.iter().all(|x| x.is_zero()) {
                    // parallel pieces: the larger constant wins, ties go to the first
                    if p.constant < q.constant || (p.constant == q.constant && j < i) {
                        continue 'piece;
                    }
                    continue;
                }
                match cell.clip(&a, &(&q.constant - &p.constant)) {
                    Some(c) => cell = c,
                    None => continue 'piece,
                }
            }
            out.push(Cell {
                polytope: cell,
                piece: i,
            });
        }
        out
    }

    pub fn min(&self) -> Rational {
        self.cells()
            .iter()
            .flat_map(|c| c.polytope.vertices().iter().map(|v| self.pieces[c.piece].eval(v)))
            .min()
            .expect("nonempty domain")
    }

    /// Maximum over the domain, attained at a vertex.
    pub fn max(&self) -> Rational {
        self.domain
            .vertices()
            .iter()
            .map(|v| self.value(v))
            .max()
            .expect("nonempty domain")
    }

    pub fn add_constant(&self, c: &Rational) -> ConvexPL {
        let pieces = self
            .pieces
            .iter()
            .map(|p| AffineForm::new(p.linear.clone(), &p.constant + c))
            .collect();
        match self.cells.get() {
            Some(cells) => ConvexPL::with_cells(self.domain.clone(), pieces, cells.clone()),
            None => ConvexPL::new(self.domain.clone(), pieces).expect("same shape"),
        }
    }

    pub fn scale(&self, s: &Rational) -> ConvexPL {
        assert!(*s > Rational::zero(), "scaling must preserve convexity");
        let pieces = self
            .pieces
            .iter()
            .map(|p| AffineForm::new(p.linear.iter().map(|x| x * s).collect(), &p.constant * s))
            .collect();
        ConvexPL::new(self.domain.clone(), pieces).expect("same shape")
    }

    /// The same pieces on `region ∩ domain`, or `None` if that is not full-dimensional.
    pub fn restrict(&self, region: &QPolytope) -> Option<ConvexPL> {
        let mut dom = self.domain.clone();
        for f in region.facets() {
            let a: QVec = f.normal.iter().map(big).collect();
            dom = dom.clip(&a, &f.offset)?;
        }
        Some(ConvexPL::new(dom, self.pieces.clone()).expect("same shape"))
    }
}

/// Values of a function on `Δ ∩ (1/k)Z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledConvex {
    pub k: u32,
    pub points: Vec<QVec>,
    pub values: Vec<Rational>,
}

/// `α -> ⌈k f(α)⌉ / k` on `Δ ∩ (1/k)Z^n`.
pub fn round_up_sample(f: &ConvexPL, k: u32) -> Result<SampledConvex> {
    let m = f.min();
    if m <= Rational::zero() {
        return Err(Error::NonPositive { min: render(&m) });
    }
    Ok(round_up_unchecked(f, k))
}

pub(crate) fn round_up_unchecked(f: &ConvexPL, k: u32) -> SampledConvex {
    let kk = int(k as i64);
    let points = lattice_points(f.domain(), k);
    let values = points
        .iter()
        .map(|a| big(&ceil_int(&(f.value(a) * &kk))) / &kk)
        .collect();
    SampledConvex { k, points, values }
}

/// Largest convex function below the given values on the hull of the points.
pub fn lower_hull(points: &[QVec], values: &[Rational]) -> Result<ConvexPL> {
    let facets = lower_facets(points, values)?;
    let domain = QPolytope::from_vertices(points)?;
    let mut pieces = Vec::with_capacity(facets.len());
    let mut cells = Vec::with_capacity(facets.len());
    for (i, (linear, constant, on)) in facets.into_iter().enumerate() {
        let pts: Vec<QVec> = on.iter().map(|&j| points[j].clone()).collect();
        cells.push(Cell {
            polytope: QPolytope::from_vertices(&pts)?,
            piece: i,
        });
        pieces.push(AffineForm::new(linear, constant));
    }
    Ok(ConvexPL::with_cells(domain, pieces, cells))
}

/// The envelope `f_k` of the rounded samples of `f`.
pub fn envelope_fk(f: &ConvexPL, k: u32) -> Result<ConvexPL> {
    let s = round_up_sample(f, k)?;
    lower_hull(&s.points, &s.values)
}

/// `{x in P : G(x) <= t}`, or `None` when it has empty interior.
pub fn sublevel_body(g: &ConvexPL, t: &Rational) -> Option<QPolytope> {
    let mut body = g.domain().clone();
    for p in g.pieces() {
        // p(x) <= t  <=>  <-linear, x> >= constant - t
        let a: QVec = p.linear.iter().map(|x| -x).collect();
        body = body.clip(&a, &(&p.constant - t))?;
    }
    Some(body)
}

/// Builds the convex PL function interpolating `h` on `Δ ∩ (1/k)Z^n`,
/// rejecting samples that are not in convex position.
pub fn from_samples<F>(domain: &QPolytope, k: u32, h: F) -> Result<ConvexPL>
where
    F: Fn(&[Rational]) -> Rational,
{
    let points = lattice_points(domain, k);
    let values: Vec<Rational> = points.iter().map(|p| h(p)).collect();
    let env = lower_hull(&points, &values)?;
    for (p, v) in points.iter().zip(&values) {
        if env.value(p) != *v {
            let coords: Vec<String> = p.iter().map(render).collect();
            return Err(Error::NotConvex(format!(
                "sample at ({}) lies above the lower hull",
                coords.join(", ")
            )));
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, qvec};

    fn segment() -> QPolytope {
        QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap()
    }

    fn hinge_plus_one() -> ConvexPL {
        ConvexPL::new(
            segment(),
            vec![AffineForm::new(qvec(&[0]), int(1)), AffineForm::new(qvec(&[2]), int(0))],
        )
        .unwrap()
    }

    #[test]
    fn rounding_samples() {
        let s = round_up_sample(&hinge_plus_one(), 2).unwrap();
        assert_eq!(s.values, vec![int(1), int(1), int(2)]);
        let g = ConvexPL::new(segment(), vec![AffineForm::new(qvec(&[1]), int(1))]).unwrap();
        let s = round_up_sample(&g, 3).unwrap();
        assert_eq!(s.values, vec![int(1), frac(4, 3), frac(5, 3), int(2)]);
        let z = ConvexPL::new(segment(), vec![AffineForm::new(qvec(&[1]), int(0))]).unwrap();
        assert!(matches!(round_up_sample(&z, 2), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn envelope_of_hinge() {
        let e = envelope_fk(&hinge_plus_one(), 2).unwrap();
        assert_eq!(e.value(&[frac(1, 4)]), int(1));
        assert_eq!(e.value(&[frac(3, 4)]), frac(3, 2));
        assert_eq!(e.pieces().len(), 2);
    }

    #[test]
    fn lower_hull_filt1_shape() {
        let k = 5;
        let pts: Vec<QVec> = (0..=k).map(|i| vec![frac(i, k)]).collect();
        let mut vals = vec![int(1)];
        vals.extend((1..=k).map(|_| frac(1, k)));
        let g = lower_hull(&pts, &vals).unwrap();
        for i in 0..=20 {
            let x = frac(i, 20);
            let expected = std::cmp::max(frac(1, k), int(1) - int(k - 1) * &x);
            assert_eq!(g.value(&[x]), expected);
        }
    }

    #[test]
    fn sublevel_of_hinge() {
        let g = ConvexPL::new(
            segment(),
            vec![
                AffineForm::new(qvec(&[0]), int(0)),
                AffineForm::new(qvec(&[2]), int(-1)),
            ],
        )
        .unwrap();
        let q = sublevel_body(&g, &frac(1, 2)).unwrap();
        assert_eq!(q.vertices(), &[qvec(&[0]), vec![frac(3, 4)]]);
        assert_eq!(sublevel_body(&g, &int(1)).unwrap(), segment());
        assert!(sublevel_body(&g, &frac(-1, 2)).is_none());
    }

    #[test]
    fn sampling_adapter_checks_convexity() {
        let sq = |x: &[Rational]| &x[0] * &x[0] + int(1);
        assert!(from_samples(&segment(), 4, sq).is_ok());
        let concave = |x: &[Rational]| -(&x[0] * &x[0]);
        assert!(matches!(from_samples(&segment(), 4, concave), Err(Error::NotConvex(_))));
    }

    #[test]
    fn cells_tile_domain() {
        let sq = QPolytope::cube(&qvec(&[0, 0]), &qvec(&[1, 1])).unwrap();
        let f = ConvexPL::new(
            sq,
            vec![
                AffineForm::new(qvec(&[1, 0]), int(0)),
                AffineForm::new(qvec(&[0, 1]), int(0)),
            ],
        )
        .unwrap();
        assert_eq!(f.cells().len(), 2);
        assert_eq!(f.min(), int(0));
        assert_eq!(f.max(), int(1));
    }
}
