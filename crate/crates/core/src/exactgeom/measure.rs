use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::hull::drop_coord;
use super::polytope::{simplex_volume, QPolytope};
use super::AffineForm;
use crate::convexfn::ConvexPL;
use crate::rational::{big, int, QVec, Rational};

pub fn volume(p: &QPolytope) -> Rational {
    p.triangulate()
        .iter()
        .map(|s| simplex_volume(&s.iter().map(|&i| &p.vertices()[i]).collect::<Vec<_>>()))
        .sum()
}

/// `∫_S a` over a simplex: volume times the value at the centroid.
pub fn integrate_affine_simplex(vs: &[&QVec], a: &AffineForm) -> Rational {
    let vol = simplex_volume(vs);
    let sum: Rational = vs.iter().map(|v| a.eval(v)).sum();
    vol * sum / int(vs.len() as i64)
}

/// `∫_S a^2` over a simplex with `n + 1` vertices.
pub fn integrate_sq_affine_simplex(vs: &[&QVec], a: &AffineForm) -> Rational {
    let vol = simplex_volume(vs);
    let vals: Vec<Rational> = vs.iter().map(|v| a.eval(v)).collect();
    let sq: Rational = vals.iter().map(|x| x * x).sum();
    let s: Rational = vals.iter().sum();
    let m = vs.len() as i64;
    vol * (sq + &s * &s) / int(m * (m + 1))
}

fn integrate_with(f: &ConvexPL, rule: fn(&[&QVec], &AffineForm) -> Rational) -> Rational {
    let mut total = Rational::zero();
    for cell in f.cells() {
        let p = &cell.polytope;
        let a = &f.pieces()[cell.piece];
        for s in p.triangulate() {
            let vs: Vec<&QVec> = s.iter().map(|&i| &p.vertices()[i]).collect();
            total += rule(&vs, a);
        }
    }
    total
}

/// `∫_Δ f dμ` over the domain of `f`.
pub fn integrate_pl(f: &ConvexPL) -> Rational {
    integrate_with(f, integrate_affine_simplex)
}

/// `∫_Δ f^2 dμ` over the domain of `f`.
pub fn integrate_pl_sq(f: &ConvexPL) -> Rational {
    integrate_with(f, integrate_sq_affine_simplex)
}

/// `∫_{∂Δ} f dσ`, where `dσ` is half the lattice-normalized facet measure.
pub fn boundary_integral(f: &ConvexPL) -> Rational {
    let dom = f.domain();
    let n = dom.dim();
    let mut total = Rational::zero();
    for facet in dom.facets() {
        let j = facet.normal.iter().position(|x| !x.is_zero()).expect("nonzero normal");
        let nj = big(&facet.normal[j]);
        let weight = Rational::new(1.into(), BigInt::from(2)) / nj.abs();
        if n == 1 {
            total += f.value(&dom.vertices()[facet.vertices[0]]) * weight;
            continue;
        }
        // parametrize the facet by the remaining coordinates
        let pts: Vec<QVec> = facet
            .vertices
            .iter()
            .map(|&v| drop_coord(&dom.vertices()[v], j))
            .collect();
        let face = QPolytope::from_vertices(&pts).expect("facet spans its hyperplane");
        let pieces: Vec<AffineForm> = f
            .pieces()
            .iter()
            .map(|a| {
                let aj = &a.linear[j];
                let linear: QVec = (0..n)
                    .filter(|&i| i != j)
                    .map(|i| &a.linear[i] - aj * big(&facet.normal[i]) / &nj)
                    .collect();
                let constant = &a.constant + aj * &facet.offset / &nj;
                AffineForm::new(linear, constant)
            })
            .collect();
        let restricted = ConvexPL::new(face, pieces).expect("restriction keeps dimensions");
        total += integrate_pl(&restricted) * weight;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, qvec};

    fn segment() -> QPolytope {
        QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap()
    }

    fn pl(dom: QPolytope, pieces: &[(&[i64], i64)]) -> ConvexPL {
        ConvexPL::new(
            dom,
            pieces.iter().map(|(l, c)| AffineForm::new(qvec(l), int(*c))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn volumes() {
        assert_eq!(
            volume(&QPolytope::cube(&qvec(&[0, 0]), &qvec(&[1, 1])).unwrap()),
            int(1)
        );
        assert_eq!(volume(&QPolytope::standard_simplex(2, &int(1)).unwrap()), frac(1, 2));
        let t = QPolytope::from_vertices(&[qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 2])]).unwrap();
        assert_eq!(volume(&t), int(1));
    }

    #[test]
    fn hinge_integrals() {
        let f = pl(segment(), &[(&[0], 0), (&[2], -1)]);
        assert_eq!(integrate_pl(&f), frac(1, 4));
        assert_eq!(integrate_pl_sq(&f), frac(1, 6));
        assert_eq!(boundary_integral(&f), frac(1, 2));
    }

    #[test]
    fn boundary_of_constant() {
        assert_eq!(boundary_integral(&pl(segment(), &[(&[0], 1)])), int(1));
        assert_eq!(boundary_integral(&pl(segment(), &[(&[0], 0)])), int(0));
        let sq = QPolytope::cube(&qvec(&[0, 0]), &qvec(&[1, 1])).unwrap();
        assert_eq!(boundary_integral(&pl(sq, &[(&[0, 0], 1)])), int(2));
        let tri = QPolytope::standard_simplex(2, &int(1)).unwrap();
        assert_eq!(boundary_integral(&pl(tri, &[(&[0, 0], 1)])), frac(3, 2));
    }

    #[test]
    fn identity_on_segment() {
        let f = pl(segment(), &[(&[1], 0)]);
        assert_eq!(integrate_pl(&f), frac(1, 2));
    }
}
