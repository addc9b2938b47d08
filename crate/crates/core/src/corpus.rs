//! The reference filtrations used throughout the tests and by `kstab corpus`.

use serde::Serialize;

use crate::error::Result;
use crate::exactgeom::QPolytope;
use crate::filtration::{normal_cone_example, pl_from_ints, Filtration};
use crate::io::FiltrationSpec;
use crate::rational::{int, qvec};

#[derive(Debug, Clone, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub spec: FiltrationSpec,
}

impl CorpusEntry {
    pub fn build(&self) -> Result<Filtration> {
        self.spec.build()
    }
}

pub fn segment() -> QPolytope {
    QPolytope::cube(&qvec(&[0]), &qvec(&[1])).expect("segment")
}

pub fn square() -> QPolytope {
    QPolytope::cube(&qvec(&[0, 0]), &qvec(&[1, 1])).expect("square")
}

pub fn triangle() -> QPolytope {
    QPolytope::standard_simplex(2, &int(1)).expect("triangle")
}

type Pieces<'a> = &'a [(&'a [i64], i64)];

fn toric(name: &str, description: &str, p: &QPolytope, pieces: Pieces) -> Result<CorpusEntry> {
    let chi = Filtration::toric(pl_from_ints(p, pieces)?)?;
    Ok(CorpusEntry {
        name: name.into(),
        description: description.into(),
        spec: FiltrationSpec::of(&chi)?,
    })
}

fn explicit(name: &str, description: &str, chi: &Filtration) -> Result<CorpusEntry> {
    Ok(CorpusEntry {
        name: name.into(),
        description: description.into(),
        spec: FiltrationSpec::of(chi)?,
    })
}

/// Nine toric filtrations: three convex PL functions on each of the segment,
/// the unit square and the standard triangle.
pub fn toric_corpus() -> Result<Vec<CorpusEntry>> {
    let (s, q, t) = (segment(), square(), triangle());
    Ok(vec![
        toric("segment-linear", "x on [0,1]", &s, &[(&[1], 0)])?,
        toric("segment-hinge", "max(0, 2x-1) on [0,1]", &s, &[(&[0], 0), (&[2], -1)])?,
        toric("segment-vee", "max(x, 1-x) on [0,1]", &s, &[(&[1], 0), (&[-1], 1)])?,
        toric("square-linear", "x1 on [0,1]^2", &q, &[(&[1, 0], 0)])?,
        toric(
            "square-hinge",
            "max(0, 2x1+2x2-3) + 1 on [0,1]^2",
            &q,
            &[(&[0, 0], 1), (&[2, 2], -2)],
        )?,
        toric(
            "square-max",
            "max(x1, x2) on [0,1]^2",
            &q,
            &[(&[1, 0], 0), (&[0, 1], 0)],
        )?,
        toric("triangle-linear", "x1 on the standard triangle", &t, &[(&[1, 0], 0)])?,
        toric(
            "triangle-max",
            "max(x1, x2) on the standard triangle",
            &t,
            &[(&[1, 0], 0), (&[0, 1], 0)],
        )?,
        toric(
            "triangle-vee",
            "max(1-x1-x2, x1, x2) on the standard triangle",
            &t,
            &[(&[-1, -1], 1), (&[1, 0], 0), (&[0, 1], 0)],
        )?,
    ])
}

/// Explicit filtrations on the segment with tables up to degree `kmax`.
pub fn explicit_corpus(kmax: u32) -> Result<Vec<CorpusEntry>> {
    let s = segment();
    Ok(vec![
        explicit(
            "normal-cone",
            "i_k(0) = k, i_k(a) = 1 otherwise (deformation to the normal cone of a point)",
            &normal_cone_example(kmax)?,
        )?,
        explicit(
            "constant",
            "i_k = 2k at every lattice point",
            &Filtration::explicit_fn(s.clone(), kmax, |k, _| 2 * k as i64, Some(1))?,
        )?,
        explicit(
            "product-type",
            "i_k(a) = k + a",
            &Filtration::explicit_fn(s, kmax, |k, a| k as i64 + a[0], Some(1))?,
        )?,
    ])
}

pub fn corpus(kmax: u32) -> Result<Vec<CorpusEntry>> {
    let mut all = toric_corpus()?;
    all.extend(explicit_corpus(kmax)?);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_builds() {
        let all = corpus(6).unwrap();
        assert_eq!(all.len(), 12);
        for e in &all {
            let chi = e.build().unwrap();
            assert!(chi.table(2).is_ok(), "{}", e.name);
        }
    }
}
