use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::polytope::QPolytope;
use crate::rational::{ceil_int, floor_int, int, QVec, Rational};

/// Integer points of `k * polytope`, in lexicographic order.
pub fn integer_points(p: &QPolytope, k: u32) -> Vec<Vec<i64>> {
    let n = p.dim();
    let kk = int(k as i64);
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for v in p.vertices() {
        for i in 0..n {
            let x = &v[i] * &kk;
            lo[i] = lo[i].min(ceil_int(&x).to_i64().expect("coordinate fits in i64"));
            hi[i] = hi[i].max(floor_int(&x).to_i64().expect("coordinate fits in i64"));
        }
    }
    // <normal, beta> >= k * offset  <=>  <normal, beta> >= ceil(k * offset)
    let rows: Vec<(Vec<i64>, i64)> = p
        .facets()
        .iter()
        .map(|f| {
            let normal = f
                .normal
                .iter()
                .map(|x| x.to_i64().expect("normal fits in i64"))
                .collect();
            let bound = ceil_int(&(&f.offset * &kk)).to_i64().expect("offset fits in i64");
            (normal, bound)
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = lo.clone();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return out;
    }
    loop {
        if rows
            .iter()
            .all(|(a, b)| a.iter().zip(&cur).map(|(x, y)| x * y).sum::<i64>() >= *b)
        {
            out.push(cur.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
        }
    }
}

/// Points of `polytope ∩ (1/k) Z^n`, in lexicographic order.
pub fn lattice_points(p: &QPolytope, k: u32) -> Vec<QVec> {
    integer_points(p, k)
        .into_iter()
        .map(|b| {
            b.into_iter()
                .map(|x| Rational::new(BigInt::from(x), BigInt::from(k)))
                .collect()
        })
        .collect()
}

/// Dense lookup from integer points to their position in a fixed list.
#[derive(Debug, Clone, Default)]
pub struct PointIndex {
    lo: Vec<i64>,
    extent: Vec<i64>,
    slots: Vec<u32>,
    len: usize,
}

impl PointIndex {
    pub fn new(points: &[Vec<i64>]) -> Self {
        let Some(first) = points.first() else {
            return PointIndex::default();
        };
        let n = first.len();
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in points {
            for i in 0..n {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let extent: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
        let size: i64 = extent.iter().product();
        let mut idx = PointIndex {
            lo,
            extent,
            slots: vec![u32::MAX; size as usize],
            len: points.len(),
        };
        for (i, p) in points.iter().enumerate() {
            let s = idx.slot(p).expect("inside bounding box");
            idx.slots[s] = i as u32;
        }
        idx
    }

    fn slot(&self, p: &[i64]) -> Option<usize> {
        if p.len() != self.lo.len() || self.slots.is_empty() {
            return None;
        }
        let mut s: i64 = 0;
        for i in 0..p.len() {
            let off = p[i] - self.lo[i];
            if off < 0 || off >= self.extent[i] {
                return None;
            }
            s = s * self.extent[i] + off;
        }
        Some(s as usize)
    }

    pub fn get(&self, p: &[i64]) -> Option<usize> {
        let s = self.slot(p)?;
        match self.slots[s] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, qvec};

    #[test]
    fn segment_points() {
        let p = QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap();
        let pts = lattice_points(&p, 3);
        assert_eq!(
            pts,
            vec![vec![int(0)], vec![frac(1, 3)], vec![frac(2, 3)], vec![int(1)]]
        );
    }

    #[test]
    fn square_corners() {
        let p = QPolytope::cube(&qvec(&[0, 0]), &qvec(&[1, 1])).unwrap();
        assert_eq!(integer_points(&p, 1).len(), 4);
    }

    #[test]
    fn rational_vertices() {
        let p = QPolytope::cube(&[frac(1, 3)], &[frac(5, 3)]).unwrap();
        assert_eq!(integer_points(&p, 1), vec![vec![1]]);
        assert_eq!(integer_points(&p, 3), (1..=5).map(|x| vec![x]).collect::<Vec<_>>());
    }

    #[test]
    fn point_index_lookup() {
        let p = QPolytope::standard_simplex(2, &int(1)).unwrap();
        let pts = integer_points(&p, 3);
        let idx = PointIndex::new(&pts);
        for (i, q) in pts.iter().enumerate() {
            assert_eq!(idx.get(q), Some(i));
        }
        assert_eq!(idx.get(&[3, 3]), None);
        assert_eq!(idx.get(&[-1, 0]), None);
    }

    #[test]
    fn simplex_counts_are_binomial() {
        let p = QPolytope::standard_simplex(3, &int(1)).unwrap();
        for k in 1..6u32 {
            let c = (k as usize + 1) * (k as usize + 2) * (k as usize + 3) / 6;
            assert_eq!(integer_points(&p, k).len(), c);
        }
    }
}
