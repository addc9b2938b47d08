//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::rational::{sub, QVec, Rational};

/// Reduced row echelon form; returns the reduced rows (zero rows dropped) and pivot columns.
pub fn rref(mut rows: Vec<QVec>, ncols: usize) -> (Vec<QVec>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: &[QVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    rref(rows.to_vec(), n).1.len()
}

/// Basis of `{x : rows * x = 0}`.
pub fn nullspace(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let (red, pivots) = rref(rows.to_vec(), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in red.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub fn det(m: &[QVec]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let piv = a[c][c].clone();
        d *= &piv;
        for i in (c + 1)..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &piv;
                let prow = a[c].clone();
                for (x, y) in a[i].iter_mut().zip(&prow).skip(c) {
                    *x -= &f * y;
                }
            }
        }
    }
    d
}

/// Unique solution of the square system `a x = b`, if `a` is nonsingular.
pub fn solve(a: &[QVec], b: &[Rational]) -> Option<QVec> {
    let n = a.len();
    let aug: Vec<QVec> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (red, pivots) = rref(aug, n + 1);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(red.iter().map(|r| r[n].clone()).collect())
}

pub fn inverse(a: &[QVec]) -> Option<Vec<QVec>> {
    let n = a.len();
    let aug: Vec<QVec> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let (red, pivots) = rref(aug, 2 * n);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Dimension of the affine hull of `points` (`-1` encoded as `None` for the empty set).
pub fn affine_dim(points: &[&QVec]) -> Option<usize> {
    let first = points.first()?;
    let diffs: Vec<QVec> = points[1..].iter().map(|p| sub(p, first)).collect();
    Some(rank(&diffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int, qvec};

    #[test]
    fn determinant_and_inverse() {
        let m = vec![qvec(&[2, 1]), qvec(&[1, 3])];
        assert_eq!(det(&m), int(5));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0], vec![frac(3, 5), frac(-1, 5)]);
        assert_eq!(inv[1], vec![frac(-1, 5), frac(2, 5)]);
        assert!(inverse(&[qvec(&[1, 2]), qvec(&[2, 4])]).is_none());
    }

    #[test]
    fn nullspace_of_rank_one() {
        let ns = nullspace(&[qvec(&[1, 1, 1])], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0].clone() + &v[1] + &v[2]).is_zero());
        }
    }

    #[test]
    fn affine_dimension() {
        let pts = [qvec(&[0, 0]), qvec(&[1, 1]), qvec(&[2, 2])];
        let refs: Vec<&QVec> = pts.iter().collect();
        assert_eq!(affine_dim(&refs), Some(1));
        assert_eq!(
            solve(&[qvec(&[1, 1]), qvec(&[1, -1])], &qvec(&[2, 0])),
            Some(qvec(&[1, 1]))
        );
    }
}
