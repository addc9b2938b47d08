use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::convexfn::{lower_hull, ConvexPL, SampledConvex};
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, PointIndex, QPolytope};
use crate::rational::{QVec, Rational};

/// Filtration levels on the lattice points of `kΔ`.
#[derive(Debug, Clone)]
pub struct LevelTable {
    k: u32,
    points: Vec<Vec<i64>>,
    levels: Vec<i64>,
    index: PointIndex,
    envelope: OnceLock<ConvexPL>,
}

impl PartialEq for LevelTable {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.points == other.points && self.levels == other.levels
    }
}

impl LevelTable {
    /// `points` must be the lattice points of `kΔ` in lexicographic order.
    pub fn new(k: u32, points: Vec<Vec<i64>>, levels: Vec<i64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidTable("degree must be positive".into()));
        }
        if points.len() != levels.len() {
            return Err(Error::InvalidTable(format!(
                "{} points but {} levels at degree {k}",
                points.len(),
                levels.len()
            )));
        }
        if let Some(i) = levels.iter().position(|&l| l < 1) {
            return Err(Error::InvalidTable(format!(
                "level {} at {:?} is below 1 (degree {k})",
                levels[i], points[i]
            )));
        }
        let index = PointIndex::new(&points);
        Ok(LevelTable {
            k,
            points,
            levels,
            index,
            envelope: OnceLock::new(),
        })
    }

    /// Table on `kΔ` with levels given by `level(α)`.
    pub fn from_fn(p: &QPolytope, k: u32, mut level: impl FnMut(&[i64]) -> i64) -> Result<Self> {
        let points = integer_points(p, k);
        let levels = points.iter().map(|a| level(a)).collect();
        LevelTable::new(k, points, levels)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn level(&self, alpha: &[i64]) -> Option<i64> {
        self.index.get(alpha).map(|i| self.levels[i])
    }

    /// `d_k`, the number of lattice points.
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    /// `w_k = -Σ i(α)`, the trace of the weight matrix.
    pub fn weight(&self) -> i128 {
        -self.levels.iter().map(|&l| l as i128).sum::<i128>()
    }

    /// `Σ i(α)^2`, the trace of the squared weight matrix.
    pub fn square_sum(&self) -> i128 {
        self.levels.iter().map(|&l| (l as i128) * (l as i128)).sum()
    }

    pub fn min_level(&self) -> i64 {
        *self.levels.iter().min().expect("nonempty table")
    }

    pub fn max_level(&self) -> i64 {
        *self.levels.iter().max().expect("nonempty table")
    }

    /// Levels shifted by `c·k`.
    pub fn shifted(&self, c: i64) -> Result<LevelTable> {
        let ck = c * self.k as i64;
        LevelTable::new(
            self.k,
            self.points.clone(),
            self.levels.iter().map(|l| l + ck).collect(),
        )
    }

    pub fn scaled(&self, m: i64) -> Result<LevelTable> {
        LevelTable::new(self.k, self.points.clone(), self.levels.iter().map(|l| l * m).collect())
    }

    /// `g_k(α/k) = i(α)/k`.
    pub fn g_values(&self) -> SampledConvex {
        let k = BigInt::from(self.k);
        SampledConvex {
            k: self.k,
            points: self.scaled_points(),
            values: self
                .levels
                .iter()
                .map(|&l| Rational::new(BigInt::from(l), k.clone()))
                .collect(),
        }
    }

    /// The points `α/k` of `Δ ∩ (1/k)Z^n`.
    pub fn scaled_points(&self) -> Vec<QVec> {
        let k = BigInt::from(self.k);
        self.points
            .iter()
            .map(|a| a.iter().map(|&x| Rational::new(BigInt::from(x), k.clone())).collect())
            .collect()
    }

    /// Lower convex envelope of `g_k`.
    pub fn envelope(&self) -> Result<ConvexPL> {
        if let Some(g) = self.envelope.get() {
            return Ok(g.clone());
        }
        let g = self.g_values();
        let env = lower_hull(&g.points, &g.values)?;
        Ok(self.envelope.get_or_init(|| env).clone())
    }

    /// CSV with one row per lattice point: coordinates, then the level.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut out = String::new();
        let cols: Vec<String> = (0..n).map(|i| format!("alpha{i}")).collect();
        let _ = writeln!(out, "k,{},level", cols.join(","));
        for (p, l) in self.points.iter().zip(&self.levels) {
            let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{},{},{}", self.k, coords.join(","), l);
        }
        out
    }
}

/// First violation of `i_{k+l}(α+β) <= i_k(α) + i_l(β)` between two tables.
pub fn multiplicativity_violation(a: &LevelTable, b: &LevelTable, sum: &LevelTable) -> Option<(Vec<i64>, Vec<i64>)> {
    let mut buf = vec![0i64; a.points.first().map_or(0, |p| p.len())];
    for (p, lp) in a.points.iter().zip(&a.levels) {
        for (q, lq) in b.points.iter().zip(&b.levels) {
            for i in 0..buf.len() {
                buf[i] = p[i] + q[i];
            }
            if let Some(v) = sum.level(&buf) {
                if v > lp + lq {
                    return Some((p.clone(), q.clone()));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int, qvec};

    #[test]
    fn weights_and_lookup() {
        let p = QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap();
        let t = LevelTable::from_fn(&p, 2, |a| 2 + a[0]).unwrap();
        assert_eq!(t.levels(), &[2, 3, 4]);
        assert_eq!(t.weight(), -9);
        assert_eq!(t.square_sum(), 29);
        assert_eq!(t.level(&[1]), Some(3));
        assert_eq!(t.g_values().values, vec![int(1), frac(3, 2), int(2)]);
        assert!(t.to_csv().starts_with("k,alpha0,level\n2,0,2\n"));
    }

    #[test]
    fn nonpositive_levels_rejected() {
        let p = QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap();
        assert!(matches!(
            LevelTable::from_fn(&p, 1, |a| a[0]),
            Err(Error::InvalidTable(_))
        ));
    }
}
