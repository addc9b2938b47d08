use std::sync::{Arc, Mutex};

use super::table::LevelTable;
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, PointIndex, QPolytope};

/// Min-plus convolution: levels on `(a.k + b.k)Δ` from sums of one point of each table.
pub fn convolve(p: &QPolytope, a: &LevelTable, b: &LevelTable) -> Result<LevelTable> {
    let k = a.k() + b.k();
    let points = integer_points(p, k);
    let index = PointIndex::new(&points);
    let mut best = vec![i64::MAX; points.len()];
    let n = points.first().map_or(0, |x| x.len());
    let mut buf = vec![0i64; n];
    for (pa, la) in a.points().iter().zip(a.levels()) {
        for (pb, lb) in b.points().iter().zip(b.levels()) {
            for i in 0..n {
                buf[i] = pa[i] + pb[i];
            }
            let j = index.get(&buf).expect("sum of dilates lies in the dilate of the sum");
            let v = la + lb;
            if v < best[j] {
                best[j] = v;
            }
        }
    }
    if let Some(j) = best.iter().position(|&v| v == i64::MAX) {
        return Err(Error::NotGenerated {
            degree: k,
            beta: points[j].clone(),
        });
    }
    LevelTable::new(k, points, best)
}

/// `i'(β) = min Σ_j i(α_j)` over `l`-fold decompositions `β = α_1 + … + α_l`,
/// computed by binary doubling.
pub fn minplus_extend(p: &QPolytope, t: &LevelTable, l: u32) -> Result<LevelTable> {
    if l == 0 {
        return Err(Error::Invalid("extension factor must be positive".into()));
    }
    let mut result: Option<LevelTable> = None;
    let mut power = t.clone();
    let mut rest = l;
    loop {
        if rest & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => convolve(p, &r, &power)?,
            });
        }
        rest >>= 1;
        if rest == 0 {
            break;
        }
        power = convolve(p, &power, &power)?;
    }
    Ok(result.expect("l >= 1"))
}

/// The finitely generated filtration induced by one degree-`k` table,
/// with its min-plus extensions computed on demand.
#[derive(Debug)]
pub struct TestConfig {
    polytope: QPolytope,
    base: Arc<LevelTable>,
    // extensions[l - 1] is the table at degree k·l
    extensions: Mutex<Vec<Arc<LevelTable>>>,
}

impl TestConfig {
    pub fn new(polytope: QPolytope, base: Arc<LevelTable>) -> Self {
        TestConfig {
            polytope,
            extensions: Mutex::new(vec![base.clone()]),
            base,
        }
    }

    pub fn k(&self) -> u32 {
        self.base.k()
    }

    pub fn polytope(&self) -> &QPolytope {
        &self.polytope
    }

    pub fn base(&self) -> &LevelTable {
        &self.base
    }

    /// Table at degree `k·l`.
    pub fn extension(&self, l: u32) -> Result<Arc<LevelTable>> {
        if l == 0 {
            return Err(Error::Invalid("extension factor must be positive".into()));
        }
        let mut ext = self.extensions.lock().expect("extension cache poisoned");
        while ext.len() < l as usize {
            let last = ext.last().expect("base is cached").clone();
            let next = convolve(&self.polytope, &last, &self.base)?;
            ext.push(Arc::new(next));
        }
        Ok(ext[l as usize - 1].clone())
    }
}
