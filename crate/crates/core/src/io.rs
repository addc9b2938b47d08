//! JSON input schemas for polytopes, convex functions, filtrations and arcs,
//! and CSV exports.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arcs::{ArcFamily, LaurentMatrix, SymPowerSource};
use crate::convexfn::{ConvexPL, SampledConvex};
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, AffineForm, QPolytope};
use crate::filtration::{Filtration, LevelTable, Source};
use crate::rational::{render, serde_q, QVec, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QRow(#[serde(with = "serde_q::vec")] pub QVec);

/// `<normal, x> >= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySpec {
    pub normal: Vec<i64>,
    #[serde(with = "serde_q")]
    pub offset: Rational,
}

/// A polytope by its vertices or by inequalities; when both are present the vertices win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<QRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<Vec<InequalitySpec>>,
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<QPolytope> {
        let p = match (&self.vertices, &self.inequalities) {
            (Some(v), _) => QPolytope::from_vertices(&v.iter().map(|r| r.0.clone()).collect::<Vec<_>>())?,
            (None, Some(ineqs)) => {
                let rows: Vec<(QVec, Rational)> = ineqs
                    .iter()
                    .map(|i| {
                        (
                            i.normal.iter().map(|&x| Rational::from_integer(x.into())).collect(),
                            i.offset.clone(),
                        )
                    })
                    .collect();
                QPolytope::from_inequalities(&rows)?
            }
            (None, None) => return Err(Error::Invalid("polytope needs vertices or inequalities".into())),
        };
        if let Some(d) = self.dim {
            if d != p.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
        }
        Ok(p)
    }

    pub fn of(p: &QPolytope) -> Self {
        PolytopeSpec {
            dim: Some(p.dim()),
            vertices: Some(p.vertices().iter().cloned().map(QRow).collect()),
            inequalities: Some(
                p.facets()
                    .iter()
                    .map(|f| InequalitySpec {
                        normal: f
                            .normal
                            .iter()
                            .map(|x| x.to_i64().expect("normal fits in i64"))
                            .collect(),
                        offset: f.offset.clone(),
                    })
                    .collect(),
            ),
        }
    }
}

/// `x -> max_i <linear_i, x> + constant_i`, optionally with its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSpec>,
    pub pieces: Vec<AffineForm>,
}

impl FunctionSpec {
    pub fn build(&self, domain: Option<&QPolytope>) -> Result<ConvexPL> {
        let dom = match (&self.polytope, domain) {
            (Some(p), _) => p.build()?,
            (None, Some(d)) => d.clone(),
            (None, None) => return Err(Error::Invalid("function needs a polytope".into())),
        };
        ConvexPL::new(dom, self.pieces.clone())
    }

    pub fn of(f: &ConvexPL, with_domain: bool) -> Self {
        FunctionSpec {
            polytope: with_domain.then(|| PolytopeSpec::of(f.domain())),
            pieces: f.pieces().to_vec(),
        }
    }
}

/// An integer given either as a JSON number or a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IntLike(pub i64);

impl<'de> Deserialize<'de> for IntLike {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            I(i64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::I(i) => Ok(IntLike(i)),
            Raw::S(s) => s
                .trim()
                .parse()
                .map(IntLike)
                .map_err(|_| serde::de::Error::custom(format!("expected an integer, got {s:?}"))),
        }
    }
}

/// One degree of an explicit filtration: rows `[α_1, ..., α_n, level]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub k: u32,
    pub levels: Vec<Vec<IntLike>>,
}

impl TableSpec {
    pub fn of(t: &LevelTable) -> Self {
        TableSpec {
            k: t.k(),
            levels: t
                .points()
                .iter()
                .zip(t.levels())
                .map(|(a, l)| a.iter().chain([l]).map(|&x| IntLike(x)).collect())
                .collect(),
        }
    }

    fn levels_for(&self, p: &QPolytope) -> Result<Vec<i64>> {
        let pts = integer_points(p, self.k);
        let mut given: HashMap<Vec<i64>, i64> = HashMap::new();
        for row in &self.levels {
            if row.len() != p.dim() + 1 {
                return Err(Error::InvalidTable(format!(
                    "degree {}: row has {} entries, expected {}",
                    self.k,
                    row.len(),
                    p.dim() + 1
                )));
            }
            let alpha: Vec<i64> = row[..p.dim()].iter().map(|x| x.0).collect();
            if given.insert(alpha.clone(), row[p.dim()].0).is_some() {
                return Err(Error::InvalidTable(format!(
                    "degree {}: point {alpha:?} listed twice",
                    self.k
                )));
            }
        }
        if given.len() != pts.len() {
            return Err(Error::InvalidTable(format!(
                "degree {} needs {} lattice points, got {}",
                self.k,
                pts.len(),
                given.len()
            )));
        }
        pts.iter()
            .map(|a| {
                given
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::InvalidTable(format!("degree {}: point {a:?} is missing", self.k)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", try_from = "RawFiltration")]
pub enum FiltrationSpec {
    Toric {
        polytope: PolytopeSpec,
        f: FunctionSpec,
    },
    Explicit {
        polytope: PolytopeSpec,
        tables: Vec<TableSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<u32>,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FiltrationKind {
    Toric,
    Explicit,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiltration {
    #[serde(rename = "type")]
    kind: FiltrationKind,
    polytope: PolytopeSpec,
    f: Option<FunctionSpec>,
    tables: Option<Vec<TableSpec>>,
    period: Option<u32>,
}

impl TryFrom<RawFiltration> for FiltrationSpec {
    type Error = String;

    fn try_from(r: RawFiltration) -> std::result::Result<Self, String> {
        match r.kind {
            FiltrationKind::Toric => {
                if r.tables.is_some() || r.period.is_some() {
                    return Err("toric filtrations take `f`, not `tables` or `period`".into());
                }
                Ok(FiltrationSpec::Toric {
                    polytope: r.polytope,
                    f: r.f.ok_or("missing field `f`")?,
                })
            }
            FiltrationKind::Explicit => {
                if r.f.is_some() {
                    return Err("explicit filtrations take `tables`, not `f`".into());
                }
                Ok(FiltrationSpec::Explicit {
                    polytope: r.polytope,
                    tables: r.tables.ok_or("missing field `tables`")?,
                    period: r.period,
                })
            }
        }
    }
}

impl FiltrationSpec {
    pub fn build(&self) -> Result<Filtration> {
        match self {
            FiltrationSpec::Toric { polytope, f } => {
                let p = polytope.build()?;
                Filtration::toric(f.build(Some(&p))?)
            }
            FiltrationSpec::Explicit {
                polytope,
                tables,
                period,
            } => {
                let p = polytope.build()?;
                let raw = tables
                    .iter()
                    .map(|t| Ok((t.k, t.levels_for(&p)?)))
                    .collect::<Result<Vec<_>>>()?;
                Filtration::explicit(p, raw, *period)
            }
        }
    }

    /// Toric filtrations keep their function; others are written out as the stored tables.
    pub fn of(chi: &Filtration) -> Result<Self> {
        let polytope = PolytopeSpec::of(chi.polytope());
        match chi.source() {
            Source::Toric(f) => Ok(FiltrationSpec::Toric {
                polytope,
                f: FunctionSpec::of(f, false),
            }),
            _ => Ok(FiltrationSpec::Explicit {
                polytope,
                tables: chi
                    .degrees()
                    .into_iter()
                    .map(|k| Ok(TableSpec::of(&*chi.table(k)?)))
                    .collect::<Result<Vec<_>>>()?,
                period: Some(chi.period()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeMatrix {
    pub k: u32,
    pub matrix: LaurentMatrix,
}

/// Arc input: a single family, a symmetric-power arc on the standard simplex,
/// or explicit per-degree matrices on a polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", try_from = "RawArc")]
pub enum ArcSpec {
    Matrix {
        matrix: LaurentMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
    },
    SymPower {
        g1: LaurentMatrix,
    },
    Family {
        polytope: PolytopeSpec,
        degrees: Vec<DegreeMatrix>,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ArcKind {
    Matrix,
    SymPower,
    Family,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArc {
    #[serde(rename = "type")]
    kind: ArcKind,
    matrix: Option<LaurentMatrix>,
    order: Option<usize>,
    g1: Option<LaurentMatrix>,
    polytope: Option<PolytopeSpec>,
    degrees: Option<Vec<DegreeMatrix>>,
}

impl TryFrom<RawArc> for ArcSpec {
    type Error = String;

    fn try_from(r: RawArc) -> std::result::Result<Self, String> {
        let extra = |present: bool, what: &str| {
            if present {
                Err(format!("unexpected field `{what}`"))
            } else {
                Ok(())
            }
        };
        match r.kind {
            ArcKind::Matrix => {
                extra(r.g1.is_some(), "g1")?;
                extra(r.polytope.is_some() || r.degrees.is_some(), "polytope/degrees")?;
                Ok(ArcSpec::Matrix {
                    matrix: r.matrix.ok_or("missing field `matrix`")?,
                    order: r.order,
                })
            }
            ArcKind::SymPower => {
                extra(r.matrix.is_some() || r.order.is_some(), "matrix/order")?;
                extra(r.polytope.is_some() || r.degrees.is_some(), "polytope/degrees")?;
                Ok(ArcSpec::SymPower {
                    g1: r.g1.ok_or("missing field `g1`")?,
                })
            }
            ArcKind::Family => {
                extra(
                    r.matrix.is_some() || r.order.is_some() || r.g1.is_some(),
                    "matrix/order/g1",
                )?;
                Ok(ArcSpec::Family {
                    polytope: r.polytope.ok_or("missing field `polytope`")?,
                    degrees: r.degrees.ok_or("missing field `degrees`")?,
                })
            }
        }
    }
}

impl ArcSpec {
    /// The per-degree family, restricted to `ks` for symmetric powers.
    pub fn family(&self, ks: &[u32]) -> Result<ArcFamily> {
        match self {
            ArcSpec::Matrix { .. } => Err(Error::UnsupportedVariant(
                "a single matrix is not a graded family".into(),
            )),
            ArcSpec::SymPower { g1 } => SymPowerSource::new(g1.clone())?.family(ks),
            ArcSpec::Family { polytope, degrees } => ArcFamily::new(
                polytope.build()?,
                degrees.iter().map(|d| (d.k, d.matrix.clone())).collect(),
                "family",
            ),
        }
    }
}

/// CSV of sampled values: coordinates `x0, x1, ...` then `value`.
pub fn sampled_csv(s: &SampledConvex) -> String {
    let n = s.points.first().map_or(0, Vec::len);
    let mut out: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    out.push("value".into());
    let mut text = out.join(",") + "\n";
    for (p, v) in s.points.iter().zip(&s.values) {
        let mut row: Vec<String> = p.iter().map(render).collect();
        row.push(render(v));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// Samples a convex function on `Δ ∩ (1/k)Z^n`.
pub fn sample(f: &ConvexPL, k: u32) -> SampledConvex {
    let points = crate::exactgeom::lattice_points(f.domain(), k);
    let values = points.iter().map(|p| f.value(p)).collect();
    SampledConvex { k, points, values }
}

/// Integer vector helper for rational points known to be integral.
pub fn as_ints(v: &[Rational]) -> Option<Vec<i64>> {
    v.iter()
        .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int, qvec};

    #[test]
    fn polytope_round_trip() {
        let text = r#"{"dim":1,"vertices":[["0"],["1"]]}"#;
        let spec: PolytopeSpec = serde_json::from_str(text).unwrap();
        let p = spec.build().unwrap();
        let back: PolytopeSpec = serde_json::from_str(&serde_json::to_string(&PolytopeSpec::of(&p)).unwrap()).unwrap();
        assert_eq!(back.build().unwrap(), p);
        let h = r#"{"inequalities":[{"normal":[1],"offset":"0"},{"normal":[-1],"offset":"-1/2"}]}"#;
        let q = serde_json::from_str::<PolytopeSpec>(h).unwrap().build().unwrap();
        assert_eq!(q.vertices(), &[qvec(&[0]), vec![frac(1, 2)]]);
    }

    #[test]
    fn toric_spec() {
        let text = r#"{"type":"toric","polytope":{"vertices":[["0"],["1"]]},
            "f":{"pieces":[{"linear":["0"],"constant":"0"},{"linear":["2"],"constant":"-1"}]}}"#;
        let spec: FiltrationSpec = serde_json::from_str(text).unwrap();
        let chi = spec.build().unwrap();
        assert_eq!(chi.shift(), 1);
        let again = FiltrationSpec::of(&chi).unwrap().build().unwrap();
        assert_eq!(again.table(3).unwrap().levels(), chi.table(3).unwrap().levels());
    }

    #[test]
    fn explicit_spec_any_row_order() {
        let text = r#"{"type":"explicit","polytope":{"vertices":[["0"],["1"]]},
            "tables":[{"k":1,"levels":[[1,"2"],[0,1]]}]}"#;
        let chi = serde_json::from_str::<FiltrationSpec>(text).unwrap().build().unwrap();
        assert_eq!(chi.table(1).unwrap().levels(), &[1, 2]);
        let missing =
            r#"{"type":"explicit","polytope":{"vertices":[["0"],["1"]]},"tables":[{"k":1,"levels":[[0,1]]}]}"#;
        let spec: FiltrationSpec = serde_json::from_str(missing).unwrap();
        assert!(matches!(spec.build(), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn csv_sampling() {
        let p = QPolytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap();
        let f = crate::filtration::pl_from_ints(&p, &[(&[1], 0)]).unwrap();
        assert_eq!(sampled_csv(&sample(&f, 2)), "x0,value\n0,0\n1/2,1/2\n1,1\n");
        assert_eq!(as_ints(&[int(2), int(-1)]), Some(vec![2, -1]));
    }
}
