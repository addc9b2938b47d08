use super::{Filtration, Source, TestConfig};
use crate::convexfn::{ConvexPL, SampledConvex};
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, AffineForm, QPolytope};
use crate::rational::{qvec, Rational};

/// `g_k(α/k) = i_k(α)/k`.
pub fn g_func(chi: &Filtration, k: u32) -> Result<SampledConvex> {
    Ok(chi.table(k)?.g_values())
}

/// The convex transform `G` (when known in closed form) and its degree-`k` envelopes.
#[derive(Debug, Clone)]
pub struct ConvexTransform {
    pub polytope: QPolytope,
    pub g: Option<ConvexPL>,
    pub envelopes: Vec<(u32, ConvexPL)>,
}

impl ConvexTransform {
    /// `G^(k)` for a test configuration: the lower hull of its base `g_k`.
    pub fn of_testconfig(tc: &TestConfig) -> Result<ConvexTransform> {
        Ok(ConvexTransform {
            polytope: tc.polytope().clone(),
            g: None,
            envelopes: vec![(tc.k(), tc.base().envelope()?)],
        })
    }

    pub fn envelope(&self, k: u32) -> Option<&ConvexPL> {
        self.envelopes.iter().find(|(d, _)| *d == k).map(|(_, g)| g)
    }
}

/// `G` and the envelopes `G^(k)` for each `k` in `ks`.
pub fn convex_transform(chi: &Filtration, ks: &[u32]) -> Result<ConvexTransform> {
    let mut envelopes = Vec::with_capacity(ks.len());
    for &k in ks {
        envelopes.push((k, chi.table(k)?.envelope()?));
    }
    Ok(ConvexTransform {
        polytope: chi.polytope().clone(),
        g: chi.transform(),
        envelopes,
    })
}

/// The filtration `i_Y(α, β) = i(α)` on `Δ × Δ`.
pub fn product_filtration(chi: &Filtration) -> Result<Filtration> {
    let base = chi.polytope();
    let n = base.dim();
    let square = base.product(base)?;
    match chi.source() {
        Source::Toric(_) => {
            let g = chi.transform().expect("toric");
            let pieces = g
                .pieces()
                .iter()
                .map(|p| {
                    let mut linear = p.linear.clone();
                    linear.extend(std::iter::repeat_n(Rational::default(), n));
                    AffineForm::new(linear, p.constant.clone())
                })
                .collect();
            Filtration::toric(ConvexPL::new(square, pieces)?)
        }
        Source::Explicit | Source::Arc { .. } => {
            let mut tables = Vec::new();
            for k in chi.degrees() {
                let t = chi.table(k)?;
                let levels = integer_points(&square, k)
                    .iter()
                    .map(|p| t.level(&p[..n]).expect("first factor lies in kΔ"))
                    .collect();
                tables.push((k, levels));
            }
            Filtration::explicit(square, tables, Some(chi.period()))
        }
    }
}

/// Deformation to the normal cone of a point of the projective line:
/// `i_k(0) = k` and `i_k(α) = 1` otherwise, for `k <= kmax`.
pub fn normal_cone_example(kmax: u32) -> Result<Filtration> {
    if kmax == 0 {
        return Err(Error::Invalid("kmax must be positive".into()));
    }
    let segment = QPolytope::cube(&qvec(&[0]), &qvec(&[1]))?;
    Filtration::explicit_fn(segment, kmax, |k, a| if a[0] == 0 { k as i64 } else { 1 }, None)
}
