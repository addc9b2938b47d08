use num_traits::{Signed, Zero};
use serde::Serialize;

use super::mean;
use crate::convexfn::{sublevel_body, ConvexPL};
use crate::error::{Error, Result};
use crate::exactgeom::{corner_simplex, integrate_pl, max_corner_eps, volume};
use crate::filtration::Filtration;
use crate::rational::{frac, int, render, serde_q, QReport, QVec, Rational};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityRow {
    pub k: u32,
    /// `Σ_α g_k(α) - Ḡ·d_k`.
    pub value: QReport,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityReport {
    pub mean: QReport,
    pub rows: Vec<InstabilityRow>,
    pub required: usize,
    pub verdict: String,
}

/// Sign of `Σ g_k - Ḡ d_k` for each `k`; a witness needs `required` negative degrees.
/// `reference` overrides the mean of `G`, which is otherwise taken from the toric data.
pub fn chow_instability_test(
    chi: &Filtration,
    ks: &[u32],
    reference: Option<&Rational>,
    required: usize,
) -> Result<InstabilityReport> {
    let gbar = match (reference, chi.transform()) {
        (Some(r), _) => r.clone(),
        (None, Some(g)) => mean(&g),
        (None, None) => {
            return Err(Error::UnsupportedVariant(
                "mean of G is only known in closed form for toric filtrations".into(),
            ))
        }
    };
    let mut rows = Vec::new();
    for &k in ks {
        let g = chi.table(k)?.g_values();
        let sum: Rational = g.values.iter().sum();
        let value = sum - &gbar * int(g.values.len() as i64);
        rows.push(InstabilityRow {
            k,
            negative: value.is_negative(),
            value: value.into(),
        });
    }
    let count = rows.iter().filter(|r| r.negative).count();
    let verdict = if count >= required.max(1) {
        "unstable-witness"
    } else {
        "no-witness"
    };
    Ok(InstabilityReport {
        mean: gbar.into(),
        rows,
        required,
        verdict: verdict.into(),
    })
}

/// `Λ = (9/10) max G + (1/10) Ḡ`.
pub fn stability_threshold(g: &ConvexPL) -> Rational {
    frac(9, 10) * g.max() + frac(1, 10) * mean(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub vertex_index: usize,
    #[serde(with = "serde_q::vec")]
    pub vertex: QVec,
    #[serde(with = "serde_q")]
    pub eps: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    #[serde(with = "serde_q")]
    pub lambda: Rational,
    #[serde(with = "serde_q")]
    pub sublevel_volume: Rational,
    #[serde(with = "serde_q")]
    pub volume: Rational,
    pub witness: Option<Witness>,
    pub skipped: Vec<String>,
    pub diagnostic: String,
}

/// A smooth corner whose simplex of the largest possible size avoids `{G <= Λ}`.
pub fn vanishing_witness(g: &ConvexPL, lambda: &Rational) -> Result<WitnessReport> {
    let dom = g.domain();
    let vol = volume(dom);
    let q = sublevel_body(g, lambda);
    let qvol = q.as_ref().map(volume).unwrap_or_else(Rational::zero);
    let mut report = WitnessReport {
        lambda: lambda.clone(),
        sublevel_volume: qvol.clone(),
        volume: vol.clone(),
        witness: None,
        skipped: Vec::new(),
        diagnostic: String::new(),
    };
    if qvol == vol {
        report.diagnostic = "sublevel body is the whole polytope".into();
        return Ok(report);
    }
    let mut best: Option<Witness> = None;
    for (i, v) in dom.vertices().iter().enumerate() {
        let s = match corner_simplex(dom, i, &Rational::zero()) {
            Ok(s) => s,
            Err(e) => {
                report.skipped.push(e.to_string());
                continue;
            }
        };
        let cap = max_corner_eps(dom, i)?;
        let gap = match &q {
            None => cap.clone(),
            Some(q) => q.vertices().iter().map(|x| s.height(x)).min().expect("nonempty"),
        };
        let eps = gap.min(cap);
        if eps.is_positive() && best.as_ref().is_none_or(|b| eps > b.eps) {
            best = Some(Witness {
                vertex_index: i,
                vertex: v.clone(),
                eps,
            });
        }
    }
    if best.is_none() {
        report.diagnostic = "sublevel body touches every smooth corner".into();
    }
    report.witness = best;
    Ok(report)
}

/// `Ch_m` for the blow-up at the corner `v`: the sum of `g_m` over lattice points
/// of vanishing order at least `mε`, minus their count times the mean of `G_η`
/// on `P \ Δ_ε`, with `η = χ^(k)`.
pub fn blowup_chow(chi: &Filtration, v: usize, eps: &Rational, m: u32, k: u32) -> Result<Rational> {
    let me = eps * int(m as i64);
    if !me.is_integer() {
        return Err(Error::NonIntegerMEps(render(&me)));
    }
    if k == 0 || !m.is_multiple_of(k) {
        return Err(Error::Invalid(format!("degree {m} is not a multiple of {k}")));
    }
    let p = chi.polytope();
    let simplex = corner_simplex(p, v, eps)?;
    let region = if eps.is_zero() {
        p.clone()
    } else {
        simplex
            .complement_in(p)
            .ok_or_else(|| Error::Invalid("corner simplex covers the polytope".into()))?
    };
    let tc = chi.testconfig(k)?;
    let g_eta = tc
        .base()
        .envelope()?
        .restrict(&region)
        .ok_or_else(|| Error::Invalid("empty blow-up complement".into()))?;
    let avg = integrate_pl(&g_eta) / volume(&region);
    let ext = tc.extension(m / k)?;
    let g = ext.g_values();
    let mut sum = Rational::zero();
    let mut count = 0i64;
    for (x, val) in g.points.iter().zip(&g.values) {
        if simplex.height(x) >= *eps {
            sum += val;
            count += 1;
        }
    }
    Ok(sum - avg * int(count))
}
