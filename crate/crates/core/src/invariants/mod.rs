//! Expansion coefficients and the invariants built from them: Futaki
//! invariant, Chow weights, norms, the toric boundary functional, and the
//! instability and vanishing tools.

mod expansion;
mod stability;

use num_traits::{Signed, Zero};
use serde::Serialize;

pub use expansion::{
    dims_weights, ehrhart_leading, fit_expansion, fit_poly, horner, ExpansionReport, Residual, SeriesPoint,
};
pub use stability::{
    blowup_chow, chow_instability_test, stability_threshold, vanishing_witness, InstabilityReport, InstabilityRow,
    Witness, WitnessReport,
};

use crate::convexfn::ConvexPL;
use crate::error::{Error, Result};
use crate::exactgeom::{boundary_integral, integrate_pl, integrate_pl_sq, volume};
use crate::filtration::{Filtration, LevelTable, TestConfig};
use crate::rational::{int, render, to_f64, QReport, Rational};

/// `(a1 b0 - a0 b1) / a0^2`.
pub fn futaki(e: &ExpansionReport) -> Rational {
    (&e.a1 * &e.b0 - &e.a0 * &e.b1) / (&e.a0 * &e.a0)
}

/// `r b0 / a0 - w_r / d_r` at the degree `r` of the sample.
pub fn chow(e: &ExpansionReport, p: &SeriesPoint) -> Rational {
    int(p.degree as i64) * &e.b0 / &e.a0 - Rational::new(p.w.into(), p.d.into())
}

/// `c0 - b0^2 / a0`; a negative value means the fit is wrong.
pub fn norm2(e: &ExpansionReport) -> Result<Rational> {
    let v = &e.c0 - &e.b0 * &e.b0 / &e.a0;
    if v.is_negative() {
        return Err(Error::NegativeSquare(render(&v)));
    }
    Ok(v)
}

/// `∫ (G - Ḡ)^2 dμ` for a PL function on its domain.
pub fn lemma_norm2(g: &ConvexPL) -> Rational {
    let s = integrate_pl(g);
    integrate_pl_sq(g) - &s * &s / volume(g.domain())
}

/// Average of `g` over its domain.
pub fn mean(g: &ConvexPL) -> Rational {
    integrate_pl(g) / volume(g.domain())
}

/// `∫_{∂Δ} f dσ - (a1/a0) ∫_Δ f dμ` with `a0, a1` the Ehrhart coefficients of `Δ`.
pub fn donaldson_functional(f: &ConvexPL) -> Result<Rational> {
    let (a0, a1) = ehrhart_leading(f.domain())?;
    Ok(boundary_integral(f) - a1 / a0 * integrate_pl(f))
}

/// `Chow_k(χ) = k b0^(k)/a0 - w_k/d_k` with `b0^(k) = -∫G^(k)`.
pub fn filtration_chow(p_volume: &Rational, t: &LevelTable) -> Result<Rational> {
    let g = t.envelope()?;
    let b0 = -integrate_pl(&g);
    Ok(int(t.k() as i64) * b0 / p_volume - Rational::new(t.weight().into(), (t.dim() as i128).into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChowPoint {
    pub l: u32,
    pub degree: u32,
    pub chow: QReport,
}

/// Invariants of one test configuration `χ^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestConfigReport {
    pub k: u32,
    pub expansion: ExpansionReport,
    pub fut: QReport,
    pub norm2: QReport,
    pub chow: Vec<ChowPoint>,
}

/// Fits the expansion of `tc` on the given `l` values and evaluates Fut, norm and Chow weights.
pub fn testconfig_invariants(tc: &TestConfig, ls: &[u32], stride: u32) -> Result<TestConfigReport> {
    let series = dims_weights(tc, ls)?;
    let e = fit_expansion(&series, tc.polytope().dim(), stride)?;
    let chow = series
        .iter()
        .map(|p| ChowPoint {
            l: p.l,
            degree: p.degree,
            chow: chow(&e, p).into(),
        })
        .collect();
    Ok(TestConfigReport {
        k: tc.k(),
        fut: futaki(&e).into(),
        norm2: norm2(&e)?.into(),
        chow,
        expansion: e,
    })
}

/// Expansion of the filtration's own tables over the degrees `ks`.
pub fn direct_expansion(chi: &Filtration, ks: &[u32]) -> Result<ExpansionReport> {
    let series = ks
        .iter()
        .map(|&k| Ok(SeriesPoint::of_table(k, &*chi.table(k)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_expansion(&series, chi.polytope().dim(), chi.period())
}

/// Minimum, last value and least-squares slope of a sequence indexed by degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub min: QReport,
    pub last: QReport,
    pub slope: f64,
}

impl Trend {
    pub fn of(points: &[(u32, Rational)]) -> Option<Trend> {
        let min = points.iter().map(|(_, v)| v).min()?.clone();
        let last = points.last()?.1.clone();
        let n = points.len() as f64;
        let (mx, my) = points
            .iter()
            .fold((0.0, 0.0), |(a, b), (k, v)| (a + *k as f64 / n, b + to_f64(v) / n));
        let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (k, v)| {
            let dx = *k as f64 - mx;
            (a + dx * (to_f64(v) - my), b + dx * dx)
        });
        Some(Trend {
            min: min.into(),
            last: last.into(),
            slope: if den > 0.0 { num / den } else { 0.0 },
        })
    }
}

#[derive(Debug, Clone)]
pub struct InvariantOptions {
    pub ks: Vec<u32>,
    pub ls: Vec<u32>,
    pub stride: u32,
    pub tolerance: f64,
}

impl InvariantOptions {
    pub fn new(ks: Vec<u32>, n: usize) -> Self {
        InvariantOptions {
            ks,
            ls: (1..=(n as u32 + 5)).collect(),
            stride: 1,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeRow {
    pub k: u32,
    pub d: i128,
    pub w: i128,
    pub s: i128,
    /// `Fut(χ^(k))`.
    pub fut: QReport,
    /// `c0 - b0^2/a0` for `χ^(k)`.
    pub norm2: QReport,
    /// `∫(G^(k) - Ḡ^(k))^2`.
    pub norm2_lemma: QReport,
    /// `Chow_k(χ)`.
    pub chow: QReport,
    /// `N_k`, the spread of the degree-`k` levels.
    pub spread: i64,
    pub norm_inf: QReport,
    pub exact_series: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub shift: i64,
    pub period: u32,
    pub rows: Vec<DegreeRow>,
    pub fut: Trend,
    pub chow: Trend,
    pub norm2: Trend,
    pub norm_inf: Trend,
    /// `∫(G - Ḡ)^2` when `G` is known in closed form.
    pub norm2_exact: Option<QReport>,
    /// `max G - min G` when `G` is known in closed form.
    pub norm_inf_exact: Option<QReport>,
    pub donaldson: Option<QReport>,
    pub non_convergent: bool,
    pub norm_verdict: String,
}

/// Fut, Chow and norms of `χ` from the approximating test configurations `χ^(k)`.
pub fn filtration_invariants(chi: &Filtration, opts: &InvariantOptions) -> Result<InvariantReport> {
    if opts.ks.is_empty() {
        return Err(Error::Invalid("empty degree range".into()));
    }
    let vol = volume(chi.polytope());
    let mut rows = Vec::new();
    for &k in &opts.ks {
        let tc = chi.testconfig(k)?;
        let rep = testconfig_invariants(&tc, &opts.ls, opts.stride)?;
        let t = tc.base();
        let g = t.envelope()?;
        let spread = t.max_level() - t.min_level();
        rows.push(DegreeRow {
            k,
            d: t.dim() as i128,
            w: t.weight(),
            s: t.square_sum(),
            fut: rep.fut,
            norm2: rep.norm2,
            norm2_lemma: lemma_norm2(&g).into(),
            chow: filtration_chow(&vol, t)?.into(),
            spread,
            norm_inf: Rational::new(spread.into(), k.into()).into(),
            exact_series: rep.expansion.exact,
        });
    }
    let series = |f: fn(&DegreeRow) -> &QReport| -> Vec<(u32, Rational)> {
        rows.iter().map(|r| (r.k, f(r).exact.clone())).collect()
    };
    let futs = series(|r| &r.fut);
    let norms = series(|r| &r.norm2);
    let non_convergent = rows.iter().any(|r| !r.exact_series) || oscillates(&futs, opts.tolerance);
    let g = chi.transform();
    let norm2_exact = g.as_ref().map(|g| QReport::from(lemma_norm2(g)));
    Ok(InvariantReport {
        shift: chi.shift(),
        period: chi.period(),
        fut: Trend::of(&futs).expect("nonempty"),
        chow: Trend::of(&series(|r| &r.chow)).expect("nonempty"),
        norm2: Trend::of(&norms).expect("nonempty"),
        norm_inf: Trend::of(&series(|r| &r.norm_inf)).expect("nonempty"),
        norm_inf_exact: g.as_ref().map(|g| QReport::from(g.max() - g.min())),
        donaldson: g.as_ref().map(donaldson_functional).transpose()?.map(QReport::from),
        non_convergent,
        norm_verdict: norm_verdict(norm2_exact.as_ref().map(|q| &q.exact), &norms),
        norm2_exact,
        rows,
    })
}

/// Successive differences that keep alternating in sign without their amplitude
/// shrinking between the first and second half of the sequence.
fn oscillates(values: &[(u32, Rational)], tol: f64) -> bool {
    let diffs: Vec<f64> = values.windows(2).map(|w| to_f64(&(&w[1].1 - &w[0].1))).collect();
    if diffs.len() < 4 {
        return false;
    }
    let alternating = diffs
        .windows(2)
        .any(|d| d[0].abs() > tol && d[1].abs() > tol && d[0].signum() != d[1].signum());
    let half = diffs.len() / 2;
    let amp = |d: &[f64]| d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let (head, tail) = (amp(&diffs[..half]), amp(&diffs[half..]));
    alternating && tail > tol && tail >= head / 2.0
}

/// Exact when `G` is known; otherwise read off the second half of the sampled norms,
/// where a strictly decreasing tail with log-log slope at most `-1/2` counts as decay to zero.
fn norm_verdict(exact: Option<&Rational>, norms: &[(u32, Rational)]) -> String {
    if let Some(v) = exact {
        return if v.is_zero() { "zero-norm" } else { "positive-norm" }.into();
    }
    if norms.iter().all(|(_, v)| v.is_zero()) {
        return "zero-norm".into();
    }
    let tail = &norms[norms.len() / 2..];
    if tail.len() < 3 || tail.iter().any(|(_, v)| !v.is_positive()) {
        return "undetermined".into();
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|(k, v)| ((*k as f64).ln(), to_f64(v).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    let slope = if den > 0.0 { num / den } else { 0.0 };
    let decreasing = tail.windows(2).all(|w| w[1].1 < w[0].1);
    if decreasing && slope <= -0.5 {
        "zero-norm (trend)".into()
    } else if slope > -0.1 {
        "positive-norm (trend)".into()
    } else {
        "undetermined".into()
    }
}
