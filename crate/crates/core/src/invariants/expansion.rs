use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactgeom::integer_points;
use crate::exactgeom::linalg::solve;
use crate::exactgeom::QPolytope;
use crate::filtration::{LevelTable, TestConfig};
use crate::rational::{big, int, serde_q, Rational};

/// One sample of the dimension and weight series at degree `degree = k·l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesPoint {
    pub l: u32,
    pub degree: u32,
    pub d: i128,
    pub w: i128,
    pub s: i128,
}

impl SeriesPoint {
    pub fn of_table(l: u32, t: &LevelTable) -> Self {
        SeriesPoint {
            l,
            degree: t.k(),
            d: t.dim() as i128,
            w: t.weight(),
            s: t.square_sum(),
        }
    }
}

/// `d_{kl}`, `w_{kl}` and `Tr(A_{kl}^2)` of a test configuration for each `l`.
pub fn dims_weights(tc: &TestConfig, ls: &[u32]) -> Result<Vec<SeriesPoint>> {
    ls.iter()
        .map(|&l| Ok(SeriesPoint::of_table(l, &*tc.extension(l)?)))
        .collect()
}

/// Exact polynomial through the last `deg + 1` samples, with residuals at the others.
pub fn fit_poly(xs: &[Rational], ys: &[Rational], deg: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let n = xs.len();
    if n < deg + 1 {
        return Err(Error::InsufficientSamples {
            needed: deg + 1,
            got: n,
        });
    }
    let rows: Vec<Vec<Rational>> = xs[n - deg - 1..]
        .iter()
        .map(|x| {
            let mut p = Rational::one();
            (0..=deg)
                .map(|_| {
                    let v = p.clone();
                    p *= x;
                    v
                })
                .collect()
        })
        .collect();
    let coeffs = solve(&rows, &ys[n - deg - 1..]).ok_or_else(|| Error::Invalid("repeated sample abscissae".into()))?;
    let residuals = xs[..n - deg - 1]
        .iter()
        .zip(ys)
        .map(|(x, y)| y - horner(&coeffs, x))
        .collect();
    Ok((coeffs, residuals))
}

pub fn horner(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Leading expansion coefficients of `d`, `w` and `Tr(A^2)` as polynomials in the degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    #[serde(with = "serde_q")]
    pub a0: Rational,
    #[serde(with = "serde_q")]
    pub a1: Rational,
    #[serde(with = "serde_q")]
    pub b0: Rational,
    #[serde(with = "serde_q")]
    pub b1: Rational,
    #[serde(with = "serde_q")]
    pub c0: Rational,
    pub stride: u32,
    pub series: Vec<SeriesPoint>,
    /// Whether the `w` and `s` samples not used for fitting lie on the fitted polynomials.
    pub exact: bool,
    pub residuals: Vec<Residual>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub series: &'static str,
    pub l: u32,
    #[serde(with = "serde_q")]
    pub value: Rational,
}

fn q(x: i128) -> Rational {
    big(&BigInt::from(x))
}

/// Fits `d = a0 m^n + a1 m^(n-1) + …`, `w = b0 m^(n+1) + b1 m^n + …` and
/// `s = c0 m^(n+2) + …` in the degree `m`, separately on each residue class
/// of `l` modulo `stride`.
pub fn fit_expansion(series: &[SeriesPoint], n: usize, stride: u32) -> Result<ExpansionReport> {
    let stride = stride.max(1);
    let mut classes: BTreeMap<u32, Vec<&SeriesPoint>> = BTreeMap::new();
    for p in series {
        classes.entry(p.l % stride).or_default().push(p);
    }
    if classes.len() < stride as usize {
        return Err(Error::InsufficientSamples { needed: n + 3, got: 0 });
    }
    let mut fits = Vec::new();
    let mut residuals = Vec::new();
    for pts in classes.values() {
        if pts.len() < n + 3 {
            return Err(Error::InsufficientSamples {
                needed: n + 3,
                got: pts.len(),
            });
        }
        let xs: Vec<Rational> = pts.iter().map(|p| int(p.degree as i64)).collect();
        let col = |f: fn(&SeriesPoint) -> i128| pts.iter().map(|p| q(f(p))).collect::<Vec<_>>();
        let (d, rd) = fit_poly(&xs, &col(|p| p.d), n)?;
        if rd.iter().any(|r| !r.is_zero()) {
            return Err(Error::ResidualNonZero { series: "d" });
        }
        let (w, rw) = fit_poly(&xs, &col(|p| p.w), n + 1)?;
        let (s, rs) = fit_poly(&xs, &col(|p| p.s), n + 2)?;
        for (name, rs) in [("w", rw), ("s", rs)] {
            for (p, r) in pts.iter().zip(rs) {
                if !r.is_zero() {
                    residuals.push(Residual {
                        series: name,
                        l: p.l,
                        value: r,
                    });
                }
            }
        }
        fits.push((d, w, s));
    }
    let (d0, w0, s0) = &fits[0];
    for (d, w, s) in &fits[1..] {
        if d[n] != d0[n] {
            return Err(Error::PeriodMismatch { coefficient: "a0" });
        }
        if w[n + 1] != w0[n + 1] {
            return Err(Error::PeriodMismatch { coefficient: "b0" });
        }
        if s[n + 2] != s0[n + 2] {
            return Err(Error::PeriodMismatch { coefficient: "c0" });
        }
    }
    let a1 = if n >= 1 { d0[n - 1].clone() } else { Rational::zero() };
    Ok(ExpansionReport {
        a0: d0[n].clone(),
        a1,
        b0: w0[n + 1].clone(),
        b1: w0[n].clone(),
        c0: s0[n + 2].clone(),
        stride,
        series: series.to_vec(),
        exact: residuals.is_empty(),
        residuals,
    })
}

/// `(a0, a1)` of the Ehrhart quasi-polynomial of `Δ`, read on multiples of its denominator.
pub fn ehrhart_leading(p: &QPolytope) -> Result<(Rational, Rational)> {
    let n = p.dim();
    let den: u32 = num_traits::ToPrimitive::to_u32(&p.denominator()).expect("denominator fits in u32");
    let ks: Vec<u32> = (1..=(n as u32 + 2)).map(|j| j * den).collect();
    let xs: Vec<Rational> = ks.iter().map(|&k| int(k as i64)).collect();
    let ys: Vec<Rational> = ks.iter().map(|&k| int(integer_points(p, k).len() as i64)).collect();
    let (c, r) = fit_poly(&xs, &ys, n)?;
    if r.iter().any(|x| !x.is_zero()) {
        return Err(Error::ResidualNonZero { series: "d" });
    }
    let a1 = if n >= 1 { c[n - 1].clone() } else { Rational::zero() };
    Ok((c[n].clone(), a1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn pt(l: u32, d: i128, w: i128, s: i128) -> SeriesPoint {
        SeriesPoint { l, degree: l, d, w, s }
    }

    #[test]
    fn segment_linear_levels() {
        // levels l + β on [0, l]
        let series: Vec<SeriesPoint> = (1..=6i128)
            .map(|l| {
                let w = -(0..=l).map(|b| l + b).sum::<i128>();
                let s = (0..=l).map(|b| (l + b) * (l + b)).sum::<i128>();
                pt(l as u32, l + 1, w, s)
            })
            .collect();
        let r = fit_expansion(&series, 1, 1).unwrap();
        assert_eq!((r.a0.clone(), r.a1.clone()), (int(1), int(1)));
        assert_eq!((r.b0.clone(), r.b1.clone()), (frac(-3, 2), frac(-3, 2)));
        assert!(r.exact);
    }

    #[test]
    fn parity_split_accepted() {
        let series: Vec<SeriesPoint> = (1..=10i128)
            .map(|k| {
                let w = -(0..=k).map(|a| (2 * a - k).max(0)).sum::<i128>();
                let s = (0..=k).map(|a| (2 * a - k).max(0).pow(2)).sum::<i128>();
                pt(k as u32, k + 1, w, s)
            })
            .collect();
        let r = fit_expansion(&series, 1, 2).unwrap();
        assert_eq!(r.b0, frac(-1, 4));
        assert_eq!(r.b1, frac(-1, 2));
        assert!(matches!(fit_expansion(&series, 1, 1), Ok(ref r) if !r.exact) || fit_expansion(&series, 1, 1).is_err());
    }

    #[test]
    fn too_few_samples() {
        let series: Vec<SeriesPoint> = (1..=3).map(|l| pt(l, 1, 1, 1)).collect();
        assert_eq!(
            fit_expansion(&series, 1, 1).unwrap_err(),
            Error::InsufficientSamples { needed: 4, got: 3 }
        );
    }

    #[test]
    fn ehrhart_of_simplex() {
        let p = QPolytope::standard_simplex(2, &int(1)).unwrap();
        assert_eq!(ehrhart_leading(&p).unwrap(), (frac(1, 2), frac(3, 2)));
        let half = QPolytope::standard_simplex(1, &frac(1, 2)).unwrap();
        assert_eq!(ehrhart_leading(&half).unwrap(), (frac(1, 2), int(1)));
    }
}
