use itertools::Itertools;
use num_traits::{One, Zero};
use serde::Serialize;

use super::laurent::LaurentMatrix;
use crate::error::{Error, Result};
use crate::rational::{serde_q, Rational};

/// Power series coefficients `c_0, c_1, ...` truncated to a fixed length.
type Series = Vec<Rational>;

fn ser_val(a: &[Rational]) -> Option<usize> {
    a.iter().position(|x| !x.is_zero())
}

fn ser_mul(a: &[Rational], b: &[Rational], w: usize) -> Series {
    let mut out = vec![Rational::zero(); w];
    for (i, x) in a.iter().enumerate().take(w) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(w - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn ser_inv(a: &[Rational], w: usize) -> Series {
    let mut out = vec![Rational::zero(); w];
    let inv0 = a[0].recip();
    out[0] = inv0.clone();
    for n in 1..w {
        let s: Rational = (1..=n.min(a.len() - 1)).map(|i| &a[i] * &out[n - i]).sum();
        out[n] = -s * &inv0;
    }
    out
}

/// Divides by `t^v`, padding the unknown top coefficients with zeros.
fn ser_div_t(a: &[Rational], v: usize) -> Series {
    let mut out: Series = a[v..].to_vec();
    out.resize(a.len(), Rational::zero());
    out
}

fn add_into(a: &mut [Rational], b: &[Rational], sign: bool) {
    for (x, y) in a.iter_mut().zip(b) {
        if sign {
            *x += y;
        } else {
            *x -= y;
        }
    }
}

/// `g(t) = L(t) t^A R(t)` with `L(0)`, `R(0)` invertible, valid modulo `t^{order+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcFactorization {
    pub size: usize,
    pub lambda: Vec<i64>,
    pub order: usize,
    #[serde(serialize_with = "ser_series_matrix")]
    pub left: Vec<Vec<Series>>,
    #[serde(serialize_with = "ser_series_matrix")]
    pub right: Vec<Vec<Series>>,
    /// Lowest power at which `g - L t^A R` is nonzero, if any up to `order`.
    pub residual_order: Option<usize>,
}

fn ser_series_matrix<S: serde::Serializer>(m: &[Vec<Series>], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(with = "serde_q::vec")] &'a Series);
    let rows: Vec<Vec<Wrap>> = m.iter().map(|r| r.iter().map(Wrap).collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

impl ArcFactorization {
    pub fn trace(&self) -> i64 {
        self.lambda.iter().sum()
    }

    pub fn r_at_zero(&self) -> Vec<Vec<Rational>> {
        self.right
            .iter()
            .map(|r| r.iter().map(|s| s[0].clone()).collect())
            .collect()
    }

    pub fn l_at_zero(&self) -> Vec<Vec<Rational>> {
        self.left
            .iter()
            .map(|r| r.iter().map(|s| s[0].clone()).collect())
            .collect()
    }
}

/// Valuation of `det g`, which is minus the pole order of `det g` at `t = 0`.
pub fn det_pole_order(g: &LaurentMatrix) -> Result<i64> {
    g.det().valuation().ok_or(Error::SingularFamily)
}

/// The exponents `λ_0 <= ... <= λ_{N}` from determinantal divisors: `δ_j` is the lowest
/// valuation of a `j x j` minor and `λ_j = δ_{j+1} - δ_j`.
pub fn invariant_exponents(g: &LaurentMatrix) -> Result<Vec<i64>> {
    let n = g.size();
    let mut delta = vec![0i64];
    for j in 1..=n {
        let mut best: Option<i64> = None;
        for rows in (0..n).combinations(j) {
            for cols in (0..n).combinations(j) {
                if let Some(v) = g.minor(&rows, &cols).valuation() {
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        delta.push(best.ok_or(Error::SingularFamily)?);
    }
    let mut lambda: Vec<i64> = delta.windows(2).map(|w| w[1] - w[0]).collect();
    lambda.sort_unstable();
    Ok(lambda)
}

/// Default truncation order `val(det g) + size + 2`.
pub fn default_order(g: &LaurentMatrix) -> Result<usize> {
    let v = det_pole_order(g)?;
    Ok((v + g.size() as i64 + 2).max(1) as usize)
}

/// Smith-style elimination over power series truncated at `t^W`, with `W` large enough
/// that the factors are exact through `t^order`.
pub fn birkhoff_factor(g: &LaurentMatrix, order: Option<usize>) -> Result<ArcFactorization> {
    let n = g.size();
    let dv = det_pole_order(g)?;
    let order = match order {
        Some(o) => o,
        None => default_order(g)?,
    };
    let p = g.min_valuation().ok_or(Error::SingularFamily)?;
    // g = t^p g' with g' holomorphic; its exponents are at most val det g'
    let dvp = (dv - n as i64 * p) as usize;
    let w = order + 1 + dvp;
    let mut m: Vec<Vec<Series>> = g
        .entries()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| (0..w as i64).map(|e| x.coeff(e + p)).collect())
                .collect()
        })
        .collect();
    let unit = |i: usize, j: usize| -> Series {
        let mut s = vec![Rational::zero(); w];
        if i == j {
            s[0] = Rational::one();
        }
        s
    };
    let mut left: Vec<Vec<Series>> = (0..n).map(|i| (0..n).map(|j| unit(i, j)).collect()).collect();
    let mut right = left.clone();
    let mut mu = Vec::with_capacity(n);
    let mut units = Vec::with_capacity(n);
    for s in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for r in s..n {
            for c in s..n {
                if let Some(v) = ser_val(&m[r][c]) {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, r, c));
                    }
                }
            }
        }
        let Some((v, r, c)) = best else {
            return Err(Error::TruncationTooSmall {
                order,
                reason: format!("remaining block vanishes modulo t^{w} at step {s}"),
            });
        };
        m.swap(r, s);
        for row in left.iter_mut() {
            row.swap(r, s);
        }
        for row in m.iter_mut() {
            row.swap(c, s);
        }
        right.swap(c, s);
        let u = ser_div_t(&m[s][s], v);
        let uinv = ser_inv(&u, w);
        for r in s + 1..n {
            if ser_val(&m[r][s]).is_none() {
                continue;
            }
            let q = ser_mul(&ser_div_t(&m[r][s], v), &uinv, w);
            for j in s..n {
                let d = ser_mul(&q, &m[s][j], w);
                add_into(&mut m[r][j], &d, false);
            }
            for row in left.iter_mut() {
                let d = ser_mul(&row[r], &q, w);
                add_into(&mut row[s], &d, true);
            }
        }
        for c in s + 1..n {
            if ser_val(&m[s][c]).is_none() {
                continue;
            }
            let q = ser_mul(&ser_div_t(&m[s][c], v), &uinv, w);
            m[s][c] = vec![Rational::zero(); w];
            for j in 0..n {
                let d = ser_mul(&q, &right[c][j], w);
                add_into(&mut right[s][j], &d, true);
            }
        }
        mu.push(v);
        units.push(u);
    }
    for (s, u) in units.iter().enumerate() {
        for j in 0..n {
            right[s][j] = ser_mul(u, &right[s][j], w);
        }
    }
    let keep = order + 1;
    for x in left.iter_mut().chain(right.iter_mut()).flatten() {
        x.truncate(keep);
    }
    let lambda: Vec<i64> = mu.iter().map(|&v| v as i64 + p).collect();
    let residual_order = residual(g, &left, &right, &lambda, keep);
    Ok(ArcFactorization {
        size: n,
        lambda,
        order,
        left,
        right,
        residual_order,
    })
}

/// First power `< p + keep` where `g` and `L t^A R` differ, counted from `t^p`.
fn residual(
    g: &LaurentMatrix,
    left: &[Vec<Series>],
    right: &[Vec<Series>],
    lambda: &[i64],
    keep: usize,
) -> Option<usize> {
    let n = g.size();
    let p = *lambda.iter().min().expect("nonempty");
    let mut first: Option<usize> = None;
    for i in 0..n {
        for j in 0..n {
            let mut acc = vec![Rational::zero(); keep];
            for (k, &lam) in lambda.iter().enumerate() {
                let shift = (lam - p) as usize;
                if shift >= keep {
                    continue;
                }
                let prod = ser_mul(&left[i][k], &right[k][j], keep - shift);
                for (e, x) in prod.into_iter().enumerate() {
                    acc[e + shift] += x;
                }
            }
            for (e, x) in acc.iter().enumerate() {
                if *x != g.get(i, j).coeff(e as i64 + p) {
                    first = Some(first.map_or(e, |f| f.min(e)));
                    break;
                }
            }
        }
    }
    first
}
