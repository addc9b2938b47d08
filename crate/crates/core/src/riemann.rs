//! Lattice sums of convex functions over dilated standard simplices and
//! the lower bounds that compare them with integrals.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convexfn::ConvexPL;
use crate::error::{Error, Result};
use crate::exactgeom::{integer_points, integrate_pl, AffineForm, QPolytope};
use crate::rational::{big, int, lcm_denominators, render, serde_q, Rational};

/// One evaluation of a lattice-sum lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumBoundReport {
    pub n: usize,
    #[serde(with = "serde_q")]
    pub c: Rational,
    pub k: u32,
    #[serde(rename = "L", with = "serde_q")]
    pub lower: Rational,
    #[serde(with = "serde_q")]
    pub sum: Rational,
    /// `k^n ∫_{Δ_{c-(n-1)/k}} f`.
    #[serde(with = "serde_q")]
    pub integral_term: Rational,
    /// `k^{n-1} L (3n-1) c^{n-1} / (2 (n-1)!)`.
    #[serde(with = "serde_q")]
    pub boundary_term: Rational,
    /// `k^{n-2} C L`.
    #[serde(with = "serde_q")]
    pub correction: Rational,
    #[serde(with = "serde_q")]
    pub bound: Rational,
    #[serde(with = "serde_q")]
    pub slack: Rational,
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).map(int).fold(Rational::one(), |a, b| a * b)
}

fn pow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

fn check_kc(c: &Rational, k: u32) -> Result<BigInt> {
    let kc = c * int(k as i64);
    if !kc.is_integer() || kc.is_negative() {
        return Err(Error::NonIntegerKc(render(&kc)));
    }
    Ok(kc.to_integer())
}

fn simplex(n: usize, c: &Rational) -> Result<QPolytope> {
    QPolytope::standard_simplex(n, c)
}

fn on_simplex(f: &ConvexPL, c: &Rational) -> Result<ConvexPL> {
    ConvexPL::new(simplex(f.domain().dim(), c)?, f.pieces().to_vec())
}

fn sum_i128(f: &ConvexPL, pts: &[Vec<i64>], k: u32) -> Option<Rational> {
    // k D f(β/k) = max_i <D a_i, β> + k D c_i
    let d = lcm_denominators(f.pieces().iter().flat_map(|p| p.linear.iter().chain([&p.constant])));
    let dd = big(&d);
    let kd = int(k as i64) * &dd;
    let rows: Vec<(Vec<i128>, i128)> = f
        .pieces()
        .iter()
        .map(|p| {
            let lin = p
                .linear
                .iter()
                .map(|a| (a * &dd).to_integer().to_i128())
                .collect::<Option<_>>()?;
            Some((lin, (&p.constant * &kd).to_integer().to_i128()?))
        })
        .collect::<Option<_>>()?;
    let mut total: i128 = 0;
    for b in pts {
        let v = rows
            .iter()
            .map(|(a, c)| {
                a.iter()
                    .zip(b)
                    .try_fold(*c, |s, (x, y)| s.checked_add(x.checked_mul(*y as i128)?))
            })
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .max()?;
        total = total.checked_add(v)?;
    }
    Some(Rational::new(BigInt::from(total), kd.to_integer()))
}

/// `Σ f(α)` over `Δ_c ∩ (1/k)Z^n`, where `Δ_c = {x >= 0, Σx <= c}`.
pub fn brute_sum(f: &ConvexPL, c: &Rational, k: u32) -> Result<Rational> {
    check_kc(c, k)?;
    let n = f.domain().dim();
    let pts = integer_points(&simplex(n, c)?, k);
    if let Some(s) = sum_i128(f, &pts, k) {
        return Ok(s);
    }
    let kk = int(k as i64);
    Ok(pts
        .iter()
        .map(|b| f.value(&b.iter().map(|&x| int(x) / &kk).collect::<Vec<_>>()))
        .sum())
}

fn inner_integral(f: &ConvexPL, c: &Rational, k: u32) -> Result<Rational> {
    let n = f.domain().dim();
    let inner = c - Rational::new(BigInt::from(n as i64 - 1), BigInt::from(k));
    if !inner.is_positive() {
        return Ok(Rational::zero());
    }
    Ok(integrate_pl(&on_simplex(f, &inner)?) * pow(&int(k as i64), n as i64))
}

/// Checks `Σ_{Δ_c ∩ (1/k)Z^n} f >= k^n ∫_{Δ_{c-(n-1)/k}} f` for convex `f >= 0`.
pub fn jensen_cube_bound_check(f: &ConvexPL, c: &Rational, k: u32) -> Result<SumBoundReport> {
    convex_sum_lower_bound(f, c, k, &Rational::zero(), &Rational::zero())
}

/// The lower bound `k^n ∫_{Δ_{c-(n-1)/k}} f + k^{n-1} L (3n-1) c^{n-1} / (2(n-1)!) - k^{n-2} C L`
/// for convex `f >= L >= 0` on `Δ_c`, compared against the exact sum.
pub fn convex_sum_lower_bound(
    f: &ConvexPL,
    c: &Rational,
    k: u32,
    lower: &Rational,
    cn: &Rational,
) -> Result<SumBoundReport> {
    check_kc(c, k)?;
    if lower.is_negative() {
        return Err(Error::NegativeFunction(format!("lower bound {}", render(lower))));
    }
    let n = f.domain().dim();
    let min = on_simplex(f, c)?.min();
    if min < *lower {
        return Err(Error::NegativeFunction(format!(
            "minimum {} on the simplex is below {}",
            render(&min),
            render(lower)
        )));
    }
    let sum = brute_sum(f, c, k)?;
    let kk = int(k as i64);
    let integral_term = inner_integral(f, c, k)?;
    let boundary_term =
        pow(&kk, n as i64 - 1) * lower * int(3 * n as i64 - 1) * pow(c, n as i64 - 1) / (int(2) * factorial(n - 1));
    let correction = pow(&kk, n as i64 - 2) * cn * lower;
    let bound = &integral_term + &boundary_term - &correction;
    Ok(SumBoundReport {
        n,
        c: c.clone(),
        k,
        lower: lower.clone(),
        slack: &sum - &bound,
        sum,
        integral_term,
        boundary_term,
        correction,
        bound,
    })
}

/// Smallest `C >= 0` for which the bound holds at every `k` in `ks`.
pub fn fit_sum_constant(f: &ConvexPL, c: &Rational, ks: &[u32], lower: &Rational) -> Result<Rational> {
    let mut best = Rational::zero();
    for &k in ks {
        let r = convex_sum_lower_bound(f, c, k, lower, &Rational::zero())?;
        if r.slack.is_negative() && lower.is_positive() {
            let need = -&r.slack / (pow(&int(k as i64), r.n as i64 - 2) * lower);
            best = best.max(need);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountExpansion {
    pub n: usize,
    #[serde(with = "serde_q")]
    pub c: Rational,
    pub k: u32,
    #[serde(with = "serde_q")]
    pub count: Rational,
    /// `k^n c^n / n! + k^{n-1} (n+1) c^{n-1} / (2 (n-1)!)`.
    #[serde(with = "serde_q")]
    pub expansion: Rational,
    #[serde(with = "serde_q")]
    pub remainder: Rational,
}

/// `#(Δ_c ∩ (1/k)Z^n) = C(kc + n, n)` against its two leading terms.
pub fn simplex_count_expansion(c: &Rational, k: u32, n: usize) -> Result<CountExpansion> {
    let kc = check_kc(c, k)?;
    if n == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let mut count = Rational::one();
    for i in 1..=n as i64 {
        count = count * (big(&kc) + int(i)) / int(i);
    }
    let kk = int(k as i64);
    let n64 = n as i64;
    let expansion = pow(&kk, n64) * pow(c, n64) / factorial(n)
        + pow(&kk, n64 - 1) * int(n64 + 1) * pow(c, n64 - 1) / (int(2) * factorial(n - 1));
    Ok(CountExpansion {
        n,
        c: c.clone(),
        k,
        remainder: &count - &expansion,
        count,
        expansion,
    })
}

/// `max_k |remainder_k| / k^{n-2}` over `ks`.
pub fn count_remainder_constant(c: &Rational, n: usize, ks: &[u32]) -> Result<Rational> {
    let mut best = Rational::zero();
    for &k in ks {
        let e = simplex_count_expansion(c, k, n)?;
        best = best.max(e.remainder.abs() / pow(&int(k as i64), n as i64 - 2));
    }
    Ok(best)
}

/// `max(0, a_1, ..., a_m)` on `Δ_c` with small random integer coefficients.
pub fn random_convex(n: usize, c: &Rational, pieces: usize, rng: &mut impl Rng) -> Result<ConvexPL> {
    let mut forms = vec![AffineForm::constant(n, Rational::zero())];
    for _ in 0..pieces {
        let linear = (0..n).map(|_| int(rng.gen_range(-4..=4))).collect();
        forms.push(AffineForm::new(linear, int(rng.gen_range(-3..=3))));
    }
    ConvexPL::new(simplex(n, c)?, forms)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub trial: usize,
    #[serde(flatten)]
    pub report: SumBoundReport,
}

/// Seeded Jensen checks: `trials` random functions, dimensions cycling through `1..=max_n`,
/// each at a random `k <= kmax`.
pub fn jensen_sweep(seed: u64, trials: usize, max_n: usize, kmax: u32) -> Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Rational::one();
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let n = 1 + trial % max_n;
        let pieces = rng.gen_range(1..=4);
        let f = random_convex(n, &c, pieces, &mut rng)?;
        let k = rng.gen_range(1..=kmax);
        out.push(SweepRow {
            seed,
            trial,
            report: jensen_cube_bound_check(&f, &c, k)?,
        });
    }
    Ok(out)
}

/// CSV with columns `n,c,k,L,sum,bound,slack`.
pub fn sweep_csv(rows: &[SumBoundReport]) -> String {
    let mut s = String::from("n,c,k,L,sum,bound,slack\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            render(&r.c),
            r.k,
            render(&r.lower),
            render(&r.sum),
            render(&r.bound),
            render(&r.slack)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::pl_from_ints;
    use crate::rational::frac;

    fn tri() -> QPolytope {
        QPolytope::standard_simplex(2, &int(1)).unwrap()
    }

    #[test]
    fn point_count_sum() {
        let seg = QPolytope::standard_simplex(1, &int(1)).unwrap();
        let one = pl_from_ints(&seg, &[(&[0], 1)]).unwrap();
        assert_eq!(brute_sum(&one, &int(1), 4).unwrap(), int(5));
        assert!(matches!(brute_sum(&one, &frac(1, 3), 4), Err(Error::NonIntegerKc(_))));
    }

    #[test]
    fn six_point_sum() {
        let f = pl_from_ints(&tri(), &[(&[1, 1], 0)]).unwrap();
        // (0,0) (0,1/2) (0,1) (1/2,0) (1/2,1/2) (1,0)
        assert_eq!(brute_sum(&f, &int(1), 2).unwrap(), int(4));
    }

    #[test]
    fn jensen_constant_one() {
        let f = pl_from_ints(&tri(), &[(&[0, 0], 1)]).unwrap();
        let r = jensen_cube_bound_check(&f, &int(1), 6).unwrap();
        assert_eq!(r.sum, int(28));
        assert_eq!(r.bound, frac(25, 2));
        assert_eq!(r.slack, frac(31, 2));
        let z = pl_from_ints(&tri(), &[(&[0, 0], 0)]).unwrap();
        assert!(jensen_cube_bound_check(&z, &int(1), 6).unwrap().slack.is_zero());
        let neg = pl_from_ints(&tri(), &[(&[1, 0], -1)]).unwrap();
        assert!(matches!(
            jensen_cube_bound_check(&neg, &int(1), 6),
            Err(Error::NegativeFunction(_))
        ));
    }

    #[test]
    fn constant_function_matches_count() {
        // for f = L the bound with C = 0 is L times the two-term count expansion
        // minus an O(k^{n-2}) term
        for n in 1..=3usize {
            let p = QPolytope::standard_simplex(n, &int(1)).unwrap();
            let f = ConvexPL::constant(p, int(3));
            for k in [4u32, 9, 16] {
                let r = convex_sum_lower_bound(&f, &int(1), k, &int(3), &Rational::zero()).unwrap();
                let e = simplex_count_expansion(&int(1), k, n).unwrap();
                assert_eq!(r.sum, int(3) * &e.count);
                let top = &r.integral_term + &r.boundary_term - int(3) * &e.expansion;
                if n == 1 {
                    assert!(top.is_zero());
                }
            }
        }
    }

    #[test]
    fn count_expansions() {
        for k in 1..20 {
            assert!(simplex_count_expansion(&int(1), k, 1).unwrap().remainder.is_zero());
            assert_eq!(simplex_count_expansion(&int(1), k, 2).unwrap().remainder, int(1));
        }
        let e = simplex_count_expansion(&int(1), 10, 3).unwrap();
        assert_eq!(e.count, int(286));
        assert_eq!(e.expansion, frac(800, 3));
    }

    #[test]
    fn zero_lower_bound_is_jensen() {
        let f = pl_from_ints(&tri(), &[(&[0, 0], 0), (&[2, -1], -1)]).unwrap();
        let a = jensen_cube_bound_check(&f, &int(1), 7).unwrap();
        let b = convex_sum_lower_bound(&f, &int(1), 7, &Rational::zero(), &int(5)).unwrap();
        assert_eq!(a.bound, b.bound);
    }

    #[test]
    fn sweep_is_reproducible() {
        let a = jensen_sweep(7, 6, 3, 12).unwrap();
        let b = jensen_sweep(7, 6, 3, 12).unwrap();
        assert_eq!(
            a.iter().map(|r| r.report.clone()).collect::<Vec<_>>(),
            b.iter().map(|r| r.report.clone()).collect::<Vec<_>>()
        );
        let csv = sweep_csv(&a.iter().map(|r| r.report.clone()).collect::<Vec<_>>());
        assert_eq!(csv.lines().count(), 7);
    }
}
