//! Exact rational scalars and their `"p/q"` text form.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

/// A point or vector with rational coordinates.
pub type QVec = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn qvec(coords: &[i64]) -> QVec {
    coords.iter().map(|&c| int(c)).collect()
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((n, d)) = t.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| ParseRationalError::Invalid(s.into()))?;
        let den = BigInt::from_str(d.trim()).map_err(|_| ParseRationalError::Invalid(s.into()))?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.into()));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Invalid(s.into()));
        }
        let mut num = BigInt::from_str(&digits).map_err(|_| ParseRationalError::Invalid(s.into()))?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(Rational::new(num, den));
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|_| ParseRationalError::Invalid(s.into()))
}

/// `"p/q"` in lowest terms, or `"p"` for integers.
pub fn render(r: &Rational) -> String {
    r.to_string()
}

/// Decimal rendering with `sig` significant digits (informational only).
pub fn decimal(r: &Rational, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // scale so that the integer part has exactly `sig` digits
    let mut exp: i64 = 0;
    let ten = int(10);
    let lo = Rational::from_integer(num_traits::pow(BigInt::from(10), sig - 1));
    let hi = lo.clone() * ten.clone();
    let mut x = a;
    while x < lo {
        x *= ten.clone();
        exp -= 1;
    }
    while x >= hi {
        x /= ten.clone();
        exp += 1;
    }
    let digits = x.round().to_integer().to_string();
    let digits = if digits.len() > sig {
        exp += 1;
        digits[..sig].to_string()
    } else {
        digits
    };
    // value = digits * 10^exp
    let point = digits.len() as i64 + exp;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            out.push('0');
        }
    } else {
        let (a, b) = digits.split_at(point as usize);
        let b = b.trim_end_matches('0');
        let _ = write!(out, "{a}");
        if !b.is_empty() {
            let _ = write!(out, ".{b}");
        }
    }
    out
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn to_i64(n: &BigInt) -> Option<i64> {
    n.to_i64()
}

pub fn lcm_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub fn primitive(v: &[Rational]) -> Vec<BigInt> {
    let l = lcm_denominators(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|x| (x * big(&l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn dot_int(a: &[BigInt], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + y * big(x))
}

pub fn sub(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> QVec {
    a.iter().map(|x| x * s).collect()
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Lit {
        S(String),
        I(i64),
    }

    fn lit(l: Lit) -> Result<Rational, ParseRationalError> {
        match l {
            Lit::S(s) => parse(&s),
            Lit::I(i) => Ok(int(i)),
        }
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        lit(Lit::deserialize(d)?).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&render(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<Lit>::deserialize(d)?
                .into_iter()
                .map(|l| lit(l).map_err(de::Error::custom))
                .collect()
        }
    }

    pub mod vecvec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let strs: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(render).collect()).collect();
            serde::Serialize::serialize(&strs, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<Lit>>::deserialize(d)?
                .into_iter()
                .map(|row| row.into_iter().map(|l| lit(l).map_err(de::Error::custom)).collect())
                .collect()
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&render(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<Lit>::deserialize(d)?
                .map(|l| lit(l).map_err(de::Error::custom))
                .transpose()
        }
    }
}

/// A rational paired with a decimal rendering, used in reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct QReport {
    #[serde(with = "serde_q")]
    pub exact: Rational,
    pub decimal: String,
}

impl From<&Rational> for QReport {
    fn from(r: &Rational) -> Self {
        QReport {
            exact: r.clone(),
            decimal: decimal(r, 20),
        }
    }
}

impl From<Rational> for QReport {
    fn from(r: Rational) -> Self {
        QReport::from(&r)
    }
}
