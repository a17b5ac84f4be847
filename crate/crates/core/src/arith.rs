//! Exact rationals, probabilities and combinatorial coefficients.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number, always kept in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `numer / denom`, reduced. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Non-negative integer power; `0^0 = 1`.
    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Rational> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Rational(BigRational::one() - &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `digits` significant digits, rounded half away
    /// from zero, computed exactly. Scientific notation, e.g. `1.25e-3`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        assert!(digits >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let numer = self.numer().abs();
        let denom = self.denom().clone();

        // Find exponent e with 10^e <= |x| < 10^(e+1).
        let ten = BigInt::from(10u32);
        let mut exp: i64 = numer.to_string().len() as i64 - denom.to_string().len() as i64;
        let ge_pow = |e: i64| -> bool {
            // |x| >= 10^e
            if e >= 0 {
                numer >= &denom * num_traits::pow(ten.clone(), e as usize)
            } else {
                &numer * num_traits::pow(ten.clone(), (-e) as usize) >= denom
            }
        };
        while !ge_pow(exp) {
            exp -= 1;
        }
        while ge_pow(exp + 1) {
            exp += 1;
        }

        // mantissa = round(|x| * 10^(digits-1-exp))
        let shift = digits as i64 - 1 - exp;
        let (mut n, mut d) = (numer, denom);
        if shift >= 0 {
            n *= num_traits::pow(ten.clone(), shift as usize);
        } else {
            d *= num_traits::pow(ten.clone(), (-shift) as usize);
        }
        let (q, r) = n.div_rem(&d);
        let mut mantissa = if r * 2 >= d { q + 1 } else { q };
        if mantissa.to_string().len() > digits {
            // Rounded up to the next power of ten.
            mantissa /= 10;
            exp += 1;
        }
        let digits_str = mantissa.to_string();
        let (head, tail) = digits_str.split_at(1);
        let sign = if negative { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

impl fmt::Display for Rational {
    /// Canonical `a/b` form; integers render as `a/1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a/b`, `-a/b`, integers and decimal literals such as `0.1`,
    /// `-2.50` or `.5`. Decimals are converted exactly.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let t = s.trim();
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let numer: BigInt = parse_int(n.trim()).ok_or_else(bad)?;
            let denom: BigInt = parse_int(d.trim()).ok_or_else(bad)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Rational::new(numer, denom));
        }
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let r = Rational::new(numer, denom);
        Ok(if negative { -r } else { r })
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('+').unwrap_or(s);
    let digits = body.strip_prefix('-').unwrap_or(body);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    body.parse().ok()
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Rational::from_integer(BigInt::from_biguint(Sign::Plus, n))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division panics on a zero divisor, like the integer types.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// A rational constrained to `[0, 1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(Rational);

impl Probability {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() || value > Rational::one() {
            return Err(Error::InvalidProbability(value.to_string()));
        }
        Ok(Probability(value))
    }

    pub fn zero() -> Self {
        Probability(Rational::zero())
    }

    pub fn one() -> Self {
        Probability(Rational::one())
    }

    /// Shorthand for tests and fixed tables. Panics when out of range.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Probability::new(Rational::new(numer, denom)).expect("probability in [0, 1]")
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn complement(&self) -> Probability {
        Probability(self.0.complement())
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Probability::new(s.parse()?)
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = Rational::deserialize(deserializer)?;
        Probability::new(r).map_err(serde::de::Error::custom)
    }
}

impl AsRef<Rational> for Probability {
    fn as_ref(&self) -> &Rational {
        &self.0
    }
}

/// Pascal-triangle memo of binomial coefficients. Rows are filled on demand
/// up to the largest `n` requested and shared behind a lock.
#[derive(Debug, Default)]
pub struct BinomialCache {
    rows: RwLock<Vec<Vec<BigUint>>>,
}

impl BinomialCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of rows currently held (largest cached `n` plus one).
    pub fn rows(&self) -> usize {
        self.rows.read().expect("binomial cache poisoned").len()
    }

    /// `C(n, k)`, zero for `k > n`.
    pub fn get(&self, n: u64, k: u64) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        let (n, k) = (n as usize, k.min(n - k) as usize);
        {
            let rows = self.rows.read().expect("binomial cache poisoned");
            if let Some(row) = rows.get(n) {
                return row[k].clone();
            }
        }
        let mut rows = self.rows.write().expect("binomial cache poisoned");
        while rows.len() <= n {
            // Rows store only the left half (k <= n/2).
            let i = rows.len();
            let row: Vec<BigUint> = if i == 0 {
                vec![BigUint::one()]
            } else {
                let prev = &rows[i - 1];
                let at = |j: usize| -> BigUint {
                    let j = j.min(i - 1 - j);
                    prev[j].clone()
                };
                (0..=i / 2)
                    .map(|j| {
                        if j == 0 {
                            BigUint::one()
                        } else {
                            at(j - 1) + at(j)
                        }
                    })
                    .collect()
            };
            rows.push(row);
        }
        rows[n][k].clone()
    }
}

fn cache() -> &'static BinomialCache {
    static CACHE: OnceLock<BinomialCache> = OnceLock::new();
    CACHE.get_or_init(BinomialCache::new)
}

/// `C(n, k)` from the shared cache; zero when `k > n`.
pub fn choose(n: u64, k: u64) -> BigUint {
    cache().get(n, k)
}

/// `C(n, k)` for signed arguments: zero when `k < 0` or `k > n`, a domain
/// error when `n < 0`.
pub fn binomial(n: i64, k: i64) -> Result<BigInt> {
    if n < 0 {
        return Err(Error::Domain(format!("binomial with negative n = {n}")));
    }
    if k < 0 || k > n {
        return Ok(BigInt::zero());
    }
    Ok(BigInt::from(choose(n as u64, k as u64)))
}

/// `(Σ parts)! / Π parts!`, built as a product of binomials.
pub fn multinomial(parts: &[i64]) -> Result<BigInt> {
    if let Some(&bad) = parts.iter().find(|&&p| p < 0) {
        return Err(Error::Domain(format!(
            "multinomial with negative part {bad}"
        )));
    }
    let parts: Vec<u64> = parts.iter().map(|&p| p as u64).collect();
    Ok(BigInt::from(multinomial_u(&parts)))
}

pub(crate) fn multinomial_u(parts: &[u64]) -> BigUint {
    let mut total = 0u64;
    let mut acc = BigUint::one();
    for &p in parts {
        total += p;
        if p > 0 {
            acc *= choose(total, p);
        }
    }
    acc
}
