//! Truncated arithmetic in the universal Novikov ring.
//!
//! An element is a finite sum `Σ c_i T^{λ_i}` with exact rational coefficients
//! and exact rational exponents, known modulo `T^cutoff`. Every binary operation
//! computes the largest cutoff at which its result is still exact, so digits
//! beyond the proven precision are never reported.
//!
//! Elements with negative exponents live in the field of fractions; the ring of
//! elements with nonnegative valuation is closed under all operations here.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NovikovError {
    #[error("not invertible: zero element (modulo T^{cutoff})")]
    NotInvertible { cutoff: Exponent },
    #[error("exp undefined: argument has valuation {valuation}, need > 0")]
    ExpUndefined { valuation: Valuation },
    #[error("no rational square root: leading coefficient {coefficient}")]
    NotASquare { coefficient: BigRational },
    #[error("cannot extend precision: requested cutoff {requested} exceeds {cutoff}")]
    CannotExtendPrecision { requested: Exponent, cutoff: Exponent },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Exact rational exponent of the formal parameter `T`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Exponent(BigRational);

impl Exponent {
    pub fn new(value: BigRational) -> Self {
        Exponent(value)
    }

    pub fn integer(n: i64) -> Self {
        Exponent(BigRational::from_integer(n.into()))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Exponent(BigRational::new(numer.into(), denom.into()))
    }

    pub fn zero() -> Self {
        Exponent(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn scale(&self, factor: &BigRational) -> Exponent {
        Exponent(&self.0 * factor)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        Exponent(&self.0 + &rhs.0)
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        Exponent(&self.0 - &rhs.0)
    }
}

impl Neg for &Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-&self.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Exponent {
    type Err = NovikovError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Exponent)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Valuation of a Novikov element; the zero element has valuation `Infinity`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Valuation {
    Finite(Exponent),
    Infinity,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Exponent> {
        match self {
            Valuation::Finite(e) => Some(e),
            Valuation::Infinity => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Valuation::Finite(e) => e.is_positive(),
            Valuation::Infinity => true,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinity, Valuation::Infinity) => Ordering::Equal,
            (Valuation::Infinity, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Finite(_), Valuation::Infinity) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(e) => write!(f, "{e}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

/// A truncated Novikov series `Σ c_i T^{λ_i} + O(T^cutoff)`.
///
/// Storage is canonical: exponents strictly increasing, all below the cutoff,
/// no zero coefficients. Structural equality is therefore equality of
/// elements (including the declared precision); use [`NovikovScalar::eq_mod`]
/// to compare at the common precision.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NovikovScalar {
    terms: Vec<(Exponent, BigRational)>,
    cutoff: Exponent,
}

impl NovikovScalar {
    pub fn zero(cutoff: Exponent) -> Self {
        NovikovScalar { terms: Vec::new(), cutoff }
    }

    pub fn one(cutoff: Exponent) -> Self {
        Self::constant(BigRational::one(), cutoff)
    }

    pub fn constant(c: BigRational, cutoff: Exponent) -> Self {
        Self::monomial(c, Exponent::zero(), cutoff)
    }

    pub fn monomial(c: BigRational, exponent: Exponent, cutoff: Exponent) -> Self {
        Self::from_terms([(exponent, c)], cutoff)
    }

    /// `T^exponent` with unit coefficient.
    pub fn t_power(exponent: Exponent, cutoff: Exponent) -> Self {
        Self::monomial(BigRational::one(), exponent, cutoff)
    }

    /// Builds an element from arbitrary `(exponent, coefficient)` pairs; repeated
    /// exponents are summed, zero coefficients and exponents `>= cutoff` dropped.
    pub fn from_terms<I>(terms: I, cutoff: Exponent) -> Self
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let mut map = std::collections::BTreeMap::<Exponent, BigRational>::new();
        for (e, c) in terms {
            if e >= cutoff {
                continue;
            }
            *map.entry(e).or_insert_with(BigRational::zero) += c;
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        NovikovScalar { terms, cutoff }
    }

    pub fn terms(&self) -> &[(Exponent, BigRational)] {
        &self.terms
    }

    pub fn cutoff(&self) -> &Exponent {
        &self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match self.terms.first() {
            Some((e, _)) => Valuation::Finite(e.clone()),
            None => Valuation::Infinity,
        }
    }

    pub fn leading_term(&self) -> Option<&(Exponent, BigRational)> {
        self.terms.first()
    }

    pub fn coefficient(&self, exponent: &Exponent) -> BigRational {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(exponent))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c * factor)), self.cutoff.clone())
    }

    /// Multiplies by the exact monomial `T^shift`; the cutoff moves with it.
    pub fn shift(&self, shift: &Exponent) -> Self {
        NovikovScalar {
            terms: self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect(),
            cutoff: &self.cutoff + shift,
        }
    }

    pub fn truncate(&self, cutoff: &Exponent) -> Result<Self, NovikovError> {
        if *cutoff > self.cutoff {
            return Err(NovikovError::CannotExtendPrecision { requested: cutoff.clone(), cutoff: self.cutoff.clone() });
        }
        Ok(self.truncate_unchecked(cutoff))
    }

    fn truncate_unchecked(&self, cutoff: &Exponent) -> Self {
        NovikovScalar {
            terms: self.terms.iter().filter(|(e, _)| e < cutoff).cloned().collect(),
            cutoff: cutoff.clone(),
        }
    }

    /// Equality modulo the smaller of the two cutoffs.
    pub fn eq_mod(&self, other: &Self) -> bool {
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        self.truncate_unchecked(&cutoff) == other.truncate_unchecked(&cutoff)
    }

    /// True when the element vanishes modulo its own cutoff.
    pub fn is_zero_mod(&self) -> bool {
        self.is_zero()
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        // x = x0 + O(T^cx), y = y0 + O(T^cy):
        // xy = x0 y0 + O(T^{min(cx + v(y0), cy + v(x0), cx + cy)})
        let mut cutoff = &self.cutoff + &other.cutoff;
        if let Valuation::Finite(vy) = other.valuation() {
            cutoff = cutoff.min(&self.cutoff + &vy);
        }
        if let Valuation::Finite(vx) = self.valuation() {
            cutoff = cutoff.min(&other.cutoff + &vx);
        }
        let mut products = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if e < cutoff {
                    products.push((e, ca * cb));
                }
            }
        }
        Self::from_terms(products, cutoff)
    }

    pub fn pow(&self, n: i64) -> Result<Self, NovikovError> {
        let base = if n < 0 { self.invert()? } else { self.clone() };
        let mut result = Self::one(base.cutoff.clone());
        if n == 0 {
            return Ok(result);
        }
        let mut sq = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_ref(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        Ok(result)
    }

    /// Splits `x = c T^λ (1 + u)` with `v(u) > 0`; `u` is known modulo `T^{cutoff - λ}`.
    fn normalize_leading(&self) -> Option<(Exponent, BigRational, NovikovScalar)> {
        let (lambda, c0) = self.leading_term()?.clone();
        let inv_c0 = c0.recip();
        let mut u = self.shift(&-&lambda).scale(&inv_c0);
        u.terms.remove(0);
        Some((lambda, c0, u))
    }

    /// Multiplicative inverse. The normalized factor `1 + u` is inverted by the
    /// iteration `x <- x (2 - (1 + u) x)`, which doubles the valuation of the error.
    pub fn invert(&self) -> Result<Self, NovikovError> {
        let (lambda, c0, u) =
            self.normalize_leading().ok_or_else(|| NovikovError::NotInvertible { cutoff: self.cutoff.clone() })?;
        let cutoff = u.cutoff.clone();
        let mut x = Self::one(cutoff.clone());
        if let Valuation::Finite(mu) = u.valuation() {
            let one_plus_u = &Self::one(cutoff.clone()) + &u;
            // x is correct modulo T^accurate; each round doubles that
            let mut accurate = mu;
            while accurate < cutoff {
                let next = (&accurate + &accurate).min(cutoff.clone());
                let a = one_plus_u.truncate_unchecked(&next);
                let two = Self::constant(BigRational::from_integer(2.into()), next.clone());
                // the iterate is an exact finite sum, so it can be re-anchored at `next`
                x = Self::from_terms(x.terms.iter().cloned(), next.clone());
                let ax = a.mul_ref(&x).truncate_unchecked(&next);
                x = x.mul_ref(&(&two - &ax)).truncate_unchecked(&next);
                accurate = next;
            }
        }
        Ok(x.scale(&c0.recip()).shift(&-&lambda))
    }

    pub fn exp(&self) -> Result<Self, NovikovError> {
        let v = self.valuation();
        if !v.is_positive() {
            return Err(NovikovError::ExpUndefined { valuation: v });
        }
        let mut sum = Self::one(self.cutoff.clone());
        let mut term = Self::one(self.cutoff.clone());
        let mut n: i64 = 1;
        loop {
            term = term
                .mul_ref(self)
                .scale(&BigRational::new(BigInt::one(), BigInt::from(n)))
                .truncate_unchecked(&self.cutoff);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            n += 1;
        }
        Ok(sum)
    }

    /// Principal square root (positive leading coefficient) via the binomial series.
    pub fn sqrt(&self) -> Result<Self, NovikovError> {
        let Some((lambda, c0, u)) = self.normalize_leading() else {
            let half = BigRational::new(1.into(), 2.into());
            return Ok(Self::zero(self.cutoff.scale(&half)));
        };
        let root_c0 = rational_sqrt(&c0).ok_or(NovikovError::NotASquare { coefficient: c0 })?;
        let half = BigRational::new(1.into(), 2.into());
        let mut sum = Self::one(u.cutoff.clone());
        let mut power = Self::one(u.cutoff.clone());
        let mut binom = BigRational::one();
        let mut n: i64 = 0;
        loop {
            // binom(1/2, n+1) = binom(1/2, n) * (1/2 - n) / (n + 1)
            binom = binom * (&half - BigRational::from_integer(n.into())) / BigRational::from_integer((n + 1).into());
            n += 1;
            power = power.mul_ref(&u).truncate_unchecked(&u.cutoff);
            if power.is_zero() {
                break;
            }
            sum = &sum + &power.scale(&binom);
        }
        Ok(sum.scale(&root_c0).shift(&lambda.scale(&half)))
    }

    /// Numerical value at a real `T > 0` (truncated sum only).
    pub fn evaluate_at(&self, t: f64) -> f64 {
        self.terms.iter().map(|(e, c)| rational_to_f64(c) * t.powf(e.to_f64())).sum()
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational, NovikovError> {
    let s = s.trim();
    let parse_int = |t: &str| t.parse::<BigInt>().map_err(|_| NovikovError::Parse(format!("invalid rational '{s}'")));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(NovikovError::Parse(format!("zero denominator in '{s}'")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

impl Add for &NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: &NovikovScalar) -> NovikovScalar {
        let cutoff = self.cutoff.clone().min(rhs.cutoff.clone());
        NovikovScalar::from_terms(self.terms.iter().chain(rhs.terms.iter()).cloned(), cutoff)
    }
}

impl Sub for &NovikovScalar {
    type Output = NovikovScalar;
    fn sub(self, rhs: &NovikovScalar) -> NovikovScalar {
        self + &(-rhs)
    }
}

impl Neg for &NovikovScalar {
    type Output = NovikovScalar;
    fn neg(self) -> NovikovScalar {
        NovikovScalar { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(), cutoff: self.cutoff.clone() }
    }
}

impl Mul for &NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: &NovikovScalar) -> NovikovScalar {
        self.mul_ref(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for NovikovScalar {
            type Output = NovikovScalar;
            fn $m(self, rhs: NovikovScalar) -> NovikovScalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for NovikovScalar {
    type Output = NovikovScalar;
    fn neg(self) -> NovikovScalar {
        -&self
    }
}

/// Text form: `c*T^(e)` terms joined by ` + ` / ` - `, closed by ` + O(T^(cutoff))`.
/// The zero element prints as just `O(T^(cutoff))`.
impl fmt::Display for NovikovScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{c}*T^({e})")?;
            } else if c.is_negative() {
                write!(f, " - {}*T^({e})", -c)?;
            } else {
                write!(f, " + {c}*T^({e})")?;
            }
        }
        if !self.terms.is_empty() {
            write!(f, " + ")?;
        }
        write!(f, "O(T^({}))", self.cutoff)
    }
}

fn parse_term(token: &str, negate: bool) -> Result<(Exponent, BigRational), NovikovError> {
    let (coeff, rest) =
        token.split_once("*T^(").ok_or_else(|| NovikovError::Parse(format!("expected 'c*T^(e)', got '{token}'")))?;
    let exp = rest.strip_suffix(')').ok_or_else(|| NovikovError::Parse(format!("unclosed exponent in '{token}'")))?;
    let mut c = parse_rational(coeff)?;
    if negate {
        c = -c;
    }
    Ok((exp.parse()?, c))
}

impl FromStr for NovikovScalar {
    type Err = NovikovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let (last, body) = tokens.split_last().ok_or_else(|| NovikovError::Parse("empty input".into()))?;
        let cutoff: Exponent = last
            .strip_prefix("O(T^(")
            .and_then(|r| r.strip_suffix("))"))
            .ok_or_else(|| NovikovError::Parse(format!("expected 'O(T^(e))', got '{last}'")))?
            .parse()?;
        let mut terms = Vec::new();
        let mut iter = body.iter();
        if let Some(first) = iter.next() {
            terms.push(parse_term(first, false)?);
            let mut pending: Vec<&str> = iter.copied().collect();
            // Remaining tokens come in (op, term) pairs, plus the trailing op before O(..).
            if pending.last().map(|t| *t == "+") != Some(true) {
                return Err(NovikovError::Parse("missing ' + O(T^(e))' tail".into()));
            }
            pending.pop();
            for pair in pending.chunks(2) {
                match pair {
                    ["+", t] => terms.push(parse_term(t, false)?),
                    ["-", t] => terms.push(parse_term(t, true)?),
                    _ => return Err(NovikovError::Parse(format!("unexpected tokens {pair:?}"))),
                }
            }
        }
        for w in terms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(NovikovError::Parse("exponents must be strictly increasing".into()));
            }
        }
        if terms.iter().any(|(e, c)| c.is_zero() || *e >= cutoff) {
            return Err(NovikovError::Parse("zero coefficient or exponent beyond cutoff".into()));
        }
        Ok(NovikovScalar { terms, cutoff })
    }
}

impl Serialize for NovikovScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NovikovScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn e(n: i64, d: i64) -> Exponent {
        Exponent::ratio(n, d)
    }

    fn poly(terms: &[(i64, i64, i64, i64)], cutoff: Exponent) -> NovikovScalar {
        NovikovScalar::from_terms(terms.iter().map(|&(c, cd, x, xd)| (e(x, xd), q(c, cd))), cutoff)
    }

    #[test]
    fn valuation_examples() {
        let a = NovikovScalar::t_power(e(1, 4), e(3, 1));
        assert_eq!(a.valuation(), Valuation::Finite(e(1, 4)));
        assert_eq!(NovikovScalar::zero(e(3, 1)).valuation(), Valuation::Infinity);
        let x = poly(&[(3, 1, 0, 1), (2, 1, 1, 2)], e(3, 1));
        assert_eq!(x.valuation(), Valuation::Finite(e(0, 1)));
    }

    #[test]
    fn add_examples() {
        let c = e(3, 1);
        let x = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], c.clone());
        let y = NovikovScalar::constant(q(-1, 1), c.clone());
        assert_eq!(&x + &y, NovikovScalar::t_power(e(1, 1), c.clone()));
        assert_eq!(&x + &NovikovScalar::zero(c.clone()), x);
        let h = NovikovScalar::t_power(e(1, 2), c.clone());
        assert_eq!(&h + &h, NovikovScalar::monomial(q(2, 1), e(1, 2), c));
    }

    #[test]
    fn add_takes_smaller_cutoff() {
        let x = NovikovScalar::t_power(e(2, 1), e(3, 1));
        let y = NovikovScalar::one(e(3, 2));
        let s = &x + &y;
        assert_eq!(s.cutoff(), &e(3, 2));
        assert_eq!(s, NovikovScalar::one(e(3, 2)));
    }

    #[test]
    fn mul_examples() {
        let c = e(3, 1);
        let x = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], c.clone());
        let y = poly(&[(1, 1, 0, 1), (-1, 1, 1, 1)], c.clone());
        assert_eq!(&x * &y, poly(&[(1, 1, 0, 1), (-1, 1, 2, 1)], c.clone()));
        let h = NovikovScalar::t_power(e(1, 2), c.clone());
        let p = &h * &h;
        assert_eq!(p.terms(), NovikovScalar::t_power(e(1, 1), c.clone()).terms());
        assert!(p.eq_mod(&NovikovScalar::t_power(e(1, 1), c.clone())));
        assert_eq!(&x * &NovikovScalar::one(c), x);
    }

    #[test]
    fn mul_cutoff_tracks_negative_valuation() {
        // T^{-1} known mod T^3 times (1 + T) known mod T^3 is known mod T^2.
        let a = NovikovScalar::t_power(e(-1, 1), e(3, 1));
        let b = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], e(3, 1));
        let p = &a * &b;
        assert_eq!(p.cutoff(), &e(2, 1));
        assert_eq!(p, poly(&[(1, 1, -1, 1), (1, 1, 0, 1)], e(2, 1)));
    }

    #[test]
    fn invert_examples() {
        let c = e(3, 1);
        let x = poly(&[(1, 1, 0, 1), (-1, 1, 1, 1)], c.clone());
        assert_eq!(x.invert().unwrap(), poly(&[(1, 1, 0, 1), (1, 1, 1, 1), (1, 1, 2, 1)], c.clone()));
        let t = NovikovScalar::t_power(e(1, 1), c.clone());
        assert_eq!(t.invert().unwrap(), NovikovScalar::t_power(e(-1, 1), e(1, 1)));
        let two = NovikovScalar::constant(q(2, 1), c.clone());
        assert_eq!(two.invert().unwrap(), NovikovScalar::constant(q(1, 2), c.clone()));
        assert!(matches!(NovikovScalar::zero(c).invert(), Err(NovikovError::NotInvertible { .. })));
    }

    #[test]
    fn exp_of_bulk_parameter_matches_direct_series() {
        // a = T^{1/4} at cutoff 2: sum_{n=0}^{7} T^{n/4} / n!
        let a = NovikovScalar::t_power(e(1, 4), e(2, 1));
        let mut factorial = 1i64;
        let mut expected = Vec::new();
        for n in 0..8 {
            if n > 0 {
                factorial *= n;
            }
            expected.push((e(n, 4), q(1, factorial)));
        }
        assert_eq!(a.exp().unwrap(), NovikovScalar::from_terms(expected, e(2, 1)));
        assert_eq!(a.exp().unwrap().terms().len(), 8);
    }

    #[test]
    fn exp_identities_and_errors() {
        let c = e(3, 1);
        assert_eq!(NovikovScalar::zero(c.clone()).exp().unwrap(), NovikovScalar::one(c.clone()));
        let a = NovikovScalar::t_power(e(1, 4), c.clone());
        let prod = &a.exp().unwrap() * &(-&a).exp().unwrap();
        assert_eq!(prod, NovikovScalar::one(c.clone()));
        assert!(matches!(NovikovScalar::one(c.clone()).exp(), Err(NovikovError::ExpUndefined { .. })));
        assert!(NovikovScalar::t_power(e(-1, 2), c).exp().is_err());
    }

    #[test]
    fn sqrt_examples() {
        let c = e(3, 1);
        let t = NovikovScalar::t_power(e(1, 1), c.clone());
        assert_eq!(t.sqrt().unwrap(), NovikovScalar::t_power(e(1, 2), e(5, 2)));
        let four = NovikovScalar::constant(q(4, 1), c.clone());
        assert_eq!(four.sqrt().unwrap(), NovikovScalar::constant(q(2, 1), c.clone()));

        // sqrt(e^{-a} T) = e^{-a/2} T^{1/2}; check by squaring.
        let a = NovikovScalar::t_power(e(1, 4), c.clone());
        let target = &(-&a).exp().unwrap() * &t;
        let root = target.sqrt().unwrap();
        assert!((&root * &root).eq_mod(&target));
        let half_a = a.scale(&q(-1, 2));
        let expected = half_a.exp().unwrap().shift(&e(1, 2));
        assert!(root.eq_mod(&expected));
        assert!(root.leading_term().unwrap().1.is_positive());

        assert!(matches!(NovikovScalar::constant(q(2, 1), c.clone()).sqrt(), Err(NovikovError::NotASquare { .. })));
        assert!(NovikovScalar::constant(q(-4, 1), c).sqrt().is_err());
    }

    #[test]
    fn truncate_examples() {
        let x = poly(&[(1, 1, 0, 1), (1, 1, 1, 1), (1, 1, 2, 1)], e(3, 1));
        assert_eq!(x.truncate(&e(3, 2)).unwrap(), poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], e(3, 2)));
        assert_eq!(x.truncate(&e(3, 1)).unwrap(), x);
        let t2 = NovikovScalar::t_power(e(2, 1), e(3, 1));
        assert_eq!(t2.truncate(&e(1, 1)).unwrap(), NovikovScalar::zero(e(1, 1)));
        assert!(matches!(x.truncate(&e(4, 1)), Err(NovikovError::CannotExtendPrecision { .. })));
    }

    #[test]
    fn text_form() {
        let x = poly(&[(1, 4, -1, 1), (-1, 2, 1, 2), (3, 1, 2, 1)], e(3, 1));
        let s = x.to_string();
        assert_eq!(s, "1/4*T^(-1) - 1/2*T^(1/2) + 3*T^(2) + O(T^(3))");
        assert_eq!(s.parse::<NovikovScalar>().unwrap(), x);
        let z = NovikovScalar::zero(e(5, 2));
        assert_eq!(z.to_string(), "O(T^(5/2))");
        assert_eq!("O(T^(5/2))".parse::<NovikovScalar>().unwrap(), z);
        let neg = "-2*T^(0) + O(T^(1))".parse::<NovikovScalar>().unwrap();
        assert_eq!(neg, NovikovScalar::constant(q(-2, 1), e(1, 1)));
        assert!("1*T^(1) + 1*T^(0) + O(T^(3))".parse::<NovikovScalar>().is_err());
        assert!("1*T^(4) + O(T^(3))".parse::<NovikovScalar>().is_err());
        assert!("1*T^(0)".parse::<NovikovScalar>().is_err());
    }
}
