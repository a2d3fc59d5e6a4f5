//! Laurent polynomials in `y_1..y_n` with Novikov coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use crate::novikov::{Exponent, NovikovError, NovikovScalar};

/// Integer exponent vector of a Laurent monomial.
pub type Monomial = Vec<i32>;

/// Sparse Laurent polynomial. Coefficients that vanish modulo their cutoff are
/// not stored, so two polynomials are equal iff their stored terms agree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPolynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, NovikovScalar>,
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: NovikovScalar) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exponents: Monomial, c: NovikovScalar) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// `y_index` (0-based) with unit coefficient at the given cutoff.
    pub fn variable(nvars: usize, index: usize, cutoff: Exponent) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        Self::monomial(exps, NovikovScalar::one(cutoff))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &NovikovScalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[i32]) -> Option<&NovikovScalar> {
        self.terms.get(exponents)
    }

    pub fn add_term(&mut self, exponents: Monomial, c: NovikovScalar) {
        assert_eq!(exponents.len(), self.nvars, "monomial arity mismatch");
        let merged = match self.terms.remove(&exponents) {
            Some(old) => &old + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(exponents, merged);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&NovikovScalar::constant(BigRational::from_integer((-1).into()), other.max_cutoff())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, factor: &NovikovScalar) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// The logarithmic derivative `y_j ∂/∂y_j`.
    pub fn log_derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let k = BigRational::from_integer(m[j].into());
            out.add_term(m.clone(), c.scale(&k));
        }
        out
    }

    pub fn evaluate(&self, point: &[NovikovScalar]) -> Result<NovikovScalar, NovikovError> {
        assert_eq!(point.len(), self.nvars, "evaluation point arity mismatch");
        let cutoff = point
            .iter()
            .map(|p| p.cutoff().clone())
            .chain(self.terms.values().map(|c| c.cutoff().clone()))
            .min()
            .unwrap_or_else(Exponent::zero);
        let mut powers: BTreeMap<(usize, i32), NovikovScalar> = BTreeMap::new();
        let mut acc = NovikovScalar::zero(cutoff);
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (j, &k) in m.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let power = match powers.entry((j, k)) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(point[j].pow(k as i64)?),
                };
                term = &term * power;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Truncates every coefficient, dropping those that vanish.
    pub fn truncate(&self, cutoff: &Exponent) -> Result<Self, NovikovError> {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.truncate(cutoff)?);
        }
        Ok(out)
    }

    /// Smallest coefficient cutoff (the polynomial's overall precision).
    pub fn min_cutoff(&self) -> Option<Exponent> {
        self.terms.values().map(|c| c.cutoff().clone()).min()
    }

    fn max_cutoff(&self) -> Exponent {
        self.terms.values().map(|c| c.cutoff().clone()).max().unwrap_or_else(Exponent::zero)
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}]")?;
            for (j, &k) in m.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*y{}", j + 1)?,
                    _ => write!(f, "*y{}^({k})", j + 1)?,
                }
            }
        }
        Ok(())
    }
}
