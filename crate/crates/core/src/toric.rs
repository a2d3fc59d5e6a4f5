//! Bulk-deformed toric potential functions and the Jacobian-ring splitting.
//!
//! The pipeline is
//! `ToricFixture -> PotentialFunction -> critical points -> idempotents ->
//! quantum-cohomology expansion -> valuation -> defect bound`.
//!
//! Only fixtures whose critical equations separate (every facet normal is a
//! multiple of a coordinate vector) are supported. For those the Jacobian ring
//! is a tensor product of one-variable quotients, so its idempotents are
//! products of one-variable Lagrange interpolants through the critical values.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{LaurentPolynomial, Monomial};
use crate::novikov::{Exponent, NovikovError, NovikovScalar, Valuation};

/// Extra precision carried through intermediate steps; critical values and
/// idempotents lose up to two units of `T`-adic precision before the final
/// truncation.
pub const PRECISION_GUARD: i64 = 2;

/// Default truncation cutoff for the toric computations.
pub const DEFAULT_CUTOFF: i64 = 3;

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),
    #[error("invalid bulk parameter tau = {0}: need 0 < tau < 1/2")]
    InvalidTau(BigRational),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error("coupled critical equations (facet normal {0:?} mixes variables); unsupported")]
    CoupledEquations([i32; 2]),
    #[error("degenerate critical point; unsupported (leading root {root} has multiplicity {multiplicity})")]
    DegenerateCriticalPoint { root: BigRational, multiplicity: usize },
    #[error("leading-order equation for y{variable} has non-rational roots; unsupported")]
    IrrationalLeadingRoot { variable: usize },
    #[error("coincident critical values for y{variable}")]
    CoincidentPoints { variable: usize },
    #[error("critical point failed verification: residual {residual} in equation {equation}")]
    NotCritical { equation: usize, residual: NovikovScalar },
    #[error("class not expressible in the Kodaira-Spencer basis: monomial {0:?}")]
    NotInMonomialBasis(Monomial),
    #[error("zero class has no valuation")]
    ZeroClass,
    #[error("insufficient precision: result known only modulo T^{achieved}, need T^{required}")]
    InsufficientPrecision { achieved: Exponent, required: Exponent },
    #[error("fixture json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) mod rational_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(q)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::novikov::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

mod rational_pair {
    use num_rational::BigRational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &[BigRational; 2], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        for x in q {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigRational; 2], D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        let p = |s: &str| crate::novikov::parse_rational(s).map_err(serde::de::Error::custom);
        Ok([p(&a)?, p(&b)?])
    }
}

/// Facet `{l(u) = <normal, u> + constant >= 0}` of a moment polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: [i32; 2],
    #[serde(with = "rational_str")]
    pub constant: BigRational,
}

impl Facet {
    pub fn new(normal: [i32; 2], constant: BigRational) -> Self {
        Facet { normal, constant }
    }

    pub fn eval(&self, u: &[BigRational; 2]) -> BigRational {
        BigRational::from_integer(self.normal[0].into()) * &u[0]
            + BigRational::from_integer(self.normal[1].into()) * &u[1]
            + &self.constant
    }
}

/// Moment-polytope data plus per-facet bulk exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToricFixture {
    pub name: String,
    pub facets: Vec<Facet>,
    pub bulk: Vec<NovikovScalar>,
    #[serde(with = "rational_pair")]
    pub base_point: [BigRational; 2],
    pub q_sign: i8,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The bulk parameter `a = T^{1/2 - tau}`.
pub fn bulk_parameter(tau: &BigRational, cutoff: &Exponent) -> Result<NovikovScalar, ToricError> {
    if !tau.is_positive() || *tau >= q(1, 2) {
        return Err(ToricError::InvalidTau(tau.clone()));
    }
    Ok(NovikovScalar::t_power(Exponent::new(q(1, 2) - tau), cutoff.clone()))
}

impl ToricFixture {
    /// `S^2 x S^2` as the unit square with bulk `(a, -a, 0, 0)`.
    ///
    /// The signs reproduce the potential `e^a y1 + e^{-a} y2 + T/y1 + T/y2`
    /// and the images `[e^a y1]`, `[e^{-a} y2]`; the alternative `(a, a, 0, 0)`
    /// gives the same valuation and defect.
    pub fn s2xs2(tau: &BigRational, cutoff: &Exponent, q_sign: i8) -> Result<Self, ToricError> {
        let a = bulk_parameter(tau, cutoff)?;
        let zero = NovikovScalar::zero(cutoff.clone());
        let fixture = ToricFixture {
            name: format!("S2xS2 tau={tau}"),
            facets: unit_square(),
            bulk: vec![a.clone(), -&a, zero.clone(), zero],
            base_point: [q(1, 2), q(1, 2)],
            q_sign,
        };
        fixture.validate()?;
        Ok(fixture)
    }

    pub fn s2xs2_zero_bulk(cutoff: &Exponent) -> Self {
        ToricFixture {
            name: "S2xS2 zero bulk".into(),
            facets: unit_square(),
            bulk: vec![NovikovScalar::zero(cutoff.clone()); 4],
            base_point: [q(1, 2), q(1, 2)],
            q_sign: 1,
        }
    }

    /// The polytope `0 <= u1 <= 2, 0 <= u2 <= 1 - u1/2`, one facet per listed
    /// inequality. `u1 <= 2` only touches the polytope at the vertex `(2, 0)`.
    pub fn f2_zero(cutoff: &Exponent) -> Self {
        ToricFixture {
            name: "F2(0)".into(),
            facets: vec![
                Facet::new([1, 0], q(0, 1)),
                Facet::new([0, 1], q(0, 1)),
                Facet::new([-1, 0], q(2, 1)),
                Facet::new([-1, -2], q(2, 1)),
            ],
            bulk: vec![NovikovScalar::zero(cutoff.clone()); 4],
            base_point: [q(1, 2), q(1, 4)],
            q_sign: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ToricError> {
        let f: ToricFixture = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    pub fn validate(&self) -> Result<(), ToricError> {
        let bad = |m: String| Err(ToricError::InvalidFixture(m));
        if self.q_sign != 1 && self.q_sign != -1 {
            return bad(format!("q_sign must be +1 or -1, got {}", self.q_sign));
        }
        if self.bulk.len() != self.facets.len() {
            return bad(format!("{} bulk exponents for {} facets", self.bulk.len(), self.facets.len()));
        }
        for (i, f) in self.facets.iter().enumerate() {
            if f.normal == [0, 0] {
                return bad(format!("facet {i} has zero normal"));
            }
            if !f.eval(&self.base_point).is_positive() {
                return bad(format!("base point not interior: l_{}(u0) <= 0", i + 1));
            }
            for g in &self.facets[..i] {
                if g.normal == f.normal {
                    return bad(format!("duplicate facet normal {:?}", f.normal));
                }
            }
        }
        if !normals_positively_span(&self.facets) {
            return bad("polytope is unbounded".into());
        }
        Ok(())
    }
}

fn unit_square() -> Vec<Facet> {
    vec![
        Facet::new([1, 0], q(0, 1)),
        Facet::new([0, 1], q(0, 1)),
        Facet::new([-1, 0], q(1, 1)),
        Facet::new([0, -1], q(1, 1)),
    ]
}

/// `{l_i >= 0}` is bounded iff the normals leave no angular gap of `pi` or more.
fn normals_positively_span(facets: &[Facet]) -> bool {
    if facets.len() < 3 {
        return false;
    }
    let mut normals: Vec<[i64; 2]> = facets.iter().map(|f| [f.normal[0] as i64, f.normal[1] as i64]).collect();
    normals.sort_by(|a, b| {
        let ta = (a[1] as f64).atan2(a[0] as f64);
        let tb = (b[1] as f64).atan2(b[0] as f64);
        ta.total_cmp(&tb)
    });
    (0..normals.len()).all(|i| {
        let a = normals[i];
        let b = normals[(i + 1) % normals.len()];
        a[0] * b[1] - a[1] * b[0] > 0
    })
}

/// A potential function with one Laurent monomial per facet.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialFunction {
    pub poly: LaurentPolynomial,
    pub facet_monomials: Vec<Monomial>,
}

impl fmt::Display for PotentialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// `Σ_i exp(b_i) y^{v_i} T^{l_i(u0)}`, followed by `y_j -> y_j T^{-u0_j}`.
pub fn build_potential(fixture: &ToricFixture) -> Result<PotentialFunction, ToricError> {
    fixture.validate()?;
    // coefficients are reported at the common bulk precision
    let precision = fixture.bulk.iter().map(|b| b.cutoff().clone()).min().expect("validated fixture has facets");
    let mut poly = LaurentPolynomial::zero(2);
    let mut facet_monomials = Vec::with_capacity(fixture.facets.len());
    for (facet, b) in fixture.facets.iter().zip(&fixture.bulk) {
        let area = Exponent::new(facet.eval(&fixture.base_point));
        let pairing = Exponent::new(&area.value().clone() - &facet.constant);
        let coeff = b.exp()?.shift(&area).shift(&-&pairing);
        let coeff = coeff.truncate(&precision.clone().min(coeff.cutoff().clone()))?;
        let monomial: Monomial = facet.normal.to_vec();
        poly.add_term(monomial.clone(), coeff);
        facet_monomials.push(monomial);
    }
    Ok(PotentialFunction { poly, facet_monomials })
}

/// A critical point of the potential, with the leading term of each coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub assignment: Vec<NovikovScalar>,
    /// Index of each coordinate within its variable's sorted root list.
    pub root_index: Vec<usize>,
}

impl CriticalPoint {
    /// Sign of the leading coefficient of each coordinate (the `(ε1, ε2)` label).
    pub fn signs(&self) -> Vec<i8> {
        self.assignment
            .iter()
            .map(|y| match y.leading_term() {
                Some((_, c)) if c.is_negative() => -1,
                _ => 1,
            })
            .collect()
    }

    pub fn label(&self) -> String {
        let s: Vec<&str> = self.signs().iter().map(|&s| if s > 0 { "+" } else { "-" }).collect();
        format!("({})", s.join(","))
    }
}

/// Per-variable univariate critical equation, as coefficients of `y^{d}` after
/// clearing the most negative power.
fn separated_equations(pf: &PotentialFunction) -> Result<Vec<Vec<NovikovScalar>>, ToricError> {
    let nvars = pf.poly.nvars();
    let mut per_var: Vec<Vec<(i32, NovikovScalar)>> = vec![Vec::new(); nvars];
    for (m, c) in pf.poly.terms() {
        let nonzero: Vec<usize> = (0..nvars).filter(|&j| m[j] != 0).collect();
        if nonzero.len() != 1 {
            return Err(ToricError::CoupledEquations([m[0], m[1]]));
        }
        let j = nonzero[0];
        let k = m[j];
        per_var[j].push((k, c.scale(&BigRational::from_integer(k.into()))));
    }
    per_var
        .into_iter()
        .map(|terms| {
            let kmin = terms.iter().map(|(k, _)| *k).min().unwrap_or(0);
            let kmax = terms.iter().map(|(k, _)| *k).max().unwrap_or(0);
            let cutoff = terms.iter().map(|(_, c)| c.cutoff().clone()).min().unwrap_or_else(Exponent::zero);
            let mut coeffs = vec![NovikovScalar::zero(cutoff); (kmax - kmin + 1) as usize];
            for (k, c) in terms {
                let d = (k - kmin) as usize;
                coeffs[d] = &coeffs[d] + &c;
            }
            Ok(coeffs)
        })
        .collect()
}

fn eval_univariate(coeffs: &[NovikovScalar], y: &NovikovScalar) -> NovikovScalar {
    let mut acc = coeffs.last().cloned().expect("nonempty polynomial");
    for c in coeffs.iter().rev().skip(1) {
        acc = &(&acc * y) + c;
    }
    acc
}

fn derivative(coeffs: &[NovikovScalar]) -> Vec<NovikovScalar> {
    coeffs.iter().enumerate().skip(1).map(|(d, c)| c.scale(&BigRational::from_integer(d.into()))).collect()
}

/// Leading-order data `(λ, residual polynomial)` for each lower Newton-polygon edge.
fn newton_polygon_edges(coeffs: &[NovikovScalar]) -> Vec<(Exponent, Vec<BigRational>)> {
    let pts: Vec<(usize, Exponent)> =
        coeffs.iter().enumerate().filter_map(|(d, c)| c.valuation().finite().map(|v| (d, v.clone()))).collect();
    let mut hull: Vec<(usize, Exponent)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (d1, v1) = &hull[hull.len() - 2];
            let (d2, v2) = &hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            let lhs = (v2 - v1).value() * BigRational::from_integer((p.0 - d1).into());
            let rhs = (&p.1 - v1).value() * BigRational::from_integer((d2 - d1).into());
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| {
            let (d1, v1) = &w[0];
            let (d2, v2) = &w[1];
            let lambda = Exponent::new((v1 - v2).value() / BigRational::from_integer((d2 - d1).into()));
            let level = v1 + &lambda.scale(&BigRational::from_integer((*d1).into()));
            let residual = (*d1..=*d2)
                .map(|d| {
                    let c = &coeffs[d];
                    match c.valuation() {
                        Valuation::Finite(v) if &v + &lambda.scale(&BigRational::from_integer(d.into())) == level => {
                            c.leading_term().unwrap().1.clone()
                        }
                        _ => BigRational::zero(),
                    }
                })
                .collect();
            (lambda, residual)
        })
        .collect()
}

fn divisors(n: &BigInt) -> Option<Vec<i64>> {
    let n = n.abs().to_i64()?;
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    Some(out)
}

/// Rational roots of `Σ r_i c^i` (with `r_0, r_top != 0`), with multiplicities.
fn rational_roots(residual: &[BigRational]) -> Option<Vec<(BigRational, usize)>> {
    let scale = residual.iter().fold(BigInt::one(), |acc, r| acc * r.denom());
    let ints: Vec<BigInt> = residual.iter().map(|r| (r * &scale).to_integer()).collect();
    let ps = divisors(&ints[0])?;
    let qs = divisors(ints.last()?)?;
    let mut poly: Vec<BigRational> = residual.to_vec();
    let mut roots = Vec::new();
    let mut candidates: Vec<BigRational> = Vec::new();
    for p in &ps {
        for qd in &qs {
            for s in [1i64, -1] {
                let c = BigRational::new((s * p).into(), (*qd).into());
                if !candidates.contains(&c) {
                    candidates.push(c);
                }
            }
        }
    }
    candidates.sort();
    for c in candidates {
        let mut mult = 0;
        loop {
            if poly.len() < 2 {
                break;
            }
            // synthetic division by (x - c)
            let mut quotient = vec![BigRational::zero(); poly.len() - 1];
            let mut acc = BigRational::zero();
            for i in (0..poly.len()).rev() {
                acc = &acc * &c + &poly[i];
                if i > 0 {
                    quotient[i - 1] = acc.clone();
                }
            }
            if acc.is_zero() {
                poly = quotient;
                mult += 1;
            } else {
                break;
            }
        }
        if mult > 0 {
            roots.push((c, mult));
        }
    }
    Some(roots)
}

fn truncate_at_most(x: &NovikovScalar, cutoff: &Exponent) -> NovikovScalar {
    let c = cutoff.clone().min(x.cutoff().clone());
    x.truncate(&c).expect("lowering precision always succeeds")
}

/// One Newton step for `P(y) = 0` with every input cut down to what a result
/// accurate modulo `T^target` needs; `slope_val` is the valuation of `P'` at the root.
fn newton_step(
    coeffs: &[NovikovScalar],
    dcoeffs: &[NovikovScalar],
    y: &NovikovScalar,
    lambda: &Exponent,
    slope_val: &Exponent,
    target: &Exponent,
) -> Result<NovikovScalar, ToricError> {
    let deg = |d: usize| lambda.scale(&BigRational::from_integer(d.into()));
    let value_cut = slope_val + target;
    let p: Vec<NovikovScalar> =
        coeffs.iter().enumerate().map(|(d, c)| truncate_at_most(c, &(&value_cut - &deg(d)))).collect();
    let slope_cut = &(slope_val + target) - lambda;
    let dp: Vec<NovikovScalar> =
        dcoeffs.iter().enumerate().map(|(d, c)| truncate_at_most(c, &(&slope_cut - &deg(d)))).collect();
    let y = truncate_at_most(y, target);
    let value = eval_univariate(&p, &y);
    let slope = eval_univariate(&dp, &y);
    Ok(&value * &slope.invert()?)
}

/// Lifts the leading-order root `c T^λ` of `P` by Newton iteration, doubling the
/// relative precision between rounds and finishing at the full working precision.
fn newton_lift(coeffs: &[NovikovScalar], start: NovikovScalar) -> Result<NovikovScalar, ToricError> {
    let work = coeffs.iter().map(|c| c.cutoff().clone()).min().unwrap();
    let dcoeffs = derivative(coeffs);
    let lambda = start.valuation().finite().cloned().expect("nonzero start");
    let slope_val = match eval_univariate(&dcoeffs, &start).valuation() {
        Valuation::Finite(v) => v,
        Valuation::Infinity => {
            return Err(ToricError::DegenerateCriticalPoint {
                root: start.leading_term().unwrap().1.clone(),
                multiplicity: 2,
            })
        }
    };
    let mut y = start;
    let mut target = (&lambda + &Exponent::ratio(1, 2)).min(work.clone());
    for _ in 0..64 {
        // the iterate is an exact finite sum; re-anchor it at the current target
        let exact = NovikovScalar::from_terms(y.terms().iter().cloned(), target.clone());
        let step = newton_step(coeffs, &dcoeffs, &exact, &lambda, &slope_val, &target)?;
        y = &exact - &step;
        let accurate = match step.valuation() {
            Valuation::Finite(v) if v < *y.cutoff() => {
                // a simple root: the relative error squares with each step
                let rel = &v - &lambda;
                &lambda + &(&rel + &rel)
            }
            _ if target == work => return Ok(y),
            _ => target.clone(),
        };
        target = (&lambda + &(&(&accurate - &lambda) + &(&accurate - &lambda))).min(work.clone());
    }
    Ok(y)
}

/// Critical points of `pf`, each verified to satisfy `y_j ∂_j pf = 0` modulo `T^cutoff`.
pub fn solve_critical_points(pf: &PotentialFunction, cutoff: &Exponent) -> Result<Vec<CriticalPoint>, ToricError> {
    let equations = separated_equations(pf)?;
    let mut roots_per_var: Vec<Vec<NovikovScalar>> = Vec::new();
    for (j, coeffs) in equations.iter().enumerate() {
        let degree = coeffs.len() - 1;
        let mut roots = Vec::new();
        for (lambda, residual) in newton_polygon_edges(coeffs) {
            let found = rational_roots(&residual).ok_or(ToricError::IrrationalLeadingRoot { variable: j + 1 })?;
            let count: usize = found.iter().map(|(_, m)| m).sum();
            if count < residual.len() - 1 {
                return Err(ToricError::IrrationalLeadingRoot { variable: j + 1 });
            }
            for (c, mult) in found {
                if mult > 1 {
                    return Err(ToricError::DegenerateCriticalPoint { root: c, multiplicity: mult });
                }
                let start = NovikovScalar::monomial(c, lambda.clone(), coeffs[0].cutoff().clone());
                roots.push(newton_lift(coeffs, start)?);
            }
        }
        if roots.len() != degree {
            return Err(ToricError::IrrationalLeadingRoot { variable: j + 1 });
        }
        roots.sort_by(|a, b| {
            let la = a.leading_term().unwrap();
            let lb = b.leading_term().unwrap();
            la.0.cmp(&lb.0).then_with(|| lb.1.cmp(&la.1))
        });
        roots_per_var.push(roots);
    }

    let mut points = vec![CriticalPoint { assignment: Vec::new(), root_index: Vec::new() }];
    for roots in &roots_per_var {
        points = points
            .into_iter()
            .flat_map(|p| {
                roots.iter().enumerate().map(move |(k, r)| {
                    let mut q = p.clone();
                    q.assignment.push(r.clone());
                    q.root_index.push(k);
                    q
                })
            })
            .collect();
    }

    for p in &points {
        for j in 0..pf.poly.nvars() {
            let residual = pf.poly.log_derivative(j).evaluate(&p.assignment)?;
            if residual.cutoff() < cutoff {
                return Err(ToricError::InsufficientPrecision {
                    achieved: residual.cutoff().clone(),
                    required: cutoff.clone(),
                });
            }
            if !residual.truncate(cutoff)?.is_zero() {
                return Err(ToricError::NotCritical { equation: j + 1, residual });
            }
        }
    }
    Ok(points)
}

/// Jacobian-ring idempotents, one per critical point, in the same order.
pub fn jacobian_idempotents(
    pf: &PotentialFunction,
    points: &[CriticalPoint],
) -> Result<Vec<LaurentPolynomial>, ToricError> {
    separated_equations(pf)?;
    let nvars = pf.poly.nvars();
    let mut roots_per_var: Vec<Vec<NovikovScalar>> = vec![Vec::new(); nvars];
    for p in points {
        for (j, y) in p.assignment.iter().enumerate() {
            let k = p.root_index[j];
            let slot = &mut roots_per_var[j];
            if slot.len() <= k {
                slot.resize(k + 1, y.clone());
            }
            slot[k] = y.clone();
        }
    }
    // Lagrange basis per variable
    let mut bases: Vec<Vec<LaurentPolynomial>> = Vec::with_capacity(nvars);
    for (j, roots) in roots_per_var.iter().enumerate() {
        let mut basis = Vec::with_capacity(roots.len());
        for (k, rk) in roots.iter().enumerate() {
            let cutoff = rk.cutoff().clone();
            let mut l = LaurentPolynomial::constant(nvars, NovikovScalar::one(cutoff.clone()));
            for (m, rm) in roots.iter().enumerate() {
                if m == k {
                    continue;
                }
                let diff = rk - rm;
                if diff.is_zero() {
                    return Err(ToricError::CoincidentPoints { variable: j + 1 });
                }
                let inv = diff.invert()?;
                let mut factor = LaurentPolynomial::variable(nvars, j, cutoff.clone()).scale(&inv);
                factor.add_term(vec![0; nvars], -&(rm * &inv));
                l = l.mul(&factor);
            }
            basis.push(l);
        }
        bases.push(basis);
    }
    Ok(points
        .iter()
        .map(|p| {
            p.root_index
                .iter()
                .enumerate()
                .fold(None::<LaurentPolynomial>, |acc, (j, &k)| {
                    Some(match acc {
                        None => bases[j][k].clone(),
                        Some(a) => a.mul(&bases[j][k]),
                    })
                })
                .expect("at least one variable")
        })
        .collect())
}

/// Coefficients of a quantum-cohomology class on `(e0, e1, e2, e3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QHClassExpansion {
    pub coefficients: [NovikovScalar; 4],
}

impl QHClassExpansion {
    pub fn truncate(&self, cutoff: &Exponent) -> Result<Self, NovikovError> {
        let [a, b, c, d] = &self.coefficients;
        Ok(QHClassExpansion {
            coefficients: [a.truncate(cutoff)?, b.truncate(cutoff)?, c.truncate(cutoff)?, d.truncate(cutoff)?],
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let c = |i: usize| &self.coefficients[i] + &other.coefficients[i];
        QHClassExpansion { coefficients: [c(0), c(1), c(2), c(3)] }
    }
}

impl fmt::Display for QHClassExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients.iter().enumerate().map(|(i, c)| format!("[{c}]*e{i}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Images of `e0..e3` under the Kodaira-Spencer map: `[1]`, the terms of the first
/// two facets, and `q` times their product.
pub fn ks_basis_images(fixture: &ToricFixture) -> Result<[(Monomial, NovikovScalar); 4], ToricError> {
    let pf = build_potential(fixture)?;
    let cutoff = pf.poly.min_cutoff().unwrap_or_else(Exponent::zero);
    let m1 = pf.facet_monomials[0].clone();
    let m2 = pf.facet_monomials[1].clone();
    let c1 = pf.poly.coefficient(&m1).cloned().unwrap();
    let c2 = pf.poly.coefficient(&m2).cloned().unwrap();
    let qv = NovikovScalar::constant(BigRational::from_integer(fixture.q_sign.into()), cutoff.clone());
    let m12: Monomial = m1.iter().zip(&m2).map(|(a, b)| a + b).collect();
    let c12 = &(&c1 * &c2) * &qv;
    Ok([(vec![0, 0], NovikovScalar::one(cutoff)), (m1, c1), (m2, c2), (m12, c12)])
}

/// The forward map: a class to its Laurent-polynomial representative.
pub fn ks_image(fixture: &ToricFixture, class: &QHClassExpansion) -> Result<LaurentPolynomial, ToricError> {
    let images = ks_basis_images(fixture)?;
    let mut out = LaurentPolynomial::zero(2);
    for ((m, s), c) in images.into_iter().zip(&class.coefficients) {
        out.add_term(m, &s * c);
    }
    Ok(out)
}

/// Expresses `idem` on the basis `e0..e3` by inverting the (monomial) basis images.
pub fn ks_transport(fixture: &ToricFixture, idem: &LaurentPolynomial) -> Result<QHClassExpansion, ToricError> {
    transport_with(&ks_basis_images(fixture)?, idem)
}

fn transport_with(
    images: &[(Monomial, NovikovScalar); 4],
    idem: &LaurentPolynomial,
) -> Result<QHClassExpansion, ToricError> {
    let cutoff = idem.min_cutoff().unwrap_or_else(Exponent::zero);
    let mut coeffs: [NovikovScalar; 4] = std::array::from_fn(|_| NovikovScalar::zero(cutoff.clone()));
    for (m, alpha) in idem.terms() {
        let k = images.iter().position(|(im, _)| im == m).ok_or_else(|| ToricError::NotInMonomialBasis(m.clone()))?;
        coeffs[k] = alpha * &images[k].1.invert()?;
    }
    Ok(QHClassExpansion { coefficients: coeffs })
}

/// Minimum valuation over the four coefficients.
pub fn qh_valuation(class: &QHClassExpansion) -> Result<Exponent, ToricError> {
    class.coefficients.iter().filter_map(|c| c.valuation().finite().cloned()).min().ok_or(ToricError::ZeroClass)
}

/// Upper bound `-12 v` for the defect of the quasi-morphism attached to an
/// idempotent of valuation `v`.
pub fn defect_bound(valuation: &Exponent) -> BigRational {
    -(BigRational::from_integer(12.into()) * valuation.value())
}

/// Everything computed along the defect pipeline, truncated at the requested cutoff.
#[derive(Clone, Debug)]
pub struct DefectComputation {
    pub fixture: ToricFixture,
    pub cutoff: Exponent,
    pub potential: LaurentPolynomial,
    pub critical_points: Vec<CriticalPoint>,
    pub idempotents: Vec<LaurentPolynomial>,
    pub expansions: Vec<QHClassExpansion>,
    pub valuations: Vec<Exponent>,
    pub defect: BigRational,
    /// `idempotents[i](critical_points[j])` modulo `T^cutoff`.
    pub orthogonality: Vec<Vec<Option<u8>>>,
    /// Whether the idempotents sum to 1 modulo `T^cutoff`.
    pub sum_is_one: bool,
}

fn checked_truncate(x: &NovikovScalar, cutoff: &Exponent) -> Result<NovikovScalar, ToricError> {
    x.truncate(cutoff)
        .map_err(|_| ToricError::InsufficientPrecision { achieved: x.cutoff().clone(), required: cutoff.clone() })
}

fn checked_truncate_poly(p: &LaurentPolynomial, cutoff: &Exponent) -> Result<LaurentPolynomial, ToricError> {
    let mut out = LaurentPolynomial::zero(p.nvars());
    for (m, c) in p.terms() {
        out.add_term(m.clone(), checked_truncate(c, cutoff)?);
    }
    Ok(out)
}

/// Runs potential -> critical points -> idempotents -> expansions -> defect.
/// The fixture should carry at least `cutoff + PRECISION_GUARD` precision.
pub fn defect_pipeline(fixture: &ToricFixture, cutoff: &Exponent) -> Result<DefectComputation, ToricError> {
    let pf = build_potential(fixture)?;
    let points = solve_critical_points(&pf, cutoff)?;
    let idems = jacobian_idempotents(&pf, &points)?;
    let images = ks_basis_images(fixture)?;
    let expansions = idems.iter().map(|i| transport_with(&images, i)).collect::<Result<Vec<_>, _>>()?;
    let valuations = expansions.iter().map(qh_valuation).collect::<Result<Vec<_>, _>>()?;
    let worst = valuations.iter().min().cloned().ok_or(ToricError::ZeroClass)?;
    let defect = defect_bound(&worst);
    let orthogonality = orthogonality_table(&idems, &points, cutoff)?;
    let total = idems.iter().fold(LaurentPolynomial::zero(pf.poly.nvars()), |acc, i| acc.add(i));
    let sum_is_one = checked_truncate_poly(&total, cutoff)?
        == LaurentPolynomial::constant(pf.poly.nvars(), NovikovScalar::one(cutoff.clone()));

    let critical_points = points
        .iter()
        .map(|p| {
            Ok(CriticalPoint {
                assignment: p
                    .assignment
                    .iter()
                    .map(|y| checked_truncate(y, cutoff))
                    .collect::<Result<_, ToricError>>()?,
                root_index: p.root_index.clone(),
            })
        })
        .collect::<Result<Vec<_>, ToricError>>()?;
    let expansions = expansions
        .iter()
        .map(|e| {
            Ok(QHClassExpansion {
                coefficients: [
                    checked_truncate(&e.coefficients[0], cutoff)?,
                    checked_truncate(&e.coefficients[1], cutoff)?,
                    checked_truncate(&e.coefficients[2], cutoff)?,
                    checked_truncate(&e.coefficients[3], cutoff)?,
                ],
            })
        })
        .collect::<Result<Vec<_>, ToricError>>()?;
    Ok(DefectComputation {
        fixture: fixture.clone(),
        cutoff: cutoff.clone(),
        potential: checked_truncate_poly(&pf.poly, cutoff)?,
        critical_points,
        idempotents: idems.iter().map(|i| checked_truncate_poly(i, cutoff)).collect::<Result<_, _>>()?,
        expansions,
        valuations,
        defect,
        orthogonality,
        sum_is_one,
    })
}

/// Kronecker-delta table `idem_i(point_j)` truncated at `cutoff`; `None` entries
/// mark values that are not exactly 0 or 1 there.
pub fn orthogonality_table(
    idempotents: &[LaurentPolynomial],
    points: &[CriticalPoint],
    cutoff: &Exponent,
) -> Result<Vec<Vec<Option<u8>>>, ToricError> {
    idempotents
        .iter()
        .map(|idem| {
            points
                .iter()
                .map(|p| {
                    let v = checked_truncate(&idem.evaluate(&p.assignment)?, cutoff)?;
                    Ok(if v.is_zero() {
                        Some(0)
                    } else if v == NovikovScalar::one(cutoff.clone()) {
                        Some(1)
                    } else {
                        None
                    })
                })
                .collect()
        })
        .collect()
}
