//! Quasi-morphism evaluation on superheavy sets and Hofer-distance certificates.
//!
//! `μ` is never computed from Floer data. It is evaluated by the rule: if
//! `H ∘ Θ_δ^{-1}` is constant on a superheavy set `X`, then `μ(φ_H) = H|_X`.
//! Everything else (defect, Lipschitz constant, volume) enters the bounds
//! through closed forms or through the toric pipeline.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, disk_epsilon, epsilon_delta, fiber_extent, moment_map, sample_equator_torus, sample_torus, theta_delta,
    theta_delta_inverse, DiskPoint, GeometryError, SpherePoint, BASE_POINT,
};
use crate::novikov::Exponent;
use crate::toric::{self, ToricError, ToricFixture};

/// Default tolerance for `max - min` of an analytically constant pullback.
pub const CONSTANCY_TOL: f64 = 1e-8;

/// Fraction of the containment half-width actually used for `Φ_δ`.
pub const DEFAULT_SAFETY: f64 = 0.99;

/// Finite-difference step for bracket checks. `f̃` varies on the scale of the
/// containment window (about 1e-2), so steps near 1e-4 are not yet asymptotic.
pub const POISSON_STEP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum QmError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Toric(#[from] ToricError),
    #[error("superheavy set not in image: sample with v1 = {v1} >= 2δ - 1 = {bound}")]
    NotInImage { v1: f64, bound: f64 },
    #[error("function samples live on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),
    #[error("support exceeds containment interval: nonzero value {value} at grid index {index}")]
    SupportExceedsWindow { index: usize, value: f64 },
    #[error("function sample needs at least {min} grid points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("δ = {0} is outside the regime (2 + √3)/4 < δ <= 1 where Φ_δ is defined")]
    OutOfRegime(f64),
    #[error("inconclusive μ evaluation on {set}: max - min = {residual}")]
    Inconclusive { set: String, residual: f64 },
    #[error("certificate inconsistent: lower bound {lower} exceeds upper bound {upper}")]
    CertificateInconsistent { lower: f64, upper: f64 },
    #[error("function sample json: {0}")]
    Json(#[from] serde_json::Error),
}

type FieldFn = dyn Fn(f64, Complex64, Complex64) -> f64 + Send + Sync;

/// A Hamiltonian `H(t, z1, z2)` on `B² × B²` with declared support radii.
#[derive(Clone)]
pub struct HamiltonianField {
    evaluate: Arc<FieldFn>,
    pub support: (f64, f64),
    pub autonomous: bool,
    pub description: String,
}

impl fmt::Debug for HamiltonianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianField")
            .field("support", &self.support)
            .field("autonomous", &self.autonomous)
            .field("description", &self.description)
            .finish()
    }
}

impl HamiltonianField {
    pub fn new<F>(description: impl Into<String>, support: (f64, f64), autonomous: bool, f: F) -> Self
    where
        F: Fn(f64, Complex64, Complex64) -> f64 + Send + Sync + 'static,
    {
        HamiltonianField { evaluate: Arc::new(f), support, autonomous, description: description.into() }
    }

    pub fn zero() -> Self {
        Self::new("0", (0.0, 0.0), true, |_, _, _| 0.0)
    }

    pub fn eval(&self, t: f64, z1: Complex64, z2: Complex64) -> f64 {
        (self.evaluate)(t, z1, z2)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let (a, b) = (self.evaluate.clone(), other.evaluate.clone());
        HamiltonianField {
            evaluate: Arc::new(move |t, z1, z2| a(t, z1, z2) - b(t, z1, z2)),
            support: (self.support.0.max(other.support.0), self.support.1.max(other.support.1)),
            autonomous: self.autonomous && other.autonomous,
            description: format!("({}) - ({})", self.description, other.description),
        }
    }

    /// `H + c`; the result is no longer compactly supported.
    pub fn plus_constant(&self, c: f64) -> Self {
        let a = self.evaluate.clone();
        HamiltonianField {
            evaluate: Arc::new(move |t, z1, z2| a(t, z1, z2) + c),
            support: (1.0, 1.0),
            autonomous: self.autonomous,
            description: format!("({}) + {c}", self.description),
        }
    }

    /// Sampled check that `H` vanishes outside the declared support.
    pub fn vanishes_outside_support(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut point = |r_min: f64| {
            let r = rng.gen_range(r_min.min(0.999_999)..1.0);
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            Complex64::from_polar(r, a)
        };
        (0..samples).all(|k| {
            let t = k as f64 / samples.max(1) as f64;
            let (z1, z2) =
                if k % 2 == 0 { (point(self.support.0), point(0.0)) } else { (point(0.0), point(self.support.1)) };
            let outside = z1.norm() >= self.support.0 || z2.norm() >= self.support.1;
            !outside || self.eval(t, z1, z2) == 0.0
        })
    }
}

/// Superheavy sets available to the evaluation rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SuperheavySet {
    /// `T_τ = {|v + w| = 2τ, (v + w)·e1 = 0}`.
    TorusT { tau: f64 },
    /// `{v_a = 0} × {w_b = 0}`; axis `0` is `S¹₀`, axis `2` is `S¹_eq`.
    EquatorTorus { axes: (usize, usize) },
}

impl fmt::Display for SuperheavySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuperheavySet::TorusT { tau } => write!(f, "T_{tau}"),
            SuperheavySet::EquatorTorus { axes: (a, b) } => write!(f, "{{v{} = 0}} x {{w{} = 0}}", a + 1, b + 1),
        }
    }
}

impl SuperheavySet {
    pub fn sample(&self, grid: (usize, usize)) -> Vec<(SpherePoint, SpherePoint)> {
        match *self {
            SuperheavySet::TorusT { tau } => sample_torus(tau, grid),
            SuperheavySet::EquatorTorus { axes } => sample_equator_torus(axes, grid),
        }
    }
}

/// `T_τ` together with every coordinate equatorial torus. The latter are all
/// images of `S¹_eq × S¹_eq` under rotations, and the quasi-state is invariant
/// under symplectomorphisms, so each of them is superheavy.
pub fn superheavy_registry(tau: f64) -> Vec<SuperheavySet> {
    let mut out = vec![SuperheavySet::TorusT { tau }];
    for a in 0..3 {
        for b in 0..3 {
            out.push(SuperheavySet::EquatorTorus { axes: (a, b) });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MuStatus {
    Conclusive { value: f64 },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEvaluation {
    pub status: MuStatus,
    pub constancy_residual: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub set: SuperheavySet,
    pub delta: f64,
    pub tau: f64,
}

impl MuEvaluation {
    pub fn value(&self) -> Option<f64> {
        match self.status {
            MuStatus::Conclusive { value } => Some(value),
            MuStatus::Inconclusive => None,
        }
    }

    pub fn require_value(&self) -> Result<f64, QmError> {
        self.value()
            .ok_or_else(|| QmError::Inconclusive { set: self.set.to_string(), residual: self.constancy_residual })
    }
}

fn time_samples(h: &HamiltonianField) -> Vec<f64> {
    if h.autonomous {
        vec![0.0]
    } else {
        (0..=8).map(|k| k as f64 / 8.0).collect()
    }
}

/// `(min, max, sum, count)` of `H ∘ Θ_δ^{-1}` over the samples of `X`.
fn pulled_back_range(
    h: &HamiltonianField,
    x: &SuperheavySet,
    delta: f64,
    grid: (usize, usize),
) -> Result<(f64, f64, f64, usize), QmError> {
    let bound = 2.0 * delta - 1.0;
    let times = time_samples(h);
    let samples = x.sample(grid);
    samples
        .par_iter()
        .map(|(v, w)| {
            let pulled = |p: &SpherePoint| {
                theta_delta_inverse(p, delta).map_err(|_| QmError::NotInImage { v1: p.v()[0], bound })
            };
            let (z1, z2) = (pulled(v)?, pulled(w)?);
            let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
            for &t in &times {
                let value = h.eval(t, z1.z(), z2.z());
                acc = (acc.0.min(value), acc.1.max(value), acc.2 + value, acc.3 + 1);
            }
            Ok(acc)
        })
        .try_reduce(
            || (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize),
            |a, b| Ok((a.0.min(b.0), a.1.max(b.1), a.2 + b.2, a.3 + b.3)),
        )
}

/// Evaluates `μ_δ^τ(φ_H)` by the constancy rule on `X`.
pub fn evaluate_mu(
    h: &HamiltonianField,
    x: &SuperheavySet,
    delta: f64,
    tau: f64,
    grid: (usize, usize),
    tolerance: f64,
) -> Result<MuEvaluation, QmError> {
    let (min, max, sum, count) = pulled_back_range(h, x, delta, grid)?;
    let residual = max - min;
    let status = if count > 0 && residual <= tolerance {
        MuStatus::Conclusive { value: (sum / count as f64).clamp(min, max) }
    } else {
        MuStatus::Inconclusive
    };
    Ok(MuEvaluation { status, constancy_residual: residual, min, max, samples: count, set: *x, delta, tau })
}

/// `min_X H <= value <= max_X H` over the samples of `X`.
pub fn superheavy_sandwich_check(
    h: &HamiltonianField,
    x: &SuperheavySet,
    value: f64,
    delta: f64,
    grid: (usize, usize),
) -> Result<bool, QmError> {
    let (min, max, _, _) = pulled_back_range(h, x, delta, grid)?;
    Ok(min <= value && value <= max)
}

pub fn lipschitz_constant(delta: f64) -> f64 {
    1.0 + delta * delta
}

/// `∫ ω̄_std²` over `S² × S²` with each factor of area `2π`.
pub fn ambient_volume() -> f64 {
    8.0 * PI * PI
}

/// Quadrature sizes for integrals over `[0, 1] × B² × B²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub radial: usize,
    pub angular: usize,
    pub time: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { radial: 24, angular: 48, time: 8 }
    }
}

fn gl_nodes(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    gl.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w)).collect()
}

/// Polar nodes `(z, weight)` for `∫_{B²(r)} · dσ` with `dσ = 2 dx dy`.
fn disk_nodes(r: f64, q: &Quadrature) -> Vec<(Complex64, f64)> {
    let da = 2.0 * PI / q.angular as f64;
    gl_nodes(q.radial, 0.0, r)
        .into_iter()
        .flat_map(|(rho, w)| {
            (0..q.angular).map(move |k| (Complex64::from_polar(rho, k as f64 * da), 2.0 * rho * w * da))
        })
        .collect()
}

/// `δ³ ∫₀¹ dt ∫ F ω̄₀²` with `ω̄₀² = 2 dσ₁ dσ₂`.
pub fn calabi_integral(f: &HamiltonianField, delta: f64, q: &Quadrature) -> f64 {
    let d1 = disk_nodes(f.support.0, q);
    let d2 = disk_nodes(f.support.1, q);
    let times = if f.autonomous { vec![(0.0, 1.0)] } else { gl_nodes(q.time, 0.0, 1.0) };
    let integral: f64 = d1
        .par_iter()
        .map(|&(z1, w1)| {
            let mut s = 0.0;
            for &(z2, w2) in &d2 {
                for &(t, wt) in &times {
                    s += wt * w2 * f.eval(t, z1, z2);
                }
            }
            w1 * s
        })
        .sum();
    delta.powi(3) * 2.0 * integral
}

/// Values of a function on the open grid `x_i = (i + 1)/(n + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample", into = "RawSample")]
pub struct FunctionSample {
    values: Vec<f64>,
    /// Second derivatives of the natural cubic spline at `0, x_0, .., x_{n-1}, 1`.
    #[serde(skip)]
    curvature: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    values: Vec<f64>,
}

impl TryFrom<RawSample> for FunctionSample {
    type Error = QmError;
    fn try_from(raw: RawSample) -> Result<Self, QmError> {
        FunctionSample::new(raw.values)
    }
}

impl From<FunctionSample> for RawSample {
    fn from(f: FunctionSample) -> Self {
        RawSample { values: f.values }
    }
}

/// Number of grid points at each end on which a sample must vanish.
fn margin(n: usize) -> usize {
    (n as f64 * 0.05).ceil() as usize
}

impl FunctionSample {
    pub const MIN_POINTS: usize = 20;

    pub fn new(values: Vec<f64>) -> Result<Self, QmError> {
        let n = values.len();
        if n < Self::MIN_POINTS {
            return Err(QmError::GridTooSmall { min: Self::MIN_POINTS, got: n });
        }
        let m = margin(n);
        for (index, &value) in values.iter().enumerate() {
            if (index < m || index >= n - m) && value != 0.0 {
                return Err(QmError::SupportExceedsWindow { index, value });
            }
        }
        let curvature = natural_spline_curvature(&values);
        Ok(FunctionSample { values, curvature })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, QmError> {
        Self::new((0..n).map(|i| f(grid_point(n, i))).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0.0; n]).expect("zero vanishes at the ends")
    }

    /// `height · exp(1 - 1/(1 - s²))` with `s = (x - center)/half_width`.
    pub fn bump(n: usize, center: f64, half_width: f64, height: f64) -> Result<Self, QmError> {
        Self::from_fn(n, |x| height * bump_profile((x - center) / half_width))
    }

    pub fn from_json(text: &str) -> Result<Self, QmError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sample serializes")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        grid_point(self.len(), i)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, QmError> {
        if self.len() != other.len() {
            return Err(QmError::GridMismatch(self.len(), other.len()));
        }
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    /// Natural cubic spline through the samples and `0` at both ends of `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let n = self.len();
        let h = 1.0 / (n + 1) as f64;
        let k = ((x / h).floor() as usize).min(n);
        let y = |j: usize| if j == 0 || j == n + 1 { 0.0 } else { self.values[j - 1] };
        let (m0, m1) = (self.curvature[k], self.curvature[k + 1]);
        let a = ((k + 1) as f64 * h - x) / h;
        let b = 1.0 - a;
        a * y(k) + b * y(k + 1) + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }
}

fn grid_point(n: usize, i: usize) -> f64 {
    (i + 1) as f64 / (n + 1) as f64
}

pub fn bump_profile(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Second derivatives of the natural cubic spline through `0, values.., 0` on a
/// uniform grid (Thomas algorithm on the interior knots).
fn natural_spline_curvature(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let h = 1.0 / (n + 1) as f64;
    let y = |j: usize| if j == 0 || j == n + 1 { 0.0 } else { values[j - 1] };
    // interior knots 1..=n: m_{j-1} + 4 m_j + m_{j+1} = 6 (y_{j-1} - 2 y_j + y_{j+1}) / h²
    let rhs: Vec<f64> = (1..=n).map(|j| 6.0 * (y(j - 1) - 2.0 * y(j) + y(j + 1)) / (h * h)).collect();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
        c[i] = 1.0 / denom;
        d[i] = (rhs[i] - if i > 0 { d[i - 1] } else { 0.0 }) / denom;
    }
    let mut m = vec![0.0; n + 2];
    for i in (0..n).rev() {
        m[i + 1] = d[i] - c[i] * m[i + 2];
    }
    m
}

/// `max - min` of the sampled function.
pub fn hofer_norm_upper(f: &FunctionSample) -> f64 {
    let max = f.values.iter().cloned().fold(0.0, f64::max);
    let min = f.values.iter().cloned().fold(0.0, f64::min);
    max - min
}

/// `(max |f - g|, x')` with the smallest index on ties.
pub fn sup_norm_and_argmax(f: &FunctionSample, g: &FunctionSample) -> Result<(f64, f64), QmError> {
    if f.len() != g.len() {
        return Err(QmError::GridMismatch(f.len(), g.len()));
    }
    let mut best = (0.0, f.grid_point(0));
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        let d = (a - b).abs();
        if d > best.0 {
            best = (d, f.grid_point(i));
        }
    }
    Ok(best)
}

/// The affine identification of `(0, 1)` with the torus window `(1/2 - ε, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentWindow {
    pub delta: f64,
    pub epsilon: f64,
}

impl ContainmentWindow {
    /// `ε = safety · min(ε_δ, ε_disk)`, where `ε_disk` keeps the whole disk of
    /// radius `√2 ε` about `u0` (not only the segment of tori) inside the image.
    pub fn new(delta: f64, safety: f64) -> Result<Self, QmError> {
        let eps = epsilon_delta(delta).map_err(|_| QmError::OutOfRegime(delta))?;
        Ok(ContainmentWindow { delta, epsilon: safety * eps.min(disk_epsilon(delta)) })
    }

    pub fn tau_of(&self, x: f64) -> f64 {
        0.5 - self.epsilon + self.epsilon * x
    }

    pub fn x_of(&self, tau: f64) -> f64 {
        (tau - 0.5 + self.epsilon) / self.epsilon
    }
}

/// `f_{B²}`: a radial function about `u0` whose value on the torus `T_τ` is `f(τ)`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub f: FunctionSample,
    pub window: ContainmentWindow,
}

impl RadialProfile {
    pub fn eval(&self, u: [f64; 2]) -> f64 {
        let rho = ((u[0] - BASE_POINT[0]).powi(2) + (u[1] - BASE_POINT[1]).powi(2)).sqrt();
        let tau = 0.5 - rho / 2f64.sqrt();
        self.f.eval(self.window.x_of(tau))
    }
}

pub fn build_f_b2(f: &FunctionSample, delta: f64) -> Result<RadialProfile, QmError> {
    Ok(RadialProfile { f: f.clone(), window: ContainmentWindow::new(delta, DEFAULT_SAFETY)? })
}

/// `f̃ = f_{B²} ∘ π ∘ Θ_δ`, extended by zero across the anti-diagonal.
pub fn build_tilde_f(f: &FunctionSample, delta: f64) -> Result<HamiltonianField, QmError> {
    let profile = build_f_b2(f, delta)?;
    let rho = 2f64.sqrt() * profile.window.epsilon;
    // support radius from the largest v1 reached over the disk |u - u0| <= rho
    let reach = (0..720)
        .flat_map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / 720.0).sin_cos();
            (1..=20).map(move |j| {
                let r = rho * j as f64 / 20.0;
                fiber_extent([BASE_POINT[0] + r * c, BASE_POINT[1] + r * s])
            })
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let radius = ((1.0 + reach) / (2.0 * delta)).sqrt().min(1.0);
    let lower = ((1.0 - reach) / (2.0 * delta)).sqrt();
    let support = ((radius + 1.0) / 2.0).max(lower).min(1.0);
    let desc = format!("f~ (delta = {delta}, epsilon = {})", profile.window.epsilon);
    Ok(HamiltonianField::new(desc, (support, support), true, move |_, z1, z2| {
        let (Ok(a), Ok(b)) = (DiskPoint::new(z1), DiskPoint::new(z2)) else {
            return 0.0;
        };
        match moment_map(&theta_delta(a, delta), &theta_delta(b, delta)) {
            Ok(u) => profile.eval(u),
            Err(_) => 0.0,
        }
    }))
}

/// `(|μ| - D/(δ vol))/C_δ`, unclamped.
pub fn diameter_lower_bound(mu_value: f64, delta: f64, defect: f64) -> f64 {
    (mu_value.abs() - defect / (delta * ambient_volume())) / lipschitz_constant(delta)
}

/// A lower bound is vacuous below zero.
pub fn clamp_bound(raw: f64) -> f64 {
    raw.max(0.0)
}

/// Defect bound and the valuation it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectInfo {
    pub defect: f64,
    pub valuation: String,
    pub tau: String,
}

/// Runs the toric pipeline for `S² × S²` at the given bulk parameter.
pub fn toric_defect(tau: &BigRational, cutoff: i64) -> Result<DefectInfo, QmError> {
    let work = Exponent::integer(cutoff + toric::PRECISION_GUARD);
    let fixture = ToricFixture::s2xs2(tau, &work, 1)?;
    let run = toric::defect_pipeline(&fixture, &Exponent::integer(cutoff))?;
    let worst = run.valuations.iter().min().cloned().ok_or(ToricError::ZeroClass)?;
    Ok(DefectInfo {
        defect: crate::novikov::rational_to_f64(&run.defect),
        valuation: worst.to_string(),
        tau: tau.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub delta: f64,
    pub tau: f64,
    pub mu_value: f64,
    pub lipschitz: f64,
    pub defect_bound: f64,
    pub defect_valuation: String,
    pub volume: f64,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    pub inputs: String,
}

impl BoundCertificate {
    pub fn consistent(&self) -> bool {
        self.upper_bound.is_none_or(|u| self.lower_bound <= u)
    }
}

/// Smooth radial cutoff equal to 1 on `|r - center| <= a` and 0 beyond `2a`.
fn plateau(r: f64, center: f64, a: f64) -> f64 {
    let d = (r - center).abs();
    if d <= a {
        1.0
    } else if d >= 2.0 * a {
        0.0
    } else {
        let s = (d - a) / a;
        let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        g(1.0 - s) / (g(1.0 - s) + g(s))
    }
}

/// `H = h β(|z1|) β(|z2|)` with `β = 1` near `|z| = 1/√(2δ)`, the preimage of `S¹₀`.
pub fn plateau_hamiltonian(h: f64, delta: f64) -> HamiltonianField {
    let center = (1.0 / (2.0 * delta)).sqrt();
    let a = (1.0 - center).min(center) / 4.0;
    let support = (center + 2.0 * a).min(1.0);
    HamiltonianField::new(format!("{h} * plateau(|z1|) * plateau(|z2|)"), (support, support), true, move |_, z1, z2| {
        h * plateau(z1.norm(), center, a) * plateau(z2.norm(), center, a)
    })
}

/// Lower and upper bounds for `d(L_δ, φ_H(L_δ))` with the plateau Hamiltonian of height `h`.
pub fn diameter_certificate(
    h: f64,
    delta: f64,
    defect: &DefectInfo,
    grid: (usize, usize),
) -> Result<BoundCertificate, QmError> {
    geometry::check_delta(delta)?;
    let field = plateau_hamiltonian(h, delta);
    let set = SuperheavySet::EquatorTorus { axes: (0, 0) };
    let mu = evaluate_mu(&field, &set, delta, 0.5, grid, CONSTANCY_TOL)?.require_value()?;
    let cert = BoundCertificate {
        delta,
        tau: 0.5,
        mu_value: mu,
        lipschitz: lipschitz_constant(delta),
        defect_bound: defect.defect,
        defect_valuation: defect.valuation.clone(),
        volume: ambient_volume(),
        lower_bound: diameter_lower_bound(mu, delta, defect.defect),
        upper_bound: Some(h.abs()),
        inputs: field.description,
    };
    check_certificate(cert)
}

fn check_certificate(cert: BoundCertificate) -> Result<BoundCertificate, QmError> {
    match cert.upper_bound {
        Some(upper) if cert.lower_bound > upper => {
            Err(QmError::CertificateInconsistent { lower: cert.lower_bound, upper })
        }
        _ => Ok(cert),
    }
}

/// Bounds for `d(Φ_δ(f), Φ_δ(g))`.
pub fn phi_pair_certificate(
    f: &FunctionSample,
    g: &FunctionSample,
    delta: f64,
    defect: &DefectInfo,
    grid: (usize, usize),
) -> Result<BoundCertificate, QmError> {
    let window = ContainmentWindow::new(delta, DEFAULT_SAFETY)?;
    let (sup, x_star) = sup_norm_and_argmax(f, g)?;
    let diff = f.difference(g)?;
    let tau_star = window.tau_of(x_star);
    let field = build_tilde_f(f, delta)?.difference(&build_tilde_f(g, delta)?);
    let mu = evaluate_mu(&field, &SuperheavySet::TorusT { tau: tau_star }, delta, tau_star, grid, CONSTANCY_TOL)?
        .require_value()?;
    let cert = BoundCertificate {
        delta,
        tau: tau_star,
        mu_value: mu,
        lipschitz: lipschitz_constant(delta),
        defect_bound: defect.defect,
        defect_valuation: defect.valuation.clone(),
        volume: ambient_volume(),
        lower_bound: diameter_lower_bound(sup, delta, defect.defect),
        upper_bound: Some(hofer_norm_upper(&diff)),
        inputs: format!("f, g on {} grid points; |f - g| peaks at x = {x_star}", f.len()),
    };
    check_certificate(cert)
}

/// Central-difference Poisson bracket `Σ_k (∂x_k F ∂y_k G - ∂y_k F ∂x_k G)/2`
/// at `(z1, z2)` with step `h`.
pub fn poisson_bracket_fd(f: &HamiltonianField, g: &HamiltonianField, z: (Complex64, Complex64), h: f64) -> f64 {
    let partial = |field: &HamiltonianField, k: usize, dir: Complex64| {
        let shift = |s: f64| {
            let mut p = [z.0, z.1];
            p[k] += dir * s;
            field.eval(0.0, p[0], p[1])
        };
        (shift(h) - shift(-h)) / (2.0 * h)
    };
    let (re, im) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    (0..2).map(|k| partial(f, k, re) * partial(g, k, im) - partial(f, k, im) * partial(g, k, re)).sum::<f64>() / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub step: f64,
    pub residual: f64,
    pub residual_half_step: f64,
    pub ratio: f64,
    pub points: usize,
}

impl PoissonCheck {
    /// Residual shrinks at least threefold when the step halves (or is already at rounding level).
    pub fn converges(&self) -> bool {
        self.ratio >= 3.0 || self.residual_half_step <= 1e-13
    }
}

/// Maximal finite-difference bracket over perturbed preimages of tori in the window.
pub fn poisson_check(
    f: &HamiltonianField,
    g: &HamiltonianField,
    delta: f64,
    step: f64,
    points: usize,
    seed: u64,
) -> Result<PoissonCheck, QmError> {
    let window = ContainmentWindow::new(delta, DEFAULT_SAFETY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zs = Vec::with_capacity(points);
    while zs.len() < points {
        let tau = window.tau_of(rng.gen_range(0.05..0.95));
        let (v, w) = sample_torus(tau, (1, 1))[0];
        // rotate the sample about e1 so the points are generic on the torus
        let (phi, psi): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let rot = |p: SpherePoint, a: f64| {
            let [x, y, z] = p.v();
            SpherePoint::normalized([x, y * a.cos() - z * a.sin(), y * a.sin() + z * a.cos()])
        };
        let (z1, z2) = (theta_delta_inverse(&rot(v, phi), delta)?, theta_delta_inverse(&rot(w, psi), delta)?);
        let jitter = Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
        zs.push((z1.z() + jitter, z2.z() - jitter));
    }
    let worst = |h: f64| zs.par_iter().map(|&z| poisson_bracket_fd(f, g, z, h).abs()).reduce(|| 0.0, f64::max);
    let (r1, r2) = (worst(step), worst(step / 2.0));
    Ok(PoissonCheck {
        step,
        residual: r1,
        residual_half_step: r2,
        ratio: if r2 > 0.0 { r1 / r2 } else { f64::INFINITY },
        points,
    })
}

type SphereFn = dyn Fn(f64, &SpherePoint, &SpherePoint) -> f64 + Send + Sync;

/// A Hamiltonian on `S² × S²`.
#[derive(Clone)]
pub struct SphereHamiltonian {
    evaluate: Arc<SphereFn>,
    pub autonomous: bool,
}

impl SphereHamiltonian {
    pub fn new<F>(autonomous: bool, f: F) -> Self
    where
        F: Fn(f64, &SpherePoint, &SpherePoint) -> f64 + Send + Sync + 'static,
    {
        SphereHamiltonian { evaluate: Arc::new(f), autonomous }
    }

    pub fn eval(&self, t: f64, v: &SpherePoint, w: &SpherePoint) -> f64 {
        (self.evaluate)(t, v, w)
    }
}

/// Nodes on `S²` for the area form: Gauss-Legendre in `v1`, trapezoid in azimuth.
fn sphere_nodes(q: &Quadrature) -> Vec<(SpherePoint, f64)> {
    let da = 2.0 * PI / q.angular as f64;
    gl_nodes(q.radial, -1.0, 1.0)
        .into_iter()
        .flat_map(|(h, w)| {
            let r = (1.0 - h * h).sqrt();
            (0..q.angular).map(move |k| {
                let (s, c) = (k as f64 * da).sin_cos();
                (SpherePoint::normalized([h, r * c, r * s]), w * da)
            })
        })
        .collect()
}

/// Average of `H_t` over `S² × S²` against the product area form.
pub fn sphere_mean(h: &SphereHamiltonian, t: f64, q: &Quadrature) -> f64 {
    let nodes = sphere_nodes(q);
    let total: f64 =
        nodes.par_iter().map(|(v, wv)| nodes.iter().map(|(w, ww)| ww * h.eval(t, v, w)).sum::<f64>() * wv).sum();
    total / (16.0 * PI * PI)
}

/// `H_t - mean(H_t)`; the mean is precomputed when `H` is autonomous.
pub fn normalize_hamiltonian(h: &SphereHamiltonian, q: &Quadrature) -> SphereHamiltonian {
    let inner = h.clone();
    if h.autonomous {
        let mean = sphere_mean(h, 0.0, q);
        SphereHamiltonian::new(true, move |t, v, w| inner.eval(t, v, w) - mean)
    } else {
        let q = *q;
        SphereHamiltonian::new(false, move |t, v, w| inner.eval(t, v, w) - sphere_mean(&inner, t, &q))
    }
}
