//! Configuration, report assembly and the subcommand bodies behind the binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, conformal_area_check, containment_threshold, epsilon_delta, min_delta_for_containment, moment_map,
    sample_torus, theta_delta, theta_delta_inverse, torus_projection_extent, DiskPoint,
};
use crate::novikov::{self, Exponent};
use crate::qmcalc::{
    self, build_tilde_f, diameter_certificate, phi_pair_certificate, poisson_check, toric_defect, BoundCertificate,
    FunctionSample,
};
use crate::toric::{self, ToricFixture};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid number '{0}'")]
    Number(String),
    #[error(transparent)]
    Toric(#[from] toric::ToricError),
    #[error(transparent)]
    Qm(#[from] qmcalc::QmError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn default_cutoff() -> BigRational {
    BigRational::from_integer(toric::DEFAULT_CUTOFF.into())
}

fn default_tau() -> BigRational {
    BigRational::new(1.into(), 4.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "toric::rational_str")]
    pub cutoff: BigRational,
    pub delta: f64,
    #[serde(with = "toric::rational_str")]
    pub tau: BigRational,
    pub q_sign: i8,
    pub torus_grid: (usize, usize),
    pub mu_grid: (usize, usize),
    pub conformal_quadrature: usize,
    pub random_points: usize,
    pub identity_tol: f64,
    pub roundtrip_tol: f64,
    pub sample_tol: f64,
    pub moment_tol: f64,
    pub conformal_tol: f64,
    pub constancy_tol: f64,
    pub poisson_step: f64,
    pub seed: u64,
    pub fixture: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cutoff: default_cutoff(),
            delta: 0.95,
            tau: default_tau(),
            q_sign: 1,
            torus_grid: (720, 720),
            mu_grid: (360, 360),
            conformal_quadrature: 2048,
            random_points: 10_000,
            identity_tol: 1e-12,
            roundtrip_tol: 1e-10,
            sample_tol: 1e-4,
            moment_tol: 1e-9,
            conformal_tol: 1e-6,
            constancy_tol: qmcalc::CONSTANCY_TOL,
            poisson_step: qmcalc::POISSON_STEP,
            seed: 0,
            fixture: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let tolerances = [
            ("identity_tol", self.identity_tol),
            ("roundtrip_tol", self.roundtrip_tol),
            ("sample_tol", self.sample_tol),
            ("moment_tol", self.moment_tol),
            ("conformal_tol", self.conformal_tol),
            ("constancy_tol", self.constancy_tol),
            ("poisson_step", self.poisson_step),
        ];
        if let Some((name, _)) = tolerances.iter().find(|(_, t)| !t.is_finite() || *t <= 0.0) {
            return Err(CliError::Config(format!("{name} must be positive")));
        }
        if self.cutoff <= BigRational::one() {
            return Err(CliError::Config(format!("cutoff must exceed 1, got {}", self.cutoff)));
        }
        if self.q_sign != 1 && self.q_sign != -1 {
            return Err(CliError::Config(format!("q_sign must be 1 or -1, got {}", self.q_sign)));
        }
        let grids = [self.torus_grid.0, self.torus_grid.1, self.mu_grid.0, self.mu_grid.1];
        if grids.contains(&0) || self.conformal_quadrature == 0 {
            return Err(CliError::Config("grid sizes must be positive".into()));
        }
        Ok(())
    }

    fn cutoff_exponent(&self) -> Exponent {
        Exponent::new(self.cutoff.clone())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Parses `"3/8"`, `"2"` or a finite decimal such as `"0.375"` exactly.
pub fn parse_exact(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let numer: BigInt = digits.parse().map_err(|_| CliError::Number(s.into()))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(numer, denom));
    }
    novikov::parse_rational(s).map_err(|_| CliError::Number(s.into()))
}

/// Parses a float, also accepting `"a/b"`.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    if s.contains('/') {
        Ok(novikov::rational_to_f64(&parse_exact(s)?))
    } else {
        s.trim().parse().map_err(|_| CliError::Number(s.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bound(name: &str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: residual <= tolerance,
            residual: Some(residual),
            tolerance: Some(tolerance),
            detail: detail.into(),
        }
    }

    fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, residual: None, tolerance: None, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub passed: bool,
    pub failures: Vec<String>,
    pub data: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip)]
    text: String,
}

impl Report {
    fn new(command: &str, data: serde_json::Value, checks: Vec<Check>, text: String) -> Self {
        let failures: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        Report { schema: SCHEMA, command: command.into(), passed: failures.is_empty(), failures, data, checks, text }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = self.text.clone();
        for c in &self.checks {
            let measured = match (c.residual, c.tolerance) {
                (Some(r), Some(t)) => format!(" residual {r:.3e} (tol {t:.0e})"),
                _ => String::new(),
            };
            let _ = writeln!(out, "[{}] {}{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, measured, c.detail);
        }
        out
    }

    /// Exit status for the binary: 0 iff every check passed.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct CriticalPointData {
    label: String,
    coordinates: Vec<String>,
}

#[derive(Serialize)]
struct DefectData {
    fixture: String,
    tau: String,
    q_sign: i8,
    cutoff: String,
    potential: String,
    critical_points: Vec<CriticalPointData>,
    idempotents: Vec<String>,
    expansions: Vec<String>,
    valuations: Vec<String>,
    defect: String,
    orthogonality: Vec<Vec<Option<u8>>>,
    sum_is_one: bool,
    elapsed_ms: f64,
}

/// Runs the toric pipeline. A fixture file in the config replaces the `S² × S²` fixture.
pub fn cmd_defect(tau: &BigRational, q_sign: i8, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let cutoff = config.cutoff_exponent();
    let work = Exponent::new(&config.cutoff + BigRational::from_integer(toric::PRECISION_GUARD.into()));
    let start = Instant::now();
    let fixture = match &config.fixture {
        Some(path) => ToricFixture::from_json(&read(path)?)?,
        None => ToricFixture::s2xs2(tau, &work, q_sign)?,
    };
    let run = toric::defect_pipeline(&fixture, &cutoff)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let kronecker = run
        .orthogonality
        .iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| *v == Some(u8::from(i == j))));
    let twelve = BigRational::from_integer(12.into());
    let checks = vec![
        Check::flag("kronecker_delta", kronecker, "idempotent i at critical point j, modulo the cutoff"),
        Check::flag("sum_to_one", run.sum_is_one, "sum of idempotents, modulo the cutoff"),
        Check::flag("defect_at_most_12", run.defect <= twelve, format!("defect bound {}", run.defect)),
    ];
    let data = DefectData {
        fixture: fixture.name.clone(),
        tau: tau.to_string(),
        q_sign,
        cutoff: run.cutoff.to_string(),
        potential: run.potential.to_string(),
        critical_points: run
            .critical_points
            .iter()
            .map(|p| CriticalPointData {
                label: p.label(),
                coordinates: p.assignment.iter().map(|y| y.to_string()).collect(),
            })
            .collect(),
        idempotents: run.idempotents.iter().map(|e| e.to_string()).collect(),
        expansions: run.expansions.iter().map(|e| e.to_string()).collect(),
        valuations: run.valuations.iter().map(|v| v.to_string()).collect(),
        defect: run.defect.to_string(),
        orthogonality: run.orthogonality.clone(),
        sum_is_one: run.sum_is_one,
        elapsed_ms,
    };
    let mut text = String::new();
    let _ = writeln!(text, "fixture {} (tau = {}, q = {q_sign}), cutoff T^{}", data.fixture, data.tau, data.cutoff);
    let _ = writeln!(text, "potential: {}", data.potential);
    for (k, p) in data.critical_points.iter().enumerate() {
        let _ = writeln!(text, "critical point {} {}: {}", k, p.label, p.coordinates.join(", "));
        let _ = writeln!(text, "  idempotent: {}", data.idempotents[k]);
        let _ = writeln!(text, "  class: {}", data.expansions[k]);
        let _ = writeln!(text, "  valuation: {}", data.valuations[k]);
    }
    let _ = writeln!(text, "defect bound: {} ({elapsed_ms:.1} ms)", data.defect);
    Ok(Report::new("defect", serde_json::to_value(&data)?, checks, text))
}

#[derive(Serialize)]
struct GeometryData {
    delta: f64,
    tau: f64,
    torus_grid: (usize, usize),
    containment_threshold: f64,
    min_delta_for_tau: f64,
    epsilon_delta: Option<f64>,
    disk_epsilon: f64,
    conformal_ratios: Vec<(f64, f64)>,
}

/// Every geometry invariant at `(δ, τ)`, with measured residuals.
pub fn cmd_geometry_check(delta: f64, tau: f64, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    geometry::check_delta(delta)?;
    geometry::check_tau(tau)?;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut identity: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    for _ in 0..config.random_points {
        let z = loop {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if z.norm() < 1.0 {
                break z;
            }
        };
        let v = theta_delta(DiskPoint::new(z)?, delta);
        identity = identity.max((v.v()[0] - (2.0 * delta * z.norm_sqr() - 1.0)).abs());
        roundtrip = roundtrip.max((theta_delta_inverse(&v, delta)?.z() - z).norm());
    }
    checks.push(Check::bound(
        "v1_identity",
        identity,
        config.identity_tol,
        "v1 = 2 delta |z|^2 - 1 on random disk points",
    ));
    checks.push(Check::bound("inverse_round_trip", roundtrip, config.roundtrip_tol, "theta^-1 o theta = id"));

    let n = config.torus_grid.0.max(8);
    let r_delta = (1.0 / (2.0 * delta)).sqrt();
    let mut circle: f64 = 0.0;
    let mut real: f64 = 0.0;
    for k in 0..n {
        let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        circle = circle.max(theta_delta(DiskPoint::new(Complex64::from_polar(r_delta, a))?, delta).v()[0].abs());
        let x = -1.0 + 2.0 * (k as f64 + 0.5) / n as f64;
        real = real.max(theta_delta(DiskPoint::new(Complex64::new(x, 0.0))?, delta).v()[2].abs());
    }
    checks.push(Check::bound("circle_to_s1_0", circle, config.identity_tol, "|z| = 1/sqrt(2 delta) lands on {v1 = 0}"));
    checks.push(Check::bound("real_axis_to_equator", real, config.identity_tol, "real diameter lands on {v3 = 0}"));

    let samples = sample_torus(tau, config.torus_grid);
    let (mut equations, mut extent_v, mut extent_w, mut moment) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (v, w) in &samples {
        let (a, b) = (v.v(), w.v());
        let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let unit = |p: [f64; 3]| ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs();
        equations = equations.max((norm - 2.0 * tau).abs()).max(s[0].abs()).max(unit(a)).max(unit(b));
        extent_v = extent_v.max(a[0].abs());
        extent_w = extent_w.max(b[0].abs());
        let u = moment_map(v, w)?;
        moment = moment.max((u[0] - tau).abs()).max((u[1] - (1.0 - tau)).abs());
    }
    let expected = torus_projection_extent(tau);
    checks.push(Check::bound(
        "torus_equations",
        equations,
        config.identity_tol,
        "|v| = |w| = 1, |v + w| = 2 tau, (v + w).e1 = 0",
    ));
    checks.push(Check::bound(
        "extent_first_factor",
        (extent_v - expected).abs(),
        config.sample_tol,
        format!("max |v.e1| vs sqrt(1 - tau^2) = {expected}"),
    ));
    checks.push(Check::bound(
        "extent_second_factor",
        (extent_w - expected).abs(),
        config.sample_tol,
        format!("max |w.e1| vs {expected}"),
    ));
    checks.push(Check::bound("moment_map", moment, config.moment_tol, "pi(T_tau) = (tau, 1 - tau)"));

    let needed = min_delta_for_containment(tau);
    let contained = geometry::torus_in_image(tau, delta, config.torus_grid);
    checks.push(Check::flag("torus_contained", contained, format!("T_tau inside the image needs delta > {needed}")));

    let mut ratios = Vec::new();
    let mut conformal: f64 = 0.0;
    for r in [0.3, 0.7] {
        let ratio = conformal_area_check(delta, r, config.conformal_quadrature);
        conformal = conformal.max((ratio - delta).abs());
        ratios.push((r, ratio));
    }
    checks.push(Check::bound(
        "conformal_factor",
        conformal,
        config.conformal_tol,
        "area ratio vs delta at r = 0.3, 0.7",
    ));

    let data = GeometryData {
        delta,
        tau,
        torus_grid: config.torus_grid,
        containment_threshold: containment_threshold(),
        min_delta_for_tau: needed,
        epsilon_delta: epsilon_delta(delta).ok(),
        disk_epsilon: geometry::disk_epsilon(delta),
        conformal_ratios: ratios,
    };
    let mut text = String::new();
    let _ = writeln!(text, "delta = {delta}, tau = {tau}, grid {:?}", config.torus_grid);
    let _ = writeln!(text, "containment threshold (2 + sqrt 3)/4 = {}", data.containment_threshold);
    match data.epsilon_delta {
        Some(e) => {
            let _ = writeln!(text, "epsilon_delta = {e}, disk epsilon = {}", data.disk_epsilon);
        }
        None => {
            let _ = writeln!(text, "no containment interval at this delta");
        }
    }
    Ok(Report::new("geometry-check", serde_json::to_value(&data)?, checks, text))
}

#[derive(Serialize)]
struct DiameterRow {
    h: f64,
    closed_form: f64,
    display_bound: f64,
    certificate: BoundCertificate,
}

/// Lower bounds for the plateau family at each `h`, with the toric defect at `config.tau`.
pub fn cmd_diameter_table(delta: f64, h_values: &[f64], config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    geometry::check_delta(delta)?;
    let cutoff = integer_cutoff(config)?;
    let defect = toric_defect(&config.tau, cutoff)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &h in h_values {
        let certificate = diameter_certificate(h, delta, &defect, config.mu_grid)?;
        let closed_form = (h.abs() - defect.defect / (delta * qmcalc::ambient_volume())) / (1.0 + delta * delta);
        checks.push(Check::bound(
            &format!("closed_form_h={h}"),
            (certificate.lower_bound - closed_form).abs(),
            f64::EPSILON * closed_form.abs().max(1.0),
            "(|h| - D/(delta vol))/(1 + delta^2)",
        ));
        checks.push(Check::flag(&format!("consistent_h={h}"), certificate.consistent(), "lower <= upper"));
        rows.push(DiameterRow {
            h,
            closed_form,
            display_bound: qmcalc::clamp_bound(certificate.lower_bound),
            certificate,
        });
    }
    let mut sorted: Vec<&DiameterRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.h.abs().total_cmp(&b.h.abs()));
    let monotone = sorted
        .windows(2)
        .all(|w| w[0].h.abs() == w[1].h.abs() || w[0].certificate.lower_bound < w[1].certificate.lower_bound);
    checks.push(Check::flag("increasing_in_h", monotone, "lower bound strictly increases with |h|"));

    let mut text = String::new();
    let _ = writeln!(
        text,
        "delta = {delta}, defect {} (valuation {}, tau = {})",
        defect.defect, defect.valuation, defect.tau
    );
    let _ = writeln!(text, "{:>12} {:>14} {:>14}", "h", "lower bound", "upper bound");
    for r in &rows {
        let upper = r.certificate.upper_bound.unwrap_or(f64::NAN);
        let _ = writeln!(text, "{:>12} {:>14.6} {:>14.6}", r.h, r.display_bound, upper);
    }
    let data = serde_json::json!({ "delta": delta, "defect": defect, "rows": rows });
    Ok(Report::new("diameter-table", data, checks, text))
}

fn integer_cutoff(config: &RunConfig) -> Result<i64, CliError> {
    if !config.cutoff.is_integer() {
        return Err(CliError::Config(format!("cutoff {} must be an integer here", config.cutoff)));
    }
    i64::try_from(config.cutoff.to_integer()).map_err(|_| CliError::Config("cutoff too large".into()))
}

pub fn load_sample(path: &Path) -> Result<FunctionSample, CliError> {
    Ok(FunctionSample::from_json(&read(path)?)?)
}

/// Certificate for `d(Φ_δ(f), Φ_δ(g))` plus the commutation check of `f̃, g̃`.
pub fn cmd_phi_bounds(
    delta: f64,
    f: &FunctionSample,
    g: &FunctionSample,
    config: &RunConfig,
) -> Result<Report, CliError> {
    config.validate()?;
    let defect = toric_defect(&config.tau, integer_cutoff(config)?)?;
    let certificate = phi_pair_certificate(f, g, delta, &defect, config.mu_grid)?;
    let (sup, _) = qmcalc::sup_norm_and_argmax(f, g)?;
    let poisson = poisson_check(
        &build_tilde_f(f, delta)?,
        &build_tilde_f(g, delta)?,
        delta,
        config.poisson_step,
        64,
        config.seed,
    )?;
    let checks = vec![
        Check::flag("consistent", certificate.consistent(), "lower <= upper"),
        Check::bound(
            "mu_matches_sup_norm",
            (certificate.mu_value.abs() - sup).abs(),
            1e-6,
            "|mu| at the peak torus vs sup |f - g|",
        ),
        Check::flag(
            "poisson_commute",
            poisson.converges(),
            format!("residual ratio {:.2} when halving the step", poisson.ratio),
        ),
    ];
    let mut text = String::new();
    let _ = writeln!(text, "delta = {delta}, sup |f - g| = {sup} at tau = {}", certificate.tau);
    let _ = writeln!(
        text,
        "{:.6} <= d(Phi(f), Phi(g)) <= {:.6}",
        qmcalc::clamp_bound(certificate.lower_bound),
        certificate.upper_bound.unwrap_or(f64::NAN)
    );
    let data = serde_json::json!({ "certificate": certificate, "poisson": poisson, "sup_norm": sup });
    Ok(Report::new("phi-bounds", data, checks, text))
}
