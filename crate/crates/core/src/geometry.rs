//! The embeddings `θ_δ: B² -> S²`, the tori `T_τ ⊂ S² × S²` and their moment map.
//!
//! `S²` is the unit sphere in `R³`. The disk is identified with the sphere minus
//! the cap `{v1 >= 2δ - 1}` by composing `[√(1-δ|z|²) : √δ z]` with the
//! stereographic chart from `(1, 0, 0)` onto `{v1 = 0} ≅ C`, `ζ = v2 + i v3`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for algebraic identities in floating point.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("|z| = {0} is not inside the open unit disk")]
    OutsideDisk(f64),
    #[error("vector is not on the unit sphere: ||v|^2 - 1| = {0}")]
    NotUnit(f64),
    #[error("outside embedding image: v1 = {v1} >= 2δ - 1 = {bound}")]
    OutsideImage { v1: f64, bound: f64 },
    #[error("no containment interval: δ = {0} <= (2 + √3)/4")]
    NoContainmentInterval(f64),
    #[error("anti-diagonal: moment map continuous but chart excluded (|v + w| = {0})")]
    AntiDiagonal(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self, GeometryError> {
        if z.norm() < 1.0 {
            Ok(DiskPoint(z))
        } else {
            Err(GeometryError::OutsideDisk(z.norm()))
        }
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }
}

/// A unit vector in `R³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    pub fn new(v: [f64; 3]) -> Result<Self, GeometryError> {
        let defect = (dot(&v, &v) - 1.0).abs();
        if defect <= IDENTITY_TOL {
            Ok(SpherePoint(v))
        } else {
            Err(GeometryError::NotUnit(defect))
        }
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(v: [f64; 3]) -> Self {
        let n = dot(&v, &v).sqrt();
        SpherePoint([v[0] / n, v[1] / n, v[2] / n])
    }

    pub fn v(&self) -> [f64; 3] {
        self.0
    }
}

/// Parameters of a torus `T_τ` inside the image of `Θ_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusParams {
    pub tau: f64,
    pub delta: f64,
}

impl TorusParams {
    pub fn new(tau: f64, delta: f64) -> Result<Self, GeometryError> {
        check_tau(tau)?;
        check_delta(delta)?;
        Ok(TorusParams { tau, delta })
    }
}

pub fn check_tau(tau: f64) -> Result<(), GeometryError> {
    if tau > 0.0 && tau <= 0.5 {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("tau = {tau} not in (0, 1/2]")))
    }
}

pub fn check_delta(delta: f64) -> Result<(), GeometryError> {
    if delta > 0.5 && delta <= 1.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("delta = {delta} not in (1/2, 1]")))
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `θ_δ(z)`: `v1 = 2δ|z|² - 1`, `v2 + i v3 = 2√δ z √(1 - δ|z|²)`.
pub fn theta_delta(z: DiskPoint, delta: f64) -> SpherePoint {
    let z = z.0;
    let r2 = z.norm_sqr();
    let zeta = z * (2.0 * delta.sqrt() * (1.0 - delta * r2).sqrt());
    SpherePoint([2.0 * delta * r2 - 1.0, zeta.re, zeta.im])
}

pub fn image_contains(v: &SpherePoint, delta: f64) -> bool {
    v.0[0] < 2.0 * delta - 1.0
}

pub fn theta_delta_inverse(v: &SpherePoint, delta: f64) -> Result<DiskPoint, GeometryError> {
    let bound = 2.0 * delta - 1.0;
    if !image_contains(v, delta) {
        return Err(GeometryError::OutsideImage { v1: v.0[0], bound });
    }
    let r2 = (1.0 + v.0[0]) / (2.0 * delta);
    let denom = 2.0 * delta.sqrt() * (1.0 - delta * r2).sqrt();
    DiskPoint::new(Complex64::new(v.0[1], v.0[2]) / denom)
}

/// `Θ_δ^{-1}` on a pair of sphere points.
pub fn theta_pair_inverse(
    v: &SpherePoint,
    w: &SpherePoint,
    delta: f64,
) -> Result<(DiskPoint, DiskPoint), GeometryError> {
    Ok((theta_delta_inverse(v, delta)?, theta_delta_inverse(w, delta)?))
}

/// Grid samples `(v, w)` of `T_τ = {|v + w| = 2τ, (v + w)·e1 = 0}`.
pub fn sample_torus(tau: f64, grid: (usize, usize)) -> Vec<(SpherePoint, SpherePoint)> {
    let (n_phi, n_psi) = grid;
    let radius = (1.0 - tau * tau).sqrt();
    (0..n_phi)
        .into_par_iter()
        .flat_map_iter(|i| {
            let phi = 2.0 * PI * i as f64 / n_phi as f64;
            let (sp, cp) = phi.sin_cos();
            (0..n_psi).map(move |j| {
                let psi = 2.0 * PI * j as f64 / n_psi as f64;
                let (ss, cs) = psi.sin_cos();
                let half_s = [0.0, tau * cp, tau * sp];
                let p = [radius * cs, -radius * ss * sp, radius * ss * cp];
                (
                    SpherePoint([half_s[0] + p[0], half_s[1] + p[1], half_s[2] + p[2]]),
                    SpherePoint([half_s[0] - p[0], half_s[1] - p[1], half_s[2] - p[2]]),
                )
            })
        })
        .collect()
}

/// `max |v·e1|` over `T_τ`, for either factor.
pub fn torus_projection_extent(tau: f64) -> f64 {
    (1.0 - tau * tau).sqrt()
}

/// Infimum of the `δ` with `T_τ ⊂ Θ_δ(B² × B²)`.
pub fn min_delta_for_containment(tau: f64) -> f64 {
    (1.0 + torus_projection_extent(tau)) / 2.0
}

/// `(2 + √3)/4`, below which no torus near `τ = 1/2` fits.
pub fn containment_threshold() -> f64 {
    min_delta_for_containment(0.5)
}

/// Half-width of the open interval `(1/2 - ε_δ, 1/2]` of contained tori.
pub fn epsilon_delta(delta: f64) -> Result<f64, GeometryError> {
    if delta <= containment_threshold() || delta > 1.0 {
        return Err(GeometryError::NoContainmentInterval(delta));
    }
    let c = 2.0 * delta - 1.0;
    Ok(0.5 - (1.0 - c * c).sqrt())
}

/// Whether every sample of `T_τ` lies in the image of `Θ_δ`.
pub fn torus_in_image(tau: f64, delta: f64, grid: (usize, usize)) -> bool {
    sample_torus(tau, grid).par_iter().all(|(v, w)| image_contains(v, delta) && image_contains(w, delta))
}

/// `π(v, w) = (|v+w|/2 + (v+w)·e1/2, 1 - |v+w|/2)`.
pub fn moment_map(v: &SpherePoint, w: &SpherePoint) -> Result<[f64; 2], GeometryError> {
    let s = [v.0[0] + w.0[0], v.0[1] + w.0[1], v.0[2] + w.0[2]];
    let norm = dot(&s, &s).sqrt();
    if norm < 1e-9 {
        return Err(GeometryError::AntiDiagonal(norm));
    }
    Ok([0.5 * norm + 0.5 * s[0], 1.0 - 0.5 * norm])
}

/// Whether `u` lies in `P = {0 <= u1 <= 2, 0 <= u2 <= 1 - u1/2}` up to `tol`.
pub fn in_polytope(u: [f64; 2], tol: f64) -> bool {
    u[0] >= -tol && u[1] >= -tol && u[0] + 2.0 * u[1] <= 2.0 + tol && u[0] <= 2.0 + tol
}

/// `max(v1, w1)` over the fiber `π^{-1}(u)`, for `u` off the anti-diagonal.
pub fn fiber_extent(u: [f64; 2]) -> f64 {
    let sigma = 2.0 * (1.0 - u[1]);
    let eta = 2.0 * u[0] - sigma;
    let p = (1.0 - sigma * sigma / 4.0).max(0.0).sqrt();
    let cos = (1.0 - (eta / sigma).powi(2)).max(0.0).sqrt();
    eta.abs() / 2.0 + p * cos
}

/// The base point `u0 = (1/2, 1/2)`, image of the torus `T_{1/2}`.
pub const BASE_POINT: [f64; 2] = [0.5, 0.5];

/// Largest `ρ` such that every `u` with `|u - u0| < ρ` lies in the interior of
/// `P` and its whole fiber lies in the image of `Θ_δ`.
pub fn disk_containment_radius(delta: f64) -> f64 {
    let bound = 2.0 * delta - 1.0;
    let bad =
        |u: [f64; 2]| u[0] <= 0.0 || u[1] <= 0.0 || u[0] + 2.0 * u[1] >= 2.0 || u[1] >= 1.0 || fiber_extent(u) >= bound;
    let n_angles = 1440;
    let n_radii = 400;
    let reach = 1.0;
    (0..n_angles)
        .into_par_iter()
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n_angles as f64).sin_cos();
            let at = |r: f64| [BASE_POINT[0] + r * c, BASE_POINT[1] + r * s];
            if bad(at(0.0)) {
                return 0.0;
            }
            let step = reach / n_radii as f64;
            let mut hi = (1..=n_radii).map(|i| i as f64 * step).find(|&r| bad(at(r))).unwrap_or(reach);
            let mut lo = hi - step;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if bad(at(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// `ε` such that the disk `|u - u0| < √2 ε` satisfies `disk_containment_radius`.
pub fn disk_epsilon(delta: f64) -> f64 {
    disk_containment_radius(delta) / 2f64.sqrt()
}

/// Ratio of the `½ω_std`-area of `θ_δ(B²(r))` to the disk area `2πr²`, by
/// Gauss-Legendre quadrature in the radius and the trapezoid rule in the angle.
pub fn conformal_area_check(delta: f64, r: f64, quadrature_n: usize) -> f64 {
    let n = NonZeroUsize::new(quadrature_n.max(1)).unwrap();
    let gl = GaussLegendre::new(n);
    let sd = delta.sqrt();
    let n_alpha = quadrature_n.max(1);
    let d_alpha = 2.0 * PI / n_alpha as f64;
    let area_element = |rho: f64, alpha: f64| {
        let root = (1.0 - delta * rho * rho).sqrt();
        let big_r = 2.0 * sd * rho * root;
        let dr = 2.0 * sd * (1.0 - 2.0 * delta * rho * rho) / root;
        let (sa, ca) = alpha.sin_cos();
        let d_rho = [4.0 * delta * rho, dr * ca, dr * sa];
        let d_alpha = [0.0, -big_r * sa, big_r * ca];
        let n = cross(&d_rho, &d_alpha);
        dot(&n, &n).sqrt()
    };
    let nodes: Vec<(f64, f64)> =
        gl.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * r * (x + 1.0), 0.5 * r * w)).collect();
    let integral: f64 = nodes
        .par_iter()
        .map(|&(rho, w)| {
            let ring: f64 = (0..n_alpha).map(|k| area_element(rho, k as f64 * d_alpha)).sum::<f64>() * d_alpha;
            w * ring
        })
        .sum();
    0.5 * integral / (2.0 * PI * r * r)
}

/// Samples of an equatorial torus `{v_a = 0} × {w_b = 0}`; `axis` indexes the
/// vanishing coordinate (`0` gives `S¹₀`, `2` gives `S¹_eq`).
pub fn sample_equator_torus(axes: (usize, usize), grid: (usize, usize)) -> Vec<(SpherePoint, SpherePoint)> {
    let circle = |axis: usize, n: usize, k: usize| {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        let mut v = [0.0; 3];
        v[(axis + 1) % 3] = c;
        v[(axis + 2) % 3] = s;
        SpherePoint(v)
    };
    let (n1, n2) = grid;
    (0..n1).flat_map(|i| (0..n2).map(move |j| (circle(axes.0, n1, i), circle(axes.1, n2, j)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_delta(disk(0.0, 0.0), 0.8).v(), [-1.0, 0.0, 0.0]);
        let delta: f64 = 0.8;
        let r = (1.0f64 / (2.0 * delta)).sqrt();
        let v = theta_delta(disk(r * 0.6, r * 0.8), delta);
        assert_abs_diff_eq!(v.v()[0], 0.0, epsilon = IDENTITY_TOL);
        let v = theta_delta(disk(0.7, 0.0), delta);
        assert_eq!(v.v()[2], 0.0);
    }

    #[test]
    fn theta_is_unit_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let delta = rng.gen_range(0.51..=1.0);
            let r: f64 = rng.gen_range(0.0..0.999);
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let z = disk(r * a.cos(), r * a.sin());
            let v = theta_delta(z, delta);
            assert!((dot(&v.v(), &v.v()) - 1.0).abs() <= IDENTITY_TOL);
            assert!((v.v()[0] - (2.0 * delta * r * r - 1.0)).abs() <= IDENTITY_TOL);
            let back = theta_delta_inverse(&v, delta).unwrap();
            assert!((back.z() - z.z()).norm() <= 1e-10);
        }
    }

    #[test]
    fn inverse_examples() {
        let south = SpherePoint::new([-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(theta_delta_inverse(&south, 0.7).unwrap().z(), Complex64::new(0.0, 0.0));
        let v = SpherePoint::normalized([0.4, 0.3, (1.0f64 - 0.16 - 0.09).sqrt()]);
        assert!(matches!(theta_delta_inverse(&v, 0.7), Err(GeometryError::OutsideImage { .. })));
    }

    #[test]
    fn image_contains_examples() {
        let v = SpherePoint::normalized([0.99, (1.0f64 - 0.99 * 0.99).sqrt(), 0.0]);
        assert!(image_contains(&v, 1.0));
        let v = SpherePoint::normalized([0.5, (0.75f64).sqrt(), 0.0]);
        assert!(!image_contains(&v, 0.6));
        let x = 0.5 - 1e-9;
        let v = SpherePoint([x, (1.0 - x * x).sqrt(), 0.0]);
        assert!(image_contains(&v, 0.75));
    }

    #[test]
    fn disk_and_sphere_validation() {
        assert!(DiskPoint::new(Complex64::new(1.0, 0.0)).is_err());
        assert!(SpherePoint::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn torus_samples_satisfy_defining_equations() {
        for tau in [0.1, 0.3, 0.5] {
            for (v, w) in sample_torus(tau, (60, 60)) {
                let s = [v.0[0] + w.0[0], v.0[1] + w.0[1], v.0[2] + w.0[2]];
                assert!((dot(&s, &s).sqrt() - 2.0 * tau).abs() <= IDENTITY_TOL);
                assert!(s[0].abs() <= IDENTITY_TOL);
                assert!((dot(&v.0, &v.0) - 1.0).abs() <= IDENTITY_TOL);
                assert!((dot(&w.0, &w.0) - 1.0).abs() <= IDENTITY_TOL);
                let u = moment_map(&v, &w).unwrap();
                assert!((u[0] - tau).abs() <= 1e-9 && (u[1] - (1.0 - tau)).abs() <= 1e-9);
            }
        }
        let (v, w) = sample_torus(0.5, (1, 1))[0];
        let s = [v.0[0] + w.0[0], v.0[1] + w.0[1], v.0[2] + w.0[2]];
        assert_eq!(dot(&s, &s).sqrt(), 1.0);
    }

    #[test]
    fn projection_extent_matches_samples_on_both_factors() {
        let tau = 0.3;
        let samples = sample_torus(tau, (90, 90));
        let m1 = samples.iter().map(|(v, _)| v.0[0].abs()).fold(0.0, f64::max);
        let m2 = samples.iter().map(|(_, w)| w.0[0].abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(m1, torus_projection_extent(tau), epsilon = 1e-4);
        assert_abs_diff_eq!(m1, m2, epsilon = 1e-15);
        assert_abs_diff_eq!(torus_projection_extent(0.5), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(torus_projection_extent(1.0), 0.0);
    }

    #[test]
    fn containment_threshold_and_monotonicity() {
        assert_abs_diff_eq!(containment_threshold(), (2.0 + 3f64.sqrt()) / 4.0, epsilon = 1e-15);
        assert_eq!(min_delta_for_containment(1.0), 0.5);
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let d = min_delta_for_containment(k as f64 / 100.0);
            assert!(d < prev);
            prev = d;
        }
        let t = containment_threshold();
        assert!(torus_in_image(0.5, t + 1e-3, (120, 120)));
        assert!(!torus_in_image(0.5, t - 1e-3, (120, 120)));
    }

    #[test]
    fn epsilon_delta_examples() {
        assert_eq!(epsilon_delta(1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(epsilon_delta(0.95).unwrap(), 0.5 - 0.19f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(epsilon_delta(containment_threshold()), Err(GeometryError::NoContainmentInterval(_))));
        assert!(epsilon_delta(containment_threshold() + 1e-12).unwrap() < 1e-5);
        // tori just inside the interval are contained, just outside are not
        let eps = epsilon_delta(0.95).unwrap();
        assert!(torus_in_image(0.5 - 0.99 * eps, 0.95, (90, 90)));
        assert!(!torus_in_image(0.5 - 1.01 * eps, 0.95, (90, 90)));
    }

    #[test]
    fn moment_map_examples() {
        let e3 = SpherePoint::new([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(moment_map(&e3, &e3).unwrap(), [1.0, 0.0]);
        let e1 = SpherePoint::new([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(moment_map(&e1, &e1).unwrap(), [2.0, 0.0]);
        let m1 = SpherePoint::new([-1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(moment_map(&e1, &m1), Err(GeometryError::AntiDiagonal(_))));
    }

    #[test]
    fn moment_map_lands_in_polytope() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let mut g = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let v = SpherePoint::normalized(g());
            let w = SpherePoint::normalized(g());
            if let Ok(u) = moment_map(&v, &w) {
                assert!(in_polytope(u, 1e-9));
            }
        }
    }

    #[test]
    fn fiber_extent_matches_torus_samples() {
        for tau in [0.2, 0.45] {
            let u = [tau, 1.0 - tau];
            assert_abs_diff_eq!(fiber_extent(u), torus_projection_extent(tau), epsilon = 1e-15);
        }
        // brute force over a general fiber
        let (v0, w0) = (SpherePoint::normalized([0.3, 0.5, 0.2]), SpherePoint::normalized([0.1, -0.2, 0.9]));
        let u = moment_map(&v0, &w0).unwrap();
        let s: Vec<f64> = (0..3).map(|i| v0.0[i] + w0.0[i]).collect();
        let s = [s[0], s[1], s[2]];
        let shat = [s[0] / dot(&s, &s).sqrt(), s[1] / dot(&s, &s).sqrt(), s[2] / dot(&s, &s).sqrt()];
        let a = SpherePoint::normalized(cross(&shat, &[0.0, 0.0, 1.0])).v();
        let b = cross(&shat, &a);
        let p = (1.0 - dot(&s, &s) / 4.0).sqrt();
        let mut best: f64 = -1.0;
        for k in 0..100_000 {
            let t = 2.0 * PI * k as f64 / 100_000.0;
            let p1 = p * (t.cos() * a[0] + t.sin() * b[0]);
            best = best.max(s[0] / 2.0 + p1).max(s[0] / 2.0 - p1);
        }
        assert_abs_diff_eq!(best, fiber_extent(u), epsilon = 1e-9);
    }

    #[test]
    fn disk_radius_is_tighter_than_interval() {
        let delta = 0.95;
        let eps = epsilon_delta(delta).unwrap();
        let eps_disk = disk_epsilon(delta);
        assert!(eps_disk > 0.0 && eps_disk < eps);
        // the whole disk of that radius maps into the image
        let rho = disk_containment_radius(delta);
        for k in 0..360 {
            let (s, c) = (2.0 * PI * k as f64 / 360.0).sin_cos();
            for j in 1..=50 {
                let r = 0.999 * rho * j as f64 / 50.0;
                assert!(fiber_extent([0.5 + r * c, 0.5 + r * s]) < 2.0 * delta - 1.0);
            }
        }
        // at δ = 1 only the edge u1 + 2 u2 = 2 of P limits the disk
        assert_abs_diff_eq!(disk_containment_radius(1.0), 1.0 / 20f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn conformal_area_examples() {
        assert_abs_diff_eq!(conformal_area_check(1.0, 1.0, 512), 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(conformal_area_check(0.8, 0.5, 2048), 0.8, epsilon = 1e-6);
        assert_abs_diff_eq!(conformal_area_check(0.6, 0.3, 2048), 0.6, epsilon = 1e-6);
    }

    #[test]
    fn equator_tori() {
        for (v, w) in sample_equator_torus((0, 2), (12, 12)) {
            assert_eq!(v.v()[0], 0.0);
            assert_eq!(w.v()[2], 0.0);
            assert!((dot(&v.v(), &v.v()) - 1.0).abs() <= IDENTITY_TOL);
        }
    }
}
