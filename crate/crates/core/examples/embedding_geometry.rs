//! The embedding θ_δ of the disk into the sphere: height identity, special
//! circles, round trips and the conformal area factor.

use hofer_bounds::geometry::{conformal_area_check, theta_delta, theta_delta_inverse, DiskPoint};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = 0.8;
    for z in [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.25), Complex64::new(-0.3, 0.9)] {
        let v = theta_delta(DiskPoint::new(z)?, delta);
        let back = theta_delta_inverse(&v, delta)?;
        println!(
            "z = {z:.3} -> v = {:.6?}  2δ|z|²-1 = {:.6}  round trip error {:.1e}",
            v.v(),
            2.0 * delta * z.norm_sqr() - 1.0,
            (back.z() - z).norm()
        );
    }
    let r = (1.0f64 / (2.0 * delta)).sqrt();
    println!(
        "|z| = 1/sqrt(2δ) maps to v1 = {:.1e}",
        theta_delta(DiskPoint::new(Complex64::new(0.0, r))?, delta).v()[0]
    );

    for delta in [0.6, 0.8, 1.0] {
        for r in [0.3, 0.7] {
            let t = std::time::Instant::now();
            let ratio = conformal_area_check(delta, r, 2048);
            println!("δ = {delta}, r = {r}: area ratio {ratio:.12} ({:.0?})", t.elapsed());
        }
    }
    Ok(())
}
