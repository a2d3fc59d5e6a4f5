//! Potential, critical points, idempotents and the defect bound for S² × S² with bulk.

use hofer_bounds::novikov::Exponent;
use hofer_bounds::toric::{self, ToricFixture, PRECISION_GUARD};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cutoff = Exponent::integer(3);
    let work = Exponent::integer(3 + PRECISION_GUARD);
    for (n, d) in [(1, 8), (1, 4), (3, 8)] {
        let tau = BigRational::new(n.into(), d.into());
        for q in [1, -1] {
            let start = std::time::Instant::now();
            let fixture = ToricFixture::s2xs2(&tau, &work, q)?;
            let run = toric::defect_pipeline(&fixture, &cutoff)?;
            let labels: Vec<String> = run.critical_points.iter().map(|p| p.label()).collect();
            let vals: Vec<String> = run.valuations.iter().map(|v| v.to_string()).collect();
            println!(
                "tau = {tau:<4} q = {q:>2}: points {} valuations [{}] defect {} kronecker {} sum {} ({:.0?})",
                labels.join(" "),
                vals.join(", "),
                run.defect,
                run.orthogonality
                    .iter()
                    .enumerate()
                    .all(|(i, r)| r.iter().enumerate().all(|(j, v)| *v == Some((i == j) as u8))),
                run.sum_is_one,
                start.elapsed()
            );
        }
    }

    let tau = BigRational::new(1.into(), 4.into());
    let run = toric::defect_pipeline(&ToricFixture::s2xs2(&tau, &work, 1)?, &cutoff)?;
    println!("\npotential at tau = 1/4:\n  {}", run.potential);
    println!("class of the (+,+) idempotent:\n  {}", run.expansions[0]);
    Ok(())
}
