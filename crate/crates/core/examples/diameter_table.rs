//! Lower bounds for the Hofer distance between L_δ and its images under plateau
//! Hamiltonians of growing height.

use hofer_bounds::qmcalc::{clamp_bound, diameter_certificate, toric_defect};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let defect = toric_defect(&BigRational::new(1.into(), 4.into()), 3)?;
    println!("defect {} from valuation {}", defect.defect, defect.valuation);
    for delta in [0.6, 1.0] {
        println!("δ = {delta}");
        for h in [0.0, 1.0, 10.0, 100.0, 1000.0] {
            let c = diameter_certificate(h, delta, &defect, (120, 120))?;
            println!(
                "  h = {h:>6}: {:>10.4} <= d <= {:>8}",
                clamp_bound(c.lower_bound),
                c.upper_bound.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
