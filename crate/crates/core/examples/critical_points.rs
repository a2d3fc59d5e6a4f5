//! Newton-polygon root finding and Hensel lifting on a toric potential, plus the
//! rejection of a fixture whose critical equations do not separate.

use hofer_bounds::novikov::Exponent;
use hofer_bounds::toric::{self, ToricFixture};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cutoff = Exponent::integer(3);
    let fixture = ToricFixture::from_json(include_str!("../fixtures/s2xs2_tau_1_4.json"))?;
    let pf = toric::build_potential(&fixture)?;
    println!("potential: {pf}");
    let points = toric::solve_critical_points(&pf, &cutoff)?;
    for p in &points {
        let coords: Vec<String> = p.assignment.iter().map(|y| y.to_string()).collect();
        println!("{} y = ({})", p.label(), coords.join(", "));
    }
    let idems = toric::jacobian_idempotents(&pf, &points)?;
    for row in toric::orthogonality_table(&idems, &points, &cutoff)? {
        println!("{row:?}");
    }

    let f2 = ToricFixture::from_json(include_str!("../fixtures/f2_zero.json"))?;
    let pf = toric::build_potential(&f2)?;
    match toric::solve_critical_points(&pf, &cutoff) {
        Ok(_) => println!("F2(0): solved"),
        Err(e) => println!("F2(0): {e}"),
    }
    Ok(())
}
