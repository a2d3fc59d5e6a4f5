//! Evaluating μ by constancy on superheavy sets, including inconclusive cases.

use hofer_bounds::qmcalc::{evaluate_mu, plateau_hamiltonian, superheavy_registry, HamiltonianField, CONSTANCY_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = 0.95;
    let plateau = plateau_hamiltonian(2.0, delta);
    let height = HamiltonianField::new("|z1|^2", (1.0, 1.0), true, |_, z1, _| z1.norm_sqr());
    for set in superheavy_registry(0.49) {
        for (name, h) in [("plateau", &plateau), ("|z1|^2", &height)] {
            match evaluate_mu(h, &set, delta, 0.49, (120, 120), CONSTANCY_TOL) {
                Ok(ev) => println!("{set:<22} {name:<8} {:?} (spread {:.1e})", ev.value(), ev.constancy_residual),
                Err(e) => println!("{set:<22} {name:<8} {e}"),
            }
        }
    }
    Ok(())
}
