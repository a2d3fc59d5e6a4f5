//! Functions on an interval become commuting Hamiltonians f̃ on B² × B²; the
//! distance between their time-one images is bounded from both sides.

use hofer_bounds::qmcalc::{
    build_tilde_f, phi_pair_certificate, poisson_check, toric_defect, ContainmentWindow, FunctionSample,
    DEFAULT_SAFETY, POISSON_STEP,
};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = 0.95;
    let f = FunctionSample::from_json(include_str!("../fixtures/bump_f.json"))?;
    let g = FunctionSample::from_json(include_str!("../fixtures/bump_g.json"))?;
    let window = ContainmentWindow::new(delta, DEFAULT_SAFETY)?;
    println!("tori T_τ with τ in ({:.5}, 0.5) carry the interval (0, 1)", window.tau_of(0.0));

    let (ft, gt) = (build_tilde_f(&f, delta)?, build_tilde_f(&g, delta)?);
    let pc = poisson_check(&ft, &gt, delta, POISSON_STEP, 64, 7)?;
    println!(
        "{{f~, g~}} residual {:.2e} -> {:.2e} when halving the step (ratio {:.2})",
        pc.residual, pc.residual_half_step, pc.ratio
    );

    let defect = toric_defect(&BigRational::new(1.into(), 4.into()), 3)?;
    let c = phi_pair_certificate(&f, &g, delta, &defect, (180, 180))?;
    println!("{}", serde_json::to_string_pretty(&c)?);
    Ok(())
}
