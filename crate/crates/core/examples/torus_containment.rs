//! Tori T_τ on S² × S²: extents of the projections, the containment threshold
//! and the interval of tori that fit into the image of Θ_δ.

use hofer_bounds::geometry::{
    containment_threshold, disk_epsilon, epsilon_delta, min_delta_for_containment, moment_map, sample_torus,
    torus_in_image, torus_projection_extent,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for tau in [0.1, 0.3, 0.49, 0.5] {
        let samples = sample_torus(tau, (720, 720));
        let extent = samples.iter().map(|(v, _)| v.v()[0].abs()).fold(0.0, f64::max);
        let u = moment_map(&samples[12345].0, &samples[12345].1)?;
        println!(
            "tau = {tau}: sampled extent {extent:.8} vs {:.8}; needs δ > {:.6}; moment map {u:?}",
            torus_projection_extent(tau),
            min_delta_for_containment(tau)
        );
    }
    let t = containment_threshold();
    println!("threshold (2+√3)/4 = {t:.15}");
    for delta in [t - 1e-3, t + 1e-3] {
        println!("δ = {delta:.6}: T_1/2 contained = {}", torus_in_image(0.5, delta, (360, 360)));
    }
    for delta in [0.94, 0.95, 0.99, 1.0] {
        println!("δ = {delta}: ε_δ = {:.6}, disk ε = {:.6}", epsilon_delta(delta)?, disk_epsilon(delta));
    }
    Ok(())
}
