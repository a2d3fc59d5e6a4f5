//! Truncated Novikov series: products, inverses, exponentials and square roots.

use hofer_bounds::novikov::{Exponent, NovikovScalar};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cutoff = Exponent::integer(3);
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());

    // a = T^{1/4}, the bulk parameter at tau = 1/4
    let a = NovikovScalar::t_power(Exponent::ratio(1, 4), cutoff.clone());
    let exp_a = a.exp()?;
    let exp_minus_a = a.scale(&q(-1, 1)).exp()?;
    println!("e^a      = {exp_a}");
    println!("e^a e^-a = {}", &exp_a * &exp_minus_a);

    // 2T^{-1} + 3 - T^{1/2}: negative valuation, inverted exactly mod T^3
    let x = NovikovScalar::from_terms(
        [(Exponent::integer(-1), q(2, 1)), (Exponent::zero(), q(3, 1)), (Exponent::ratio(1, 2), q(-1, 1))],
        cutoff.clone(),
    );
    let inv = x.invert()?;
    println!("x        = {x}  (valuation {})", x.valuation());
    println!("1/x      = {inv}");
    println!("x * 1/x  = {}  (cutoff drops by v(x))", &x * &inv);

    let sq = NovikovScalar::from_terms([(Exponent::integer(1), q(4, 1)), (Exponent::integer(2), q(4, 1))], cutoff);
    let r = sq.sqrt()?;
    println!("sqrt(4T + 4T^2) = {r}");
    println!("squared         = {}", &r * &r);
    println!("e^a at T = 0.5  ~ {:.12}", exp_a.evaluate_at(0.5));
    Ok(())
}
