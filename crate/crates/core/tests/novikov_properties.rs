use hofer_bounds::laurent::LaurentPolynomial;
use hofer_bounds::novikov::{Exponent, NovikovScalar, Valuation};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn series(cutoff: i64) -> impl Strategy<Value = NovikovScalar> {
    prop::collection::vec((-4i64..16, -6i64..=6, 1i64..=5), 0..6).prop_map(move |terms| {
        NovikovScalar::from_terms(
            terms.into_iter().map(|(e, n, d)| (Exponent::ratio(e, 4), q(n, d))),
            Exponent::integer(cutoff),
        )
    })
}

fn positive(cutoff: i64) -> impl Strategy<Value = NovikovScalar> {
    series(cutoff).prop_map(move |x| {
        NovikovScalar::from_terms(x.terms().iter().filter(|(e, _)| e.is_positive()).cloned(), Exponent::integer(cutoff))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms_hold_modulo_cutoff(x in series(3), y in series(3), z in series(3)) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert!((&(&x + &y) + &z).eq_mod(&(&x + &(&y + &z))));
        prop_assert!((&(&x * &y) * &z).eq_mod(&(&x * &(&y * &z))));
        prop_assert!((&x * &(&y + &z)).eq_mod(&(&(&x * &y) + &(&x * &z))));
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn valuation_is_ultrametric(x in series(3), y in series(3)) {
        let sum = &x + &y;
        let low = x.valuation().min(y.valuation());
        prop_assert!(sum.valuation() >= low);
        prop_assert_eq!((-x.clone()).valuation(), x.valuation());
    }

    #[test]
    fn inverse_is_multiplicative(x in series(4), y in series(4)) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let lhs = (&x * &y).invert().unwrap();
        let rhs = &x.invert().unwrap() * &y.invert().unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
        if let (Valuation::Finite(vx), Valuation::Finite(vi)) = (x.valuation(), x.invert().unwrap().valuation()) {
            prop_assert_eq!(vi, -&vx);
        }
    }

    #[test]
    fn exp_turns_sums_into_products(x in positive(3), y in positive(3)) {
        let lhs = (&x + &y).exp().unwrap();
        let rhs = &x.exp().unwrap() * &y.exp().unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
    }

    #[test]
    fn truncation_commutes_with_products(x in series(4), y in series(4)) {
        let c = Exponent::integer(2);
        let (xt, yt) = (x.truncate(&c).unwrap(), y.truncate(&c).unwrap());
        prop_assert!((&xt * &yt).eq_mod(&(&x * &y)));
    }

    #[test]
    fn laurent_evaluation_is_a_ring_map(
        a in series(3), b in series(3), c in series(3),
        e1 in -2i32..3, e2 in -2i32..3, yl in 1i64..4,
    ) {
        let y = NovikovScalar::t_power(Exponent::ratio(yl, 4), Exponent::integer(3));
        let p = LaurentPolynomial::monomial(vec![e1], a).add(&LaurentPolynomial::constant(1, b));
        let r = LaurentPolynomial::monomial(vec![e2], c);
        let point = [y];
        let lhs = p.mul(&r).evaluate(&point).unwrap();
        let rhs = &p.evaluate(&point).unwrap() * &r.evaluate(&point).unwrap();
        prop_assert!(lhs.eq_mod(&rhs));
    }
}
