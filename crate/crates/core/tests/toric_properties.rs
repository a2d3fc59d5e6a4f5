use hofer_bounds::novikov::Exponent;
use hofer_bounds::toric::{defect_pipeline, ToricFixture, PRECISION_GUARD};
use num_rational::BigRational;
use proptest::prelude::*;

proptest! {
    // each case runs the full exact pipeline
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn valuation_is_minus_one_for_every_bulk(d in prop::sample::select(vec![3i64, 4, 5, 6, 8]), n in 1i64..8, q_sign in prop::sample::select(vec![1i8, -1])) {
        prop_assume!(2 * n < d);
        let tau = BigRational::new(n.into(), d.into());
        let work = Exponent::integer(3 + PRECISION_GUARD);
        let run = defect_pipeline(&ToricFixture::s2xs2(&tau, &work, q_sign).unwrap(), &Exponent::integer(3)).unwrap();
        prop_assert!(run.valuations.iter().all(|v| *v == Exponent::integer(-1)));
        prop_assert_eq!(run.defect, BigRational::from_integer(12.into()));
        prop_assert!(run.sum_is_one);
    }
}
