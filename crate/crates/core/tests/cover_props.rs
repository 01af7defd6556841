use std::sync::OnceLock;

use cantorcert::construct::{choose_parameters, Pair1D};
use cantorcert::cover::{replay_factored, verify_factored, SweepConfig};
use cantorcert::rignum::Dyadic;
use num_rational::BigRational;
use proptest::prelude::*;

fn worked() -> &'static Pair1D {
    static PAIR: OnceLock<Pair1D> = OnceLock::new();
    PAIR.get_or_init(|| {
        let p = choose_parameters(&BigRational::new(1.into(), 2.into()), 2, &BigRational::new(1.into(), 10.into()), 128).unwrap();
        Pair1D::build(p, &SweepConfig::default()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smaller_delta_certifies_and_replays(k in 1i64..64) {
        let pair = worked();
        let d = (&pair.certificate.delta * &Dyadic::from_i64(k)).shl(-6);
        let cert = verify_factored(&pair.fiber, &d, &pair.certificate.delta_out, &SweepConfig::default()).unwrap();
        replay_factored(&cert, &pair.fiber).unwrap();
    }

    #[test]
    fn certificates_are_deterministic(k in 1i64..64) {
        let pair = worked();
        let d = (&pair.certificate.delta * &Dyadic::from_i64(k)).shl(-6);
        let a = verify_factored(&pair.fiber, &d, &pair.certificate.delta_out, &SweepConfig::default()).unwrap();
        let b = verify_factored(&pair.fiber, &d, &pair.certificate.delta_out, &SweepConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
