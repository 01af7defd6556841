use std::sync::OnceLock;

use cantorcert::construct::{assemble_theorem1, choose_parameters, stability, thin_variant, AssemblyConfig, Pair1D};
use cantorcert::cover::SweepConfig;
use cantorcert::Error;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn worked() -> &'static Pair1D {
    static PAIR: OnceLock<Pair1D> = OnceLock::new();
    PAIR.get_or_init(|| Pair1D::build(choose_parameters(&q(1, 2), 2, &q(1, 10), 128).unwrap(), &SweepConfig::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dimensions_fall_in_the_windows(g in prop::sample::select(vec![(1i64, 3i64), (2, 5), (1, 2), (3, 5), (2, 3)]),
                                      c in 2u64..4, e in prop::sample::select(vec![10i64, 20])) {
        let (gamma, eps) = (q(g.0, g.1), q(1, e));
        let params = match choose_parameters(&gamma, c, &eps, 128) {
            Ok(p) => p,
            Err(Error::SearchExhausted(_) | Error::ResourceLimit(_)) => return Ok(()),
            Err(other) => return Err(TestCaseError::fail(format!("{other}"))),
        };
        prop_assert!(params.failures().is_empty());
        let pair = Pair1D::build(params, &SweepConfig::default()).unwrap();
        let (d, dp) = pair.dims().unwrap();
        let one = BigRational::from_integer(1.into());
        let inside = |x: &cantorcert::rignum::DyInterval, lo: &BigRational, hi: &BigRational| {
            &x.lo().to_rational() > lo && &x.hi().to_rational() < hi
        };
        prop_assert!(inside(&d, &gamma, &(&gamma + &eps)));
        prop_assert!(inside(&dp, &(&one - &gamma), &(&one - &gamma + &eps)));
    }

    #[test]
    fn thinning_bounds_the_thickness(n in 1u64..5) {
        let t = thin_variant(&q(1, 2), 2, &q(1, 10), n, 128, &SweepConfig::default()).unwrap();
        prop_assert!(t.tau_prime_ok);
        prop_assert!(t.min_gap.lo() >= t.gap_floor.lo());
        prop_assert_eq!(t.pair.certificate.classes, 2);
    }

    #[test]
    fn intersections_survive_perturbation(seed in 0u64..10_000) {
        let r = stability(worked(), 3, 6, seed, &SweepConfig::default()).unwrap();
        prop_assert_eq!((r.perturbed, r.witnesses), (3, 3));
    }
}

#[test]
fn plane_certificate_restricts_to_the_line_certificate() {
    let a = assemble_theorem1(2, &q(1, 2), 2, &q(1, 10), &AssemblyConfig::default()).unwrap();
    let line = Pair1D::build(choose_parameters(&q(1, 2), a.c, &q(1, 10), 128).unwrap(), &SweepConfig::default()).unwrap();
    for cert in &a.certificate.coords {
        assert_eq!(cert, &line.certificate);
    }
}
