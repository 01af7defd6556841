use std::sync::OnceLock;

use cantorcert::liecover::{
    build_simplex, choose_r, enumerate_lattice, radius_certifies, verify_algebra_covering,
    verify_conjugation, Algebra, CellConfig, GroupCover, Side, SimplexLattice,
};
use cantorcert::rignum::{DyInterval, IMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn sl2(k: u64) -> (SimplexLattice, GroupCover) {
    let mut lat = enumerate_lattice(4, k, build_simplex(3).unwrap(), 10_000).unwrap();
    verify_algebra_covering(&mut lat, &CellConfig::default(), 3).unwrap();
    let gc = choose_r(&lat, Algebra::Sl2).unwrap();
    (lat, gc)
}

fn sl2_k1() -> &'static (SimplexLattice, GroupCover) {
    static C: OnceLock<(SimplexLattice, GroupCover)> = OnceLock::new();
    C.get_or_init(|| sl2(1))
}

fn sl2_k2() -> &'static (SimplexLattice, GroupCover) {
    static C: OnceLock<(SimplexLattice, GroupCover)> = OnceLock::new();
    C.get_or_init(|| sl2(2))
}

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lattice_size_matches_closed_form(n in 2usize..=6, k in 1u64..=4) {
        let lat = enumerate_lattice(n, k, build_simplex(n - 1).unwrap(), 1_000_000).unwrap();
        let want = if k == 1 { BigInt::from(n) } else { binom((n as u64 + 1) * k - 1, n as u64 - 1) };
        prop_assert_eq!(BigInt::from(lat.len()), want.clone());
        prop_assert_eq!(lat.closed_form(), want);
        prop_assert!(lat.bound_certified());
    }

    #[test]
    fn halving_r_keeps_the_bound(m in 1i64..6) {
        let (lat, gc) = sl2_k1();
        prop_assert!(radius_certifies(lat, Algebra::Sl2, &gc.r.shl(-m)).unwrap());
    }

    #[test]
    fn conjugation_keeps_trace_zero(a in -9i64..10, b in -9i64..10, c in -9i64..10, d in -9i64..10,
                                    x in -50i64..50, y in -50i64..50, z in -50i64..50) {
        prop_assume!(a * d - b * c != 0);
        let q = |v: i64| BigRational::from_integer(v.into());
        let am = IMatrix::from_rationals(2, &[q(a), q(b), q(c), q(d)], 96).unwrap();
        let xm = IMatrix::from_entries(2, vec![
            DyInterval::from_i64(x, 96), DyInterval::from_i64(y, 96), DyInterval::from_i64(z, 96), DyInterval::from_i64(-x, 96),
        ]).unwrap();
        let conj = am.mul(&xm).mul(&am.inverse().unwrap());
        prop_assert!(conj.trace().contains_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn both_sides_certify_for_diagonal_a(m in 0i64..9) {
        let (lat, gc) = sl2_k2();
        let q = |p: i64, d: i64| BigRational::new(p.into(), d.into());
        let a = vec![vec![q(16 + m, 16), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        let l = verify_conjugation(lat, gc, &a, Side::Left, &CellConfig::default());
        let r = verify_conjugation(lat, gc, &a, Side::Right, &CellConfig::default());
        prop_assert!(l.is_ok() && r.is_ok());
    }
}
