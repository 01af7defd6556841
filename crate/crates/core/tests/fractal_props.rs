use cantorcert::construct::pair::homogeneous_1d;
use cantorcert::fractal::{
    approximate_set, dim_self_similar, product_ifs, validate_ifs, Grid1D, HomogeneousIFS, Verdict,
};
use cantorcert::rignum::{DyInterval, Dyadic, PowProduct};
use num_rational::BigRational;
use proptest::prelude::*;

// n equal pieces of ratio 1/(n+extra), evenly spread over [0, 1]
fn uniform(n: u64, extra: u64, prec: u32) -> HomogeneousIFS {
    let den = (n + extra) as i64;
    let ell = DyInterval::from_ratio(1, den, prec);
    let exact = PowProduct::from_rational(&BigRational::new(1.into(), den.into())).unwrap();
    let step = (&DyInterval::one(prec) - &ell).div(&DyInterval::from_i64(n as i64 - 1, prec)).unwrap();
    homogeneous_1d(&ell, Some(exact), Grid1D::arithmetic(DyInterval::zero(prec), n, step))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deeper_boxes_sit_inside_shallower(n in 2u64..5, extra in 1u64..4, k in 0u32..3) {
        // piece ends that meet the domain boundary round outward
        let ifs = uniform(n, extra, 96).to_affine();
        let coarse = approximate_set(&ifs, k, 1 << 12).unwrap();
        let fine = approximate_set(&ifs, k + 1, 1 << 12).unwrap();
        for b in &fine {
            prop_assert!(coarse.iter().any(|c| c.iter().zip(b).all(|(x, y)| x.inflate(&Dyadic::pow2(-80)).encloses(y))));
        }
    }

    #[test]
    fn product_dimension_adds(n in 2u64..7, extra in 1u64..5, d in 1usize..4) {
        let h = uniform(n, extra, 128);
        let one = dim_self_similar(&h).unwrap();
        let prod = dim_self_similar(&product_ifs(&h, d, 1 << 20).unwrap()).unwrap();
        let scaled = &one * &DyInterval::from_i64(d as i64, 128);
        prop_assert!(prod.overlaps(&scaled));
    }

    #[test]
    fn validity_survives_more_precision(n in 2u64..6, extra in 0u64..4) {
        let lo = validate_ifs(&uniform(n, extra, 40).to_affine());
        let hi = validate_ifs(&uniform(n, extra, 200).to_affine());
        if lo.overall.is_valid() {
            prop_assert!(hi.overall.is_valid());
        }
        if matches!(hi.overall, Verdict::Invalid(_)) {
            prop_assert!(!lo.overall.is_valid());
        }
    }
}
