use cantorcert::construct::pair::homogeneous_1d;
use cantorcert::fractal::{AffineMapR, Grid1D};
use cantorcert::renorm::{build_renorm_family, AffChart, ChartPoint, RenormFamily};
use cantorcert::rignum::{DyInterval, IMatrix};
use proptest::prelude::*;

const PREC: u32 = 128;

fn family(n: u64, m: u64) -> RenormFamily {
    let ell = DyInterval::from_ratio(1, (n.max(m) + 2) as i64, PREC);
    let grid = |k: u64| {
        let step = (&DyInterval::one(PREC) - &ell).div(&DyInterval::from_i64(k as i64 - 1, PREC)).unwrap();
        Grid1D::arithmetic(DyInterval::zero(PREC), k, step)
    };
    let l = homogeneous_1d(&ell, None, grid(n)).to_affine();
    let r = homogeneous_1d(&ell, None, grid(m)).to_affine();
    build_renorm_family(&l, &r, AffChart::Scale1D).unwrap()
}

fn point(s: (i64, i64), t: (i64, i64)) -> ChartPoint {
    ChartPoint::scale1(DyInterval::from_ratio(s.0, s.1, PREC), DyInterval::from_ratio(t.0, t.1, PREC))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chart_matches_composition(n in 2u64..6, m in 2u64..6, i in 0u64..6, j in 0u64..6,
                                 sp in 1i64..40, tp in -40i64..40, q in 1i64..20) {
        let fam = family(n, m);
        let (i, j) = ((i % n) as u128, (j % m) as u128);
        let op = fam.op(i * fam.right.len() + j);
        let x = point((sp, q), (tp, q));
        let got = fam.apply(&op, &x).unwrap();
        let xm = AffineMapR { linear: IMatrix::scalar(1, &DyInterval::from_ratio(sp, q, PREC)), trans: vec![DyInterval::from_ratio(tp, q, PREC)] };
        let direct = fam.left.map(i).inverse().unwrap().compose(&xm).compose(&fam.right.map(j));
        let ChartPoint::Scale { s, t } = got else { unreachable!() };
        prop_assert!(s.overlaps(direct.linear.get(0, 0)));
        prop_assert!(t[0].overlaps(&direct.trans[0]));
    }

    #[test]
    fn scale_is_preserved(n in 2u64..6, m in 2u64..6, i in 0u64..6, j in 0u64..6, sp in 1i64..40, tp in -40i64..40) {
        let fam = family(n, m);
        let (i, j) = ((i % n) as u128, (j % m) as u128);
        let x = point((sp, 7), (tp, 7));
        let y = fam.right_op(j, &fam.left_inverse(i, &x).unwrap()).unwrap();
        let (ChartPoint::Scale { s: s0, .. }, ChartPoint::Scale { s: s1, .. }) = (&x, &y) else { unreachable!() };
        prop_assert!(s1.overlaps(s0));
    }

    #[test]
    fn homothety_centre_is_fixed(n in 2u64..6, i in 0u64..6, j in 0u64..6) {
        let fam = family(n, 3);
        let i = (i % n) as u128;
        let c = fam.fixed_point_homothety(i).unwrap();
        let op = fam.op(i * fam.right.len() + (j % 3) as u128);
        let img = fam.apply(&op, &c).unwrap();
        let (ChartPoint::Scale { t: t0, .. }, ChartPoint::Scale { t: t1, .. }) = (&c, &img) else { unreachable!() };
        prop_assert!(t1[0].overlaps(&t0[0]));
    }
}
