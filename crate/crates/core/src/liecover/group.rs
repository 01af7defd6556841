//! Group-level checks: the deviation of `log(exp(ru)·exp(x))` from `x + ru`, and covering of
//! conjugated neighbourhoods `a·exp(rΔ)·a⁻¹`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    cover_cells, dy, norm_hi, qint, qmatmul, qmatvec, qsqrt, Algebra, CellConfig, CellProblem, CellReport, QMat, QVec,
    SimplexLattice,
};
use crate::error::{Error, Result};
use crate::rignum::{product_log_deviation, DyInterval, Dyadic, IMatrix, Round};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `a Ū a⁻¹ ⊆ ⋃ f⁻¹ U`.
    Left,
    /// `a Ū a⁻¹ ⊆ ⋃ U f⁻¹`.
    Right,
}

/// `U = exp(rΔ)` and `F = {exp(−ru) : u ∈ M}`.
#[derive(Clone, Debug)]
pub struct GroupCover {
    pub algebra: Algebra,
    pub r: Dyadic,
    pub c: BigRational,
    /// Certified sup of `‖log(exp(ru)exp(x)) − (x + ru)‖` over `x ∈ rΔ̄` and `u ∈ M`.
    pub deviation_left: Dyadic,
    pub deviation_right: Dyadic,
    pub halvings: u32,
    /// Enclosures of the elements of `F`.
    pub f: Vec<IMatrix>,
    pub assumptions: Vec<String>,
}

const PREC: u32 = 128;

fn interval_vec(x: &[BigRational]) -> Vec<DyInterval> {
    x.iter().map(|v| DyInterval::from_rational(v, PREC)).collect()
}

/// Bounding box of `r·{w_i}`.
fn hull_box(points: &[QVec], r: &Dyadic) -> Vec<DyInterval> {
    let rr = DyInterval::point(r.clone(), PREC);
    let dim = points[0].len();
    (0..dim)
        .map(|k| {
            let mut acc: Option<DyInterval> = None;
            for p in points {
                let v = &DyInterval::from_rational(&p[k], PREC) * &rr;
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.hull(&v),
                });
            }
            acc.expect("nonempty")
        })
        .collect()
}

fn split(b: &[DyInterval]) -> (Vec<DyInterval>, Vec<DyInterval>) {
    crate::cover::split_widest(b).expect("nondegenerate box")
}

/// Sup over the box of the deviation norm, refining up to `depth` times where the bound exceeds
/// `limit`; `None` if some piece stays above.
fn deviation_on_box(
    alg: &Algebra,
    fixed: &IMatrix,
    b: &[DyInterval],
    side: Side,
    limit: &Dyadic,
    depth: u32,
) -> Result<Option<Dyadic>> {
    let x = alg.to_matrix(b);
    let dev = match side {
        Side::Left => product_log_deviation(fixed, &x),
        Side::Right => product_log_deviation(&x, fixed),
    };
    let bound = match dev {
        Ok(m) => Some(norm_hi(&alg.coords(&m))),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    match bound {
        Some(v) if &v < limit => Ok(Some(v)),
        _ if depth == 0 => Ok(None),
        _ => {
            let (l, r) = split(b);
            let a = deviation_on_box(alg, fixed, &l, side, limit, depth - 1)?;
            let c = deviation_on_box(alg, fixed, &r, side, limit, depth - 1)?;
            Ok(match (a, c) {
                (Some(a), Some(c)) => Some(a.max(c)),
                _ => None,
            })
        }
    }
}

fn try_radius(lat: &SimplexLattice, alg: &Algebra, c: &BigRational, r: &Dyadic) -> Result<Option<(Dyadic, Dyadic)>> {
    let limit = (&dy(c, PREC, Round::Down) * r).round(PREC, Round::Down);
    let cell = hull_box(&lat.simplex.vertices, r);
    let rr = DyInterval::point(r.clone(), PREC);
    let mut worst = (Dyadic::zero(), Dyadic::zero());
    for idx in 0..lat.len() {
        let u: Vec<DyInterval> = interval_vec(&lat.point(idx)).iter().map(|v| v * &rr).collect();
        let um = alg.to_matrix(&u);
        for side in [Side::Left, Side::Right] {
            match deviation_on_box(alg, &um, &cell, side, &limit, 4)? {
                Some(v) => {
                    let w = if side == Side::Left { &mut worst.0 } else { &mut worst.1 };
                    if v > *w {
                        *w = v;
                    }
                }
                None => return Ok(None),
            }
        }
    }
    Ok(Some(worst))
}

/// Whether both deviation bounds certify below `c·r` at this `r`, `c` the lattice margin.
pub fn radius_certifies(lat: &SimplexLattice, alg: Algebra, r: &Dyadic) -> Result<bool> {
    let c = lat.margin.clone().ok_or_else(|| Error::Domain("algebra covering margin is not certified".into()))?;
    Ok(try_radius(lat, &alg, &c, r)?.is_some())
}

/// Halve `r` from `1/(8 max‖u‖)` until both deviation bounds stay below `c·r` for all `u ∈ M`.
pub fn choose_r(lat: &SimplexLattice, alg: Algebra) -> Result<GroupCover> {
    choose_r_below(lat, alg, None)
}

/// As [`choose_r`], starting from `min(r_max, 1/(8 max‖u‖))`.
pub fn choose_r_below(lat: &SimplexLattice, alg: Algebra, r_max: Option<&Dyadic>) -> Result<GroupCover> {
    if alg.dim() != lat.simplex.dim {
        return Err(Error::Domain("algebra and simplex dimensions differ".into()));
    }
    let c = lat.margin.clone().ok_or_else(|| Error::Domain("algebra covering margin is not certified".into()))?;
    let mu = lat.max_point_norm();
    let r0 = DyInterval::one(PREC).div(&DyInterval::point(mu.shl(3), PREC))?;
    let mut r = r0.lo().round(24, Round::Down);
    if let Some(m) = r_max {
        if m.signum() <= 0 {
            return Err(Error::Domain("r_max must be positive".into()));
        }
        if *m < r {
            r = m.round(24, Round::Down);
        }
    }
    for halvings in 0..=60 {
        if let Some((dl, dr)) = try_radius(lat, &alg, &c, &r)? {
            let rr = DyInterval::point(r.clone(), PREC);
            let f = (0..lat.len())
                .map(|idx| {
                    let u: Vec<DyInterval> = interval_vec(&lat.point(idx)).iter().map(|v| -&(v * &rr)).collect();
                    crate::rignum::mat_exp_enclosure(&alg.to_matrix(&u))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(GroupCover {
                algebra: alg,
                r,
                c,
                deviation_left: dl,
                deviation_right: dr,
                halvings,
                f,
                assumptions: vec!["(rΔ + ru)_(cr) ⊆ f_u(rΔ) and g_u(rΔ) follow from the certified sup bounds".into()],
            });
        }
        r = r.shl(-1);
    }
    Err(Error::PrecisionExhausted("no radius within 60 halvings certifies the deviation bound".into()))
}

/// Certify `a·exp(rΔ̄)·a⁻¹ ⊆ ⋃_u exp(ru)exp(rΔ)` (left) or `⋃_u exp(rΔ)exp(ru)` (right).
pub fn verify_conjugation(lat: &SimplexLattice, gc: &GroupCover, a: &QMat, side: Side, cfg: &CellConfig) -> Result<CellReport> {
    verify_conjugation_scaled(lat, gc, a, side, cfg, &BigRational::one(), &Dyadic::zero())
}

/// As [`verify_conjugation`] for the source `a·exp(σrΔ̄)·a⁻¹` and targets deflated by a further
/// `extra` in algebra norm.
pub fn verify_conjugation_scaled(
    lat: &SimplexLattice,
    gc: &GroupCover,
    a: &QMat,
    side: Side,
    cfg: &CellConfig,
    scale: &BigRational,
    extra: &Dyadic,
) -> Result<CellReport> {
    if !scale.is_positive() || extra.signum() < 0 {
        return Err(Error::Domain("scale must be positive and the extra margin nonnegative".into()));
    }
    let alg = gc.algebra;
    let l = alg.conjugation(a)?;
    let images: Vec<QVec> =
        lat.simplex.vertices.iter().map(|v| qmatvec(&l, v).into_iter().map(|x| x * scale).collect()).collect();
    // η bounds the nonlinear part for y ∈ a·rΔ̄·a⁻¹, per lattice point
    let r = &gc.r;
    let rr = DyInterval::point(r.clone(), PREC);
    let ybox = hull_box(&images, r);
    let limit = (&dy(&gc.c, PREC, Round::Down) * r).round(PREC, Round::Down);
    let mut eta = Dyadic::zero();
    for idx in 0..lat.len() {
        let u: Vec<DyInterval> = interval_vec(&lat.point(idx)).iter().map(|v| -&(v * &rr)).collect();
        let um = alg.to_matrix(&u);
        let v = match deviation_on_box(&alg, &um, &ybox, side, &limit, 4)? {
            Some(v) => v,
            None => {
                let ym = alg.to_matrix(&ybox);
                let dev = match side {
                    Side::Left => product_log_deviation(&um, &ym)?,
                    Side::Right => product_log_deviation(&ym, &um)?,
                };
                norm_hi(&alg.coords(&dev))
            }
        };
        if v > eta {
            eta = v;
        }
    }
    let margin = (eta.to_rational() + extra.to_rational()) / r.to_rational();
    let source: QMat = {
        let cols: Vec<QVec> = images.iter().map(|y| lat.simplex.bary(y)).collect();
        (0..lat.n).map(|j| cols.iter().map(|col| col[j].clone()).collect()).collect()
    };
    cover_cells(&CellProblem { lattice: lat, source, margin }, cfg)
}

/// Upper bound for `‖exp(y) − I‖_∞` (max row sum) over `y ∈ a·exp(σrΔ̄)·a⁻¹`.
pub fn exp_offset_bound(lat: &SimplexLattice, gc: &GroupCover, a: &QMat, scale: &BigRational) -> Result<Dyadic> {
    let l = gc.algebra.conjugation(a)?;
    let images: Vec<QVec> =
        lat.simplex.vertices.iter().map(|v| qmatvec(&l, v).into_iter().map(|x| x * scale).collect()).collect();
    let y = gc.algebra.to_matrix(&hull_box(&images, &gc.r));
    let e = crate::rignum::mat_exp_enclosure(&y)?;
    let n = e.dim();
    let mut worst = Dyadic::zero();
    for i in 0..n {
        let mut row = Dyadic::zero();
        for j in 0..n {
            let mut x = e.get(i, j).clone();
            if i == j {
                x = &x - &DyInterval::one(PREC);
            }
            row = (&row + &x.mag()).round(PREC, Round::Up);
        }
        if row > worst {
            worst = row;
        }
    }
    Ok(worst)
}

/// Exact `κ(a) ≤ kappa` for `d ≤ 2`, using `κ + 1/κ = ‖a‖_F² / |det a|` when `d = 2`.
pub fn condition_at_most(a: &QMat, kappa: &BigRational) -> Result<bool> {
    match a.len() {
        1 => Ok(!a[0][0].is_zero() && kappa >= &BigRational::one()),
        2 => {
            let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
            if det.is_zero() {
                return Err(Error::Domain("singular matrix".into()));
            }
            let f2 = a.iter().flatten().fold(BigRational::zero(), |acc, x| acc + x * x);
            Ok(kappa >= &BigRational::one() && f2 / det.abs() <= kappa + kappa.recip())
        }
        d => {
            let m = IMatrix::from_rationals(d, &a.iter().flatten().cloned().collect::<Vec<_>>(), PREC)?;
            Ok(m.condition()?.hi() <= &dy(kappa, PREC, Round::Down))
        }
    }
}

/// Gate on `κ(a) ≤ k`, choose `r`, and certify the conjugation covering on one side.
pub fn choose_r_verify_group(lat: &SimplexLattice, alg: Algebra, a: &QMat, side: Side, cfg: &CellConfig) -> Result<GroupCover> {
    if !condition_at_most(a, &qint(lat.k as i64))? {
        return Err(Error::Domain(format!("κ(a) exceeds k = {}", lat.k)));
    }
    let gc = choose_r(lat, alg)?;
    verify_conjugation(lat, &gc, a, side, cfg)?;
    Ok(gc)
}

fn rotation(t: &BigRational) -> QMat {
    let one = BigRational::one();
    let den = &one + t * t;
    let c = (&one - t * t) / &den;
    let s = qint(2) * t / &den;
    vec![vec![c.clone(), -s.clone()], vec![s, c]]
}

/// `a = R₁·diag(σ, 1)·R₂` with rational rotations and `1 ≤ σ < kappa`, so `κ(a) = σ`.
pub fn sample_conditioned(d: usize, kappa: &BigRational, rng: &mut ChaCha8Rng) -> Result<QMat> {
    let unit = |rng: &mut ChaCha8Rng| BigRational::new(rng.gen_range(0i64..(1 << 16)).into(), (1i64 << 16).into());
    match d {
        1 => Ok(vec![vec![BigRational::one() + unit(rng)]]),
        2 => {
            let sigma = BigRational::one() + (kappa - BigRational::one()) * unit(rng);
            let t1 = qint(2) * unit(rng) - BigRational::one();
            let t2 = qint(2) * unit(rng) - BigRational::one();
            let diag = vec![vec![sigma, BigRational::zero()], vec![BigRational::zero(), BigRational::one()]];
            Ok(qmatmul(&qmatmul(&rotation(&t1), &diag), &rotation(&t2)))
        }
        _ => Err(Error::Domain("sampling is implemented for d ≤ 2".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropositionReport {
    pub samples: usize,
    pub passed: usize,
    pub cells: usize,
}

/// Check `a Ū a⁻¹ ⊆ (⋃ f⁻¹U) ∩ (⋃ U f⁻¹)` for seeded samples `a` with `κ(a) ≤ kappa`.
pub fn verify_proposition_region(
    lat: &SimplexLattice,
    gc: &GroupCover,
    kappa: &BigRational,
    samples: usize,
    seed: u64,
    cfg: &CellConfig,
) -> Result<PropositionReport> {
    if kappa > &qint(lat.k as i64) {
        return Err(Error::Domain("κ exceeds the lattice scale k".into()));
    }
    let d = gc.algebra.matrix_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropositionReport { samples, passed: 0, cells: 0 };
    for s in 0..samples {
        let a = sample_conditioned(d, kappa, &mut rng)?;
        report.cells += check_sample(lat, gc, &a, kappa, cfg).map_err(|e| sample_failure(s, &a, e))?;
        report.passed += 1;
    }
    Ok(report)
}

/// Both sides of the conjugation covering for one `a`; returns the number of cells.
pub fn check_sample(lat: &SimplexLattice, gc: &GroupCover, a: &QMat, kappa: &BigRational, cfg: &CellConfig) -> Result<usize> {
    if !condition_at_most(a, kappa)? {
        return Err(Error::Domain("κ(a) exceeds the requested bound".into()));
    }
    let l = verify_conjugation(lat, gc, a, Side::Left, cfg)?;
    let r = verify_conjugation(lat, gc, a, Side::Right, cfg)?;
    Ok(l.cells + r.cells)
}

fn sample_failure(idx: usize, a: &QMat, e: Error) -> Error {
    let entries: Vec<String> = a.iter().flatten().map(|x| format!("{x}")).collect();
    match e {
        Error::CoverageFailure { reason, witness } => {
            Error::SampleFailure(format!("sample {idx}, a = [{}]: {reason} at {witness}", entries.join(", ")))
        }
        other => other,
    }
}

/// Norm of `u ∈ M` as an enclosure, for reports.
pub fn point_norm(lat: &SimplexLattice, idx: usize) -> DyInterval {
    let p = lat.point(idx);
    qsqrt(&super::dot(&p, &p), PREC)
}

#[cfg(test)]
mod tests {
    use super::super::{build_simplex, enumerate_lattice, q, verify_algebra_covering};
    use super::*;

    fn gl1_cover() -> (SimplexLattice, GroupCover) {
        let mut lat = enumerate_lattice(2, 1, build_simplex(1).unwrap(), 10).unwrap();
        verify_algebra_covering(&mut lat, &CellConfig::default(), 2).unwrap();
        let gc = choose_r(&lat, Algebra::Gl(1)).unwrap();
        (lat, gc)
    }

    #[test]
    fn abelian_group_has_no_deviation() {
        let (lat, gc) = gl1_cover();
        let cr = &dy(&gc.c, 64, Round::Down) * &gc.r;
        assert!(gc.deviation_left < cr && gc.deviation_right < cr);
        assert_eq!(gc.f.len(), 2);
        let id = vec![vec![BigRational::one()]];
        verify_conjugation(&lat, &gc, &id, Side::Left, &CellConfig::default()).unwrap();
    }

    #[test]
    #[ignore]
    fn gl2_timing() {
        let t = std::time::Instant::now();
        let mut lat = enumerate_lattice(5, 1, build_simplex(4).unwrap(), 1000).unwrap();
        let c = verify_algebra_covering(&mut lat, &CellConfig::default(), 3).unwrap();
        eprintln!("c = {c} ({:?})", t.elapsed());
        let gc = choose_r(&lat, Algebra::Gl(2)).unwrap();
        eprintln!("r = {} after {} ({:?})", gc.r.to_f64(), gc.halvings, t.elapsed());
        let id = vec![vec![qint(1), qint(0)], vec![qint(0), qint(1)]];
        for side in [Side::Left, Side::Right] {
            let rep = verify_conjugation(&lat, &gc, &id, side, &CellConfig::default()).unwrap();
            eprintln!("{side:?}: {rep:?} ({:?})", t.elapsed());
        }
        let mut lat2 = enumerate_lattice(5, 2, build_simplex(4).unwrap(), 1000).unwrap();
        let c2 = verify_algebra_covering(&mut lat2, &CellConfig::default(), 3).unwrap();
        eprintln!("k=2 c = {c2} ({:?})", t.elapsed());
        let gc2 = choose_r(&lat2, Algebra::Gl(2)).unwrap();
        eprintln!("r = {} ({:?})", gc2.r.to_f64(), t.elapsed());
        let a = vec![vec![q(5, 6), qint(0)], vec![qint(0), q(6, 5)]];
        let rep = verify_conjugation(&lat2, &gc2, &a, Side::Right, &CellConfig::default());
        eprintln!("diag: {rep:?} ({:?})", t.elapsed());
        let res = verify_proposition_region(&lat2, &gc2, &qint(2), 5, 1, &CellConfig::default());
        eprintln!("prop: {res:?} ({:?})", t.elapsed());
    }

    #[test]
    fn kappa_gate() {
        let lat = enumerate_lattice(5, 2, build_simplex(4).unwrap(), 1000).unwrap();
        let a = vec![vec![qint(10), BigRational::zero()], vec![BigRational::zero(), BigRational::one()]];
        assert!(!condition_at_most(&a, &qint(2)).unwrap());
        let e = choose_r_verify_group(&lat, Algebra::Gl(2), &a, Side::Left, &CellConfig::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn samples_respect_kappa() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = sample_conditioned(2, &q(3, 2), &mut rng).unwrap();
            assert!(condition_at_most(&a, &q(3, 2)).unwrap());
        }
    }
}
