//! Operational stability of a pair on the line: perturbed right translations re-certify, and
//! chains of covering operators give points in both sets at finite depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::{verify_factored, SweepConfig};
use crate::error::{Error, Result};
use crate::fractal::word_box;
use crate::rignum::{DyInterval, Dyadic, Round};

use super::pair::Pair1D;

/// Resolution of sampled perturbations, in bits below `ρ`.
const SAMPLE_BITS: i64 = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub trials: usize,
    pub perturbed: usize,
    pub witnesses: usize,
    /// Perturbation bound `δ*/4`.
    pub rho: Dyadic,
    /// `δ*/2`, at which perturbed pairs re-certify.
    pub delta: Dyadic,
}

/// Left and right words of a witness, and an enclosure of the common point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub left: Vec<u128>,
    pub right: Vec<u128>,
    pub point: DyInterval,
}

/// Perturb every right translation by less than `ρ` and certify the widened pair at `δ`.
pub fn perturbation_trial(pair: &Pair1D, rho: &Dyadic, delta: &Dyadic, rng: &mut ChaCha8Rng, cfg: &SweepConfig) -> Result<()> {
    let p = &pair.params;
    let prec = p.prec;
    let grid = &pair.k1_prime.trans;
    let n = grid.len();
    let scale = 1i64 << SAMPLE_BITS;
    let mut worst = Dyadic::zero();
    let mut moved = Vec::with_capacity(n as usize);
    for j in 0..n {
        let k = rng.gen_range(1 - scale..scale);
        let e = (rho * &Dyadic::from_i64(k)).shl(-SAMPLE_BITS);
        if e.abs() > worst {
            worst = e.abs();
        }
        moved.push(&grid.get(j)[0] + &DyInterval::point(e, prec));
    }
    // room for the rounding of s·(t′_j + e)
    let worst = &worst + &Dyadic::pow2(-100);
    if &worst >= rho {
        return Err(Error::Domain("perturbation bound too small for the sampling grid".into()));
    }
    let fiber = pair.widened_fiber(&worst);
    let s = p.a.div(&p.ell)?;
    for (j, t) in moved.iter().enumerate() {
        let beta = fiber.right.beta.value(j as u64);
        if !beta.encloses(&(&s * t)) {
            return Err(Error::coverage("widened grid misses a perturbed translation", format!("j = {}", j + 1)));
        }
    }
    verify_factored(&fiber, delta, &pair.certificate.delta_out, cfg).map(|_| ())
}

/// Follow the certificate from `X = (a, v)` for `depth` steps; `X(f′_w′(0))` then lies in
/// `f_w([0, 1])`.
pub fn intersection_witness(pair: &Pair1D, v: &Dyadic, depth: usize, prec: u32) -> Result<Witness> {
    let p = &pair.params;
    let fam = &pair.family;
    let mut x = v.clone();
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for step in 0..depth {
        let (i, j) = pair
            .fiber
            .lookup(&pair.certificate, &x, 0)
            .ok_or_else(|| Error::coverage("point outside the certified region", format!("step {step}, v = {}", x.to_f64())))?;
        let op = fam.op(i * fam.right.len() + j);
        let img = fam.apply(&op, &crate::renorm::ChartPoint::scale1(p.a.clone(), DyInterval::point(x.clone(), prec)))?;
        let crate::renorm::ChartPoint::Scale { t, .. } = img else { unreachable!("scale chart") };
        x = t[0].mid().round(prec, Round::Down);
        left.push(i);
        right.push(j);
    }
    let kl = pair.k1.to_affine();
    let kr = pair.k1_prime.to_affine();
    // X ∘ f′_w′ (0)
    let mut y = DyInterval::zero(prec);
    for &j in right.iter().rev() {
        y = kr.map(j).apply(&[y])[0].clone();
    }
    let point = &(&p.a.with_prec(prec) * &y) + &DyInterval::point(v.clone(), prec);
    let mut z = point.clone();
    for &i in &left {
        z = kl.map(i).inverse()?.apply(&[z])[0].clone();
    }
    let unit = DyInterval::new(Dyadic::zero(), Dyadic::one(), prec)?;
    if !unit.encloses(&z) {
        return Err(Error::coverage("witness point not certified in both sets", format!("f_w⁻¹(x) = {z}")));
    }
    let b = word_box(&kl, &left);
    if !b[0].overlaps(&point) {
        return Err(Error::coverage("witness box check failed", format!("{point}")));
    }
    Ok(Witness { left, right, point })
}

/// `trials` perturbations at `ρ = δ*/4` re-certified at `δ*/2`, and one depth-`depth` witness
/// per trial from a sampled `v ∈ I`.
pub fn stability(pair: &Pair1D, trials: usize, depth: usize, seed: u64, cfg: &SweepConfig) -> Result<StabilityReport> {
    let ds = pair.delta_star();
    let rho = ds.shl(-2);
    let delta = ds.shl(-1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = StabilityReport { trials, perturbed: 0, witnesses: 0, rho: rho.clone(), delta: delta.clone() };
    let i = pair.params.interval_i();
    for t in 0..trials {
        perturbation_trial(pair, &rho, &delta, &mut rng, cfg).map_err(|e| trial_error(t, e))?;
        report.perturbed += 1;
        let u = Dyadic::from_i64(rng.gen_range(0..1i64 << 30)).shl(-30);
        let v = (i.lo() + &(&i.width() * &u)).round(64, Round::Down);
        intersection_witness(pair, &v, depth, 256).map_err(|e| trial_error(t, e))?;
        report.witnesses += 1;
    }
    Ok(report)
}

fn trial_error(t: usize, e: Error) -> Error {
    match e {
        Error::CoverageFailure { reason, witness } => Error::SampleFailure(format!("trial {t}: {reason} at {witness}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::params::choose_parameters;
    use num_rational::BigRational;

    fn worked() -> Pair1D {
        let p = choose_parameters(&BigRational::new(1.into(), 2.into()), 2, &BigRational::new(1.into(), 10.into()), 128).unwrap();
        Pair1D::build(p, &SweepConfig::default()).unwrap()
    }

    #[test]
    fn witness_words_have_the_requested_depth() {
        let pair = worked();
        let v = pair.params.interval_i().mid();
        let w = intersection_witness(&pair, &v, 6, 256).unwrap();
        assert_eq!((w.left.len(), w.right.len()), (6, 6));
    }

    #[test]
    fn perturbed_pairs_recertify() {
        let pair = worked();
        let r = stability(&pair, 5, 6, 11, &SweepConfig::default()).unwrap();
        assert_eq!((r.perturbed, r.witnesses), (5, 5));
    }

    #[test]
    fn large_perturbations_are_not_certified() {
        let pair = worked();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let big = Dyadic::one().shl(-4);
        let r = perturbation_trial(&pair, &big, &pair.delta_star().shl(-1), &mut rng, &SweepConfig::default());
        assert!(r.is_err());
    }
}
