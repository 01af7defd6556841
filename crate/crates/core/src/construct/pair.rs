//! The pair on the line, its operator family and the separable covering certificate.

use crate::cover::{max_delta, replay_factored, verify_factored, CoveringCertificate, FiberPair, Partition, Region, SweepConfig};
use crate::error::{Error, Result};
use crate::fractal::{
    dim_self_similar, first_gaps, thickness_homogeneous, validate_ifs, Grid1D, GridAxis, HomogeneousIFS, Translations, ValidityReport,
};
use crate::renorm::{build_renorm_family, AffChart, RenormFamily};
use crate::rignum::{Dyadic, DyInterval, IMatrix, Round};

use super::params::Lemma51Params;

/// Bisection steps spent enlarging `δ_in` after the first success.
const DELTA_REFINE: u32 = 6;

#[derive(Clone, Debug)]
pub struct Pair1D {
    pub params: Lemma51Params,
    pub k1: HomogeneousIFS,
    pub k1_prime: HomogeneousIFS,
    pub family: RenormFamily,
    /// `{a} × I`.
    pub region: Region,
    pub partition: Partition,
    pub fiber: FiberPair,
    pub certificate: CoveringCertificate,
    pub validity: (ValidityReport, ValidityReport),
}

pub fn homogeneous_1d(ell: &DyInterval, exact: Option<crate::rignum::PowProduct>, grid: Grid1D) -> HomogeneousIFS {
    let prec = ell.prec();
    HomogeneousIFS {
        dim: 1,
        lambda: ell.clone(),
        a: IMatrix::identity(1, prec),
        trans: Translations::Product(vec![grid]),
        domain: vec![DyInterval::new(Dyadic::zero(), Dyadic::one(), prec).expect("unit interval")],
        lambda_exact: exact,
        trans_exact: None,
    }
}

/// Margin `δ_out = δa/2` of the right images inside `I`.
pub fn delta_out(p: &Lemma51Params) -> Dyadic {
    (&p.delta * &p.a).lo().shl(-1).round(64, Round::Down)
}

/// Inflation factor of the intermediate interval `J`: `R_i⁻¹` stretches by `ℓ⁻¹`.
fn mid_inflation(p: &Lemma51Params) -> Result<Dyadic> {
    Ok(p.ell.recip()?.hi().shl(1).round(24, Round::Up))
}

fn check_valid(name: &str, r: &ValidityReport) -> Result<()> {
    if r.overall.is_valid() {
        Ok(())
    } else {
        Err(Error::constraint(name, format!("{:?}", r.overall)))
    }
}

/// Certify `B_δin(I) → J → I_(δout)` for a right grid whose axis 1 carries the classes.
pub fn certify_fiber(fiber: &FiberPair, d_out: &Dyadic, ell: &DyInterval, cfg: &SweepConfig) -> Result<(Dyadic, CoveringCertificate)> {
    // J may grow by at most δ_out before the right images leave I_(δout)
    let start = (&(d_out * ell.lo()) * &Dyadic::pow2(-2)).round(24, Round::Down);
    let min = start.shl(-40);
    max_delta(&start, &min, DELTA_REFINE, |d| verify_factored(fiber, d, d_out, cfg))
}

impl Pair1D {
    /// Build both systems on `[0, 1]` from the parameters and certify the covering.
    pub fn build(params: Lemma51Params, cfg: &SweepConfig) -> Result<Self> {
        let grid = params.t_prime.clone();
        Self::with_right_grid(params, grid, cfg)
    }

    /// As [`Pair1D::build`] with a replacement grid for `K₁′` (axis 1 = class).
    pub fn with_right_grid(params: Lemma51Params, right: Grid1D, cfg: &SweepConfig) -> Result<Self> {
        let k1 = homogeneous_1d(&params.ell, Some(params.ell_exact.clone()), params.t.clone());
        let k1_prime = homogeneous_1d(&params.ell, Some(params.ell_exact.clone()), right);
        let (l, r) = (k1.to_affine(), k1_prime.to_affine());
        let validity = (validate_ifs(&l), validate_ifs(&r));
        check_valid("K₁ is a Cantor set", &validity.0)?;
        check_valid("K₁′ is a Cantor set", &validity.1)?;
        let family = build_renorm_family(&l, &r, AffChart::Scale1D)?;
        let i = params.interval_i();
        let region = Region::fiber(params.a.clone(), vec![i.clone()]);
        let fiber = FiberPair::from_family(&family, &params.a, i, params.interval_j(), mid_inflation(&params)?, Some(1))?;
        let d_out = delta_out(&params);
        let (_, certificate) = certify_fiber(&fiber, &d_out, &params.ell, cfg)?;
        Ok(Pair1D { params, k1, k1_prime, family, region, partition: Partition::RightAxis(1), fiber, certificate, validity })
    }

    /// `δ* = min(δ_in, δ_out)`.
    pub fn delta_star(&self) -> Dyadic {
        self.certificate.certified_delta()
    }

    pub fn replay(&self) -> Result<()> {
        replay_factored(&self.certificate, &self.fiber)
    }

    pub fn dims(&self) -> Result<(DyInterval, DyInterval)> {
        Ok((dim_self_similar(&self.k1)?, dim_self_similar(&self.k1_prime)?))
    }

    pub fn thickness(&self) -> Result<(DyInterval, DyInterval)> {
        Ok((thickness_homogeneous(&self.k1)?, thickness_homogeneous(&self.k1_prime)?))
    }

    /// The fiber pair with every right translation widened by `ρ`; a certificate for it covers
    /// all perturbations of `K₁′` of size at most `ρ`.
    pub fn widened_fiber(&self, rho: &Dyadic) -> FiberPair {
        let mut f = self.fiber.clone();
        // R′_j shifts by (a/ℓ)·t′_j on the intermediate fiber
        let s = self.params.a.div(&self.params.ell).expect("ℓ > 0");
        let w = (&s * &DyInterval::point(rho.clone(), s.prec())).hi().clone();
        f.right.beta.origin = f.right.beta.origin.inflate(&w);
        f
    }
}

/// `K₁′` restricted to `j = c′(k−1) + N·l`, `l = 1..c`, from a grid built with `c′ = cN`.
pub fn thin_grid(full: &Grid1D, n_thin: u64) -> Result<Grid1D> {
    if full.axes.len() != 2 || n_thin == 0 || full.axes[1].count % n_thin != 0 {
        return Err(Error::Domain("thinning needs a two-axis grid whose class count is a multiple of N".into()));
    }
    let step = &full.axes[1].step;
    let prec = step.prec();
    let origin = &full.origin + &(step * &DyInterval::from_i64(n_thin as i64 - 1, prec));
    Ok(Grid1D {
        origin,
        axes: vec![
            full.axes[0].clone(),
            GridAxis { count: full.axes[1].count / n_thin, step: step * &DyInterval::from_i64(n_thin as i64, prec) },
        ],
    })
}

#[derive(Clone, Debug)]
pub struct ThinPair {
    pub pair: Pair1D,
    pub n_thin: u64,
    /// `(N−1)ℓ`.
    pub gap_floor: DyInterval,
    pub min_gap: DyInterval,
    pub max_gap: DyInterval,
    pub tau: DyInterval,
    pub tau_prime: DyInterval,
    /// `τ(K₁′) ≤ 1/N` certified.
    pub tau_prime_ok: bool,
    /// `τ(K₁) < 2nℓ` certified.
    pub tau_ok: bool,
}

/// Build with `c′ = cN` and keep the subfamily `j = c′(k−1) + N·l`, `l = 1..c`.
pub fn thin_variant(
    gamma: &num_rational::BigRational,
    c: u64,
    eps: &num_rational::BigRational,
    n_thin: u64,
    prec: u32,
    cfg: &SweepConfig,
) -> Result<ThinPair> {
    if n_thin == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let params = super::params::choose_parameters(gamma, c * n_thin, eps, prec)?;
    let grid = thin_grid(&params.t_prime, n_thin)?;
    let pair = Pair1D::with_right_grid(params, grid, cfg)?;
    let p = &pair.params;
    let gaps = first_gaps(&pair.k1_prime)?;
    let min_gap = gaps.iter().skip(1).fold(gaps[0].clone(), |a, g| a.min(g));
    let max_gap = gaps.iter().skip(1).fold(gaps[0].clone(), |a, g| a.max(g));
    let gap_floor = &p.ell * &DyInterval::from_i64(n_thin as i64 - 1, prec);
    let (tau, tau_prime) = pair.thickness()?;
    let inv_n = DyInterval::from_i64(1, prec).div(&DyInterval::from_i64(n_thin as i64, prec))?;
    let two_nl = &p.ell * &DyInterval::from_i64(2 * p.n as i64, prec);
    let tau_prime_ok = tau_prime.hi() <= inv_n.lo();
    let tau_ok = tau.hi() < two_nl.lo();
    Ok(ThinPair { pair, n_thin, gap_floor, min_gap, max_gap, tau, tau_prime, tau_prime_ok, tau_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::params::choose_parameters;
    use crate::cover::StageCells;
    use num_rational::BigRational;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn worked() -> Pair1D {
        let p = choose_parameters(&q(1, 2), 2, &q(1, 10), 128).unwrap();
        Pair1D::build(p, &SweepConfig::default()).unwrap()
    }

    #[test]
    fn worked_pair_certifies_and_replays() {
        let pair = worked();
        assert!(pair.delta_star().signum() > 0);
        assert_eq!(pair.certificate.classes, 2);
        pair.replay().unwrap();
        let (d, dp) = pair.dims().unwrap();
        let four_sevenths = q(4, 7);
        assert!(d.contains_rational(&four_sevenths) && dp.contains_rational(&four_sevenths));
    }

    #[test]
    fn tampered_operator_is_rejected() {
        let pair = worked();
        let mut cert = pair.certificate.clone();
        if let StageCells::Runs(runs) = &mut cert.stages[1].cells {
            runs[0].op += 1;
        }
        assert!(replay_factored(&cert, &pair.fiber).is_err());
    }

    #[test]
    fn thin_grid_keeps_every_nth_class() {
        let g = Grid1D {
            origin: DyInterval::zero(64),
            axes: vec![
                GridAxis { count: 2, step: DyInterval::from_i64(100, 64) },
                GridAxis { count: 6, step: DyInterval::from_i64(1, 64) },
            ],
        };
        let t = thin_grid(&g, 3).unwrap();
        let vals: Vec<i64> = (0..t.len()).map(|i| t.value(i).mid().to_f64() as i64).collect();
        assert_eq!(vals, vec![2, 5, 102, 105]);
    }

    #[test]
    fn thinning_by_three() {
        let t = thin_variant(&q(1, 2), 2, &q(1, 10), 3, 128, &SweepConfig::default()).unwrap();
        assert_eq!(t.pair.certificate.classes, 2);
        assert!(t.tau_prime_ok, "τ(K₁′) = {}", t.tau_prime);
        assert!(t.min_gap.lo() >= t.gap_floor.lo());
        t.pair.replay().unwrap();
    }

    #[test]
    fn thinning_by_one_is_the_plain_pair() {
        let t = thin_variant(&q(1, 2), 2, &q(1, 10), 1, 128, &SweepConfig::default()).unwrap();
        let plain = worked();
        assert_eq!(t.pair.k1_prime, plain.k1_prime);
        assert_eq!(t.pair.certificate, plain.certificate);
    }
}
