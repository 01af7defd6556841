//! Pairs in the plane assembled from pairs on the line: product translations, right linear
//! parts perturbed by a finite subset of `GL(2)`, and a covering certificate that factors into
//! the group neighbourhood and one line certificate per coordinate.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::{replay_factored, CoveringCertificate, FiberPair, SweepConfig};
use crate::error::{Error, Result};
use crate::fractal::{dim_self_similar, validate_ifs, AffineIFS, HomogeneousIFS, LinearRule, Translations, ValidityReport};
use crate::liecover::{
    build_simplex, choose_r_below, condition_at_most, enumerate_lattice, exp_offset_bound, verify_algebra_covering,
    verify_conjugation_scaled, Algebra, CellConfig, GroupCover, QMat, QVec, Side, SimplexLattice,
};
use crate::renorm::{build_renorm_family, AffChart, ChartPoint, RenormFamily, RenormOperator};
use crate::rignum::{DyInterval, Dyadic, IMatrix, PowProduct, Round};

use super::pair::Pair1D;
use super::params::{check_args, choose_parameters, eps_candidates, raw_choice, to_count, Lemma51Params, RawChoice};

/// Lattice points kept when enumerating `M`.
const LATTICE_CAP: usize = 100_000;

#[derive(Clone, Debug)]
pub struct AssemblyConfig {
    pub prec: u32,
    pub sweep: SweepConfig,
    pub cells: CellConfig,
    /// Subdivision rounds when certifying the margin of the algebra covering.
    pub refine: u32,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig { prec: 128, sweep: SweepConfig::default(), cells: CellConfig::default(), refine: 3 }
    }
}

/// The neighbourhood `a·exp(rΔ)` and the covering of its conjugate by the class translates.
#[derive(Clone, Debug)]
pub struct GroupPart {
    pub lattice: SimplexLattice,
    pub cover: GroupCover,
    /// `A⁻¹`: class `u` sends `exp(y)` to `exp(A⁻¹yA)·exp(−ru)`.
    pub conj: QMat,
    /// `1 + s` with `(1+s)·rΔ̄ ⊇ B_δ(rΔ̄)`.
    pub scale: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCertificate {
    /// `δ`, the same in the algebra and in the translation coordinates.
    pub delta: Dyadic,
    /// Bound for `‖exp(y) − I‖_∞` over `(1+s)·rΔ̄`.
    pub exp_offset: Dyadic,
    /// Bound for the cross term `(λA)⁻¹·a·(exp(y) − I)·t′_j`.
    pub cross: Dyadic,
    pub algebra_cells: usize,
    pub coords: Vec<CoveringCertificate>,
}

impl ProductCertificate {
    pub fn cells(&self) -> u64 {
        self.algebra_cells as u64 + self.coords.iter().map(|c| c.meta.cells).sum::<u64>()
    }
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub d: usize,
    pub c: u64,
    pub gamma: BigRational,
    pub eps: BigRational,
    /// Diagonal of `A`.
    pub a_diag: Vec<BigRational>,
    pub lambda: DyInterval,
    pub lambda_exact: PowProduct,
    /// Scalar of the base point `a·I`.
    pub base: DyInterval,
    pub pairs: Vec<Pair1D>,
    pub k: HomogeneousIFS,
    pub k_prime: AffineIFS,
    pub validity: (ValidityReport, ValidityReport),
    pub group: Option<GroupPart>,
    pub certificate: ProductCertificate,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpotReport {
    pub samples: usize,
    pub passed: usize,
}

fn unit_box(d: usize, prec: u32) -> Vec<DyInterval> {
    vec![DyInterval::new(Dyadic::zero(), Dyadic::one(), prec).expect("unit interval"); d]
}

fn gl2_lattice(k: u64, cfg: &AssemblyConfig) -> Result<SimplexLattice> {
    let mut lat = enumerate_lattice(5, k, build_simplex(4)?, LATTICE_CAP)?;
    verify_algebra_covering(&mut lat, &cfg.cells, cfg.refine)?;
    Ok(lat)
}

/// Least `c ≥ floor` with `c² ≥ m`.
fn classes_for(m: usize, floor: u64) -> u64 {
    let mut c = floor.max(2);
    while ((c * c) as usize) < m {
        c += 1;
    }
    c
}

fn diag_q(v: &[BigRational]) -> QMat {
    (0..v.len())
        .map(|i| (0..v.len()).map(|j| if i == j { v[i].clone() } else { BigRational::zero() }).collect())
        .collect()
}

fn qmatvec(a: &QMat, v: &[BigRational]) -> QVec {
    a.iter().map(|row| row.iter().zip(v).fold(BigRational::zero(), |s, (x, y)| s + x * y)).collect()
}

/// `K = K₁^d` on the line or in the plane, with `K′` perturbed by `F` when `d = 2`. `c` is raised
/// to the least value with `c^d ≥ |F|`.
pub fn assemble_theorem1(d: usize, gamma: &BigRational, c: u64, eps: &BigRational, cfg: &AssemblyConfig) -> Result<Assembly> {
    check_args(gamma, c, eps)?;
    match d {
        1 => {
            let params = choose_parameters(gamma, c, eps, cfg.prec)?;
            let pair = Pair1D::build(params, &cfg.sweep)?;
            Ok(line_assembly(pair, gamma, eps))
        }
        2 => {
            let lat = gl2_lattice(1, cfg)?;
            let c = classes_for(lat.len(), c);
            let params = choose_parameters(gamma, c, eps, cfg.prec)?;
            let pair = Pair1D::build(params, &cfg.sweep)?;
            let one = BigRational::one();
            let (lambda, lambda_exact, base) = (pair.params.ell.clone(), pair.params.ell_exact.clone(), pair.params.a.clone());
            let setup = PlaneSetup {
                c,
                gamma: gamma.clone(),
                eps: eps.clone(),
                a_diag: vec![one.clone(), one],
                lambda,
                lambda_exact,
                base,
                kind: "homogeneous, K = K₁ × K₁".into(),
            };
            assemble_plane(setup, vec![pair.clone(), pair], lat, cfg)
        }
        _ => Err(Error::Domain(format!("d = {d} is not supported; the assemblies cover d ≤ 2"))),
    }
}

fn line_assembly(pair: Pair1D, gamma: &BigRational, eps: &BigRational) -> Assembly {
    let p = &pair.params;
    let certificate = ProductCertificate {
        delta: pair.certificate.delta.clone(),
        exp_offset: Dyadic::zero(),
        cross: Dyadic::zero(),
        algebra_cells: 0,
        coords: vec![pair.certificate.clone()],
    };
    Assembly {
        d: 1,
        c: p.c,
        gamma: gamma.clone(),
        eps: eps.clone(),
        a_diag: vec![BigRational::one()],
        lambda: p.ell.clone(),
        lambda_exact: p.ell_exact.clone(),
        base: p.a.clone(),
        k: pair.k1.clone(),
        k_prime: pair.k1_prime.to_affine(),
        validity: pair.validity.clone(),
        group: None,
        certificate,
        kind: "self-similar on the line".into(),
        pairs: vec![pair],
    }
}

/// Line parameters for the coordinate with ratio `ℓ·A_kk` and the common scalar `a`; `n′` is
/// capped so that `ℓ_k·n·n′ ≤ 3c` and rounded down to a multiple of `c`.
pub fn coordinate_raw(raw: &RawChoice, akk: &BigRational) -> Result<RawChoice> {
    let ell = raw.ell.mul(&PowProduct::from_rational(akk)?);
    let inv = ell.recip();
    let n = to_count(inv.pow(&(&raw.gamma + &raw.eps_prime)).floor()?, "n")?;
    let window = PowProduct::from_int(3)?.mul(&inv).div(&PowProduct::from_int(n as i64)?).floor()?;
    let dim = inv.pow(&(BigRational::one() - &raw.gamma + &raw.eps_prime)).floor()? / raw.c;
    let m = window.min(dim).to_u64().ok_or_else(|| Error::ResourceLimit("n′ overflows".into()))?;
    let n_prime = to_count((m * raw.c).into(), "n′")?;
    Ok(RawChoice { ell, n, n_prime, ..raw.clone() })
}

/// `K_A` with `A` diagonal and `κ(A) ≤ kappa`; `M` is the lattice at scale `⌈kappa⌉` and
/// `c` the least value with `c² ≥ |M|`.
pub fn assemble_theorem2(a: &QMat, kappa: &BigRational, gamma: &BigRational, eps: &BigRational, cfg: &AssemblyConfig) -> Result<Assembly> {
    if a.len() != 2 || a.iter().any(|r| r.len() != 2) {
        return Err(Error::Domain("A must be a 2 × 2 matrix".into()));
    }
    if !condition_at_most(a, kappa)? {
        return Err(Error::Domain(format!("κ(A) exceeds κ = {kappa}")));
    }
    if !a[0][1].is_zero() || !a[1][0].is_zero() {
        return Err(Error::Domain("A must be diagonal".into()));
    }
    let diag = vec![a[0][0].clone(), a[1][1].clone()];
    if diag.iter().any(|x| !x.is_positive()) {
        return Err(Error::Domain("A must have a positive diagonal".into()));
    }
    let k = kappa.ceil().to_integer().to_u64().ok_or_else(|| Error::Domain("κ is too large".into()))?;
    let lat = gl2_lattice(k, cfg)?;
    let c = classes_for(lat.len(), 2);
    check_args(gamma, c, eps)?;
    let mut last = None;
    let mut chosen = None;
    'eps: for ep in eps_candidates(gamma, eps) {
        let raw = raw_choice(gamma, c, eps, &ep)?;
        let mut params = Vec::new();
        for akk in &diag {
            let r = coordinate_raw(&raw, akk)?;
            match Lemma51Params::from_raw(&r, cfg.prec) {
                Ok(p) => params.push(p),
                Err(Error::ConstraintFailure { name, detail }) => {
                    last = Some(format!("ε′ = {ep}, A_kk = {akk}: {name}: {detail}"));
                    continue 'eps;
                }
                Err(e) => return Err(e),
            }
        }
        chosen = Some((raw, params));
        break;
    }
    let (raw, params) = chosen.ok_or_else(|| Error::SearchExhausted(last.unwrap_or_else(|| "no candidate".into())))?;
    let pairs = params.into_iter().map(|p| Pair1D::build(p, &cfg.sweep)).collect::<Result<Vec<_>>>()?;
    let setup = PlaneSetup {
        c,
        gamma: gamma.clone(),
        eps: eps.clone(),
        a_diag: diag,
        lambda: raw.ell.eval(cfg.prec)?,
        lambda_exact: raw.ell.clone(),
        base: raw.a.eval(cfg.prec)?,
        kind: "(A, λ)-homogeneous".into(),
    };
    assemble_plane(setup, pairs, lat, cfg)
}

struct PlaneSetup {
    c: u64,
    gamma: BigRational,
    eps: BigRational,
    a_diag: Vec<BigRational>,
    lambda: DyInterval,
    lambda_exact: PowProduct,
    base: DyInterval,
    kind: String,
}

fn assemble_plane(s: PlaneSetup, pairs: Vec<Pair1D>, lat: SimplexLattice, cfg: &AssemblyConfig) -> Result<Assembly> {
    let prec = cfg.prec;
    let alg = Algebra::Gl(2);
    let delta = pairs.iter().map(|p| p.certificate.delta.clone()).min().expect("two pairs");
    let d_out = pairs.iter().map(|p| p.certificate.delta_out.clone()).min().expect("two pairs");
    // |(λA)⁻¹·a·t′| per unit of ‖exp(y) − I‖_∞
    let mut gain = DyInterval::zero(prec);
    for p in &pairs {
        let t_max = p.params.t_prime.hull().mag();
        let g = &(&p.params.a * &DyInterval::point(t_max, prec)).div(&p.params.ell)?;
        gain = gain.max(g);
    }
    let gain = gain.hi().clone();
    // ‖exp(y) − I‖_∞ ≤ 4r while r is small
    let r_max = DyInterval::point(d_out.shl(-1), prec)
        .div(&DyInterval::point(gain.shl(2), prec))?
        .lo()
        .round(24, Round::Down);
    let cover = choose_r_below(&lat, alg, Some(&r_max))?;
    let rho = lat
        .simplex
        .origin
        .iter()
        .zip(&lat.simplex.inv_height)
        .map(|(o, h)| o / h)
        .min()
        .expect("nonempty simplex");
    let scale = BigRational::one() + delta.to_rational() / (cover.r.to_rational() * rho);
    let inv_a: Vec<BigRational> = s.a_diag.iter().map(|x| x.recip()).collect();
    let conj = diag_q(&inv_a);
    let cells = verify_conjugation_scaled(&lat, &cover, &conj, Side::Right, &cfg.cells, &scale, &delta)?;
    let exp_offset = exp_offset_bound(&lat, &cover, &diag_q(&[BigRational::one(), BigRational::one()]), &scale)?;
    let cross = (&gain * &exp_offset).round(64, Round::Up);
    for (k, p) in pairs.iter().enumerate() {
        if &(&delta + &cross) > &p.certificate.delta_out {
            return Err(Error::constraint(
                "cross term",
                format!("coordinate {k}: δ + {} exceeds δ_out = {}", cross.to_f64(), p.certificate.delta_out.to_f64()),
            ));
        }
    }
    let ells: Vec<DyInterval> = pairs.iter().map(|p| p.params.ell.clone()).collect();
    let k = HomogeneousIFS {
        dim: 2,
        lambda: s.lambda.clone(),
        a: IMatrix::diag(&s.a_diag.iter().map(|x| DyInterval::from_rational(x, prec)).collect::<Vec<_>>()),
        trans: Translations::Product(pairs.iter().map(|p| p.params.t.clone()).collect()),
        domain: unit_box(2, prec),
        lambda_exact: Some(s.lambda_exact.clone()),
        trans_exact: None,
    };
    let lin = IMatrix::diag(&ells);
    let k_prime = AffineIFS {
        dim: 2,
        trans: Translations::Product(pairs.iter().map(|p| p.params.t_prime.clone()).collect()),
        linear: LinearRule::ByClass { class_axis: vec![1, 1], matrices: cover.f.iter().map(|f| lin.mul(f)).collect() },
        domain: unit_box(2, prec),
        exact: None,
    };
    let validity = (validate_ifs(&k.to_affine()), validate_ifs(&k_prime));
    for (name, v) in [("K is a Cantor set", &validity.0), ("K′ is a Cantor set", &validity.1)] {
        if !v.overall.is_valid() {
            return Err(Error::constraint(name, format!("{:?}", v.overall)));
        }
    }
    let certificate = ProductCertificate {
        delta,
        exp_offset,
        cross,
        algebra_cells: cells.cells,
        coords: pairs.iter().map(|p| p.certificate.clone()).collect(),
    };
    Ok(Assembly {
        d: 2,
        c: s.c,
        gamma: s.gamma,
        eps: s.eps,
        a_diag: s.a_diag,
        lambda: s.lambda,
        lambda_exact: s.lambda_exact,
        base: s.base,
        pairs,
        k,
        k_prime,
        validity,
        group: Some(GroupPart { lattice: lat, cover, conj, scale }),
        certificate,
        kind: s.kind,
    })
}

/// Group data a plane certificate is replayed against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneGroup {
    /// Lattice scale.
    pub k: u64,
    pub r: Dyadic,
    pub a_diag: Vec<BigRational>,
    pub scale: BigRational,
}

impl PlaneGroup {
    pub fn of(a: &Assembly) -> Option<PlaneGroup> {
        let g = a.group.as_ref()?;
        Some(PlaneGroup { k: g.lattice.k, r: g.cover.r.clone(), a_diag: a.a_diag.clone(), scale: g.scale.clone() })
    }
}

/// Re-check a plane certificate from the group data and the coordinate fiber pairs alone.
pub fn replay_plane(g: &PlaneGroup, cert: &ProductCertificate, fibers: &[FiberPair], cfg: &AssemblyConfig) -> Result<()> {
    if fibers.len() != 2 || cert.coords.len() != 2 || g.a_diag.len() != 2 {
        return Err(Error::Domain("plane certificates have two coordinates".into()));
    }
    let lat = gl2_lattice(g.k, cfg)?;
    let cover = choose_r_below(&lat, Algebra::Gl(2), Some(&g.r))?;
    if cover.r != g.r {
        return Err(Error::coverage("radius does not certify the group covering", format!("r = {}", g.r.to_f64())));
    }
    let rho = lat.simplex.origin.iter().zip(&lat.simplex.inv_height).map(|(o, h)| o / h).min().expect("nonempty simplex");
    let need = BigRational::one() + cert.delta.to_rational() / (g.r.to_rational() * rho);
    if g.scale < need {
        return Err(Error::coverage("scaled simplex misses B_δ(rΔ)", format!("scale {} < {}", g.scale, need)));
    }
    let conj = diag_q(&g.a_diag.iter().map(|x| x.recip()).collect::<Vec<_>>());
    verify_conjugation_scaled(&lat, &cover, &conj, Side::Right, &cfg.cells, &g.scale, &cert.delta)?;
    let off = exp_offset_bound(&lat, &cover, &diag_q(&[BigRational::one(), BigRational::one()]), &g.scale)?;
    if off > cert.exp_offset {
        return Err(Error::coverage("exponential offset exceeds the recorded bound", format!("{}", off.to_f64())));
    }
    for (k, (f, c)) in fibers.iter().zip(&cert.coords).enumerate() {
        replay_factored(c, f)?;
        if c.delta < cert.delta {
            return Err(Error::coverage("coordinate certificate is thinner than δ", format!("coordinate {k}")));
        }
        let gain = f.right.beta.hull().mag();
        if &gain * &cert.exp_offset > cert.cross || &cert.delta + &cert.cross > c.delta_out {
            return Err(Error::coverage("cross term exceeds the margin", format!("coordinate {k}")));
        }
    }
    Ok(())
}

impl Assembly {
    /// `δ*` of the covering of `B_δ*(𝒲)`.
    pub fn delta_star(&self) -> Dyadic {
        self.certificate.delta.clone()
    }

    pub fn family_size(&self) -> u128 {
        self.k.len() * self.k_prime.len()
    }

    /// Enclosures of `dim_H K` and `dim_H K′`.
    pub fn dims(&self) -> Result<(DyInterval, DyInterval)> {
        if self.d == 1 {
            return self.pairs[0].dims();
        }
        let prec = self.lambda.prec().max(64);
        let mut dk = DyInterval::zero(prec);
        for p in &self.pairs {
            dk = &dk + &dim_self_similar(&p.k1)?;
        }
        // singular values of every right linear part lie in [σ_lo, σ_hi]
        let mut lo: Option<DyInterval> = None;
        let mut hi: Option<DyInterval> = None;
        for m in self.k_prime.distinct_linears() {
            let c = m.conorm()?;
            let o = m.op_norm();
            lo = Some(lo.map_or(c.clone(), |x| x.min(&c)));
            hi = Some(hi.map_or(o.clone(), |x| x.max(&o)));
        }
        let (lo, hi) = (lo.expect("maps"), hi.expect("maps"));
        let ln_n = DyInterval::from_int(&self.k_prime.len().into(), prec).ln()?;
        let d_lo = ln_n.div(&-lo.ln()?)?;
        let d_hi = ln_n.div(&-hi.ln()?)?;
        let dkp = DyInterval::new(d_lo.lo().clone(), d_hi.hi().clone(), prec)?;
        Ok((dk, dkp))
    }

    /// Apply the certified operator to seeded points of `B_δ(𝒲)` in the chart and check that the
    /// image lands in `𝒲_(δ)`.
    pub fn spot_check(&self, samples: usize, seed: u64) -> Result<SpotReport> {
        let g = self.group.as_ref().ok_or_else(|| Error::Domain("spot checks need the group part".into()))?;
        let prec = self.lambda.prec().max(128);
        let fam = self.gl_family()?;
        let alg = g.cover.algebra;
        let lat = &g.lattice;
        let r = g.cover.r.to_rational();
        let conj = alg.conjugation(&g.conj)?;
        let delta = &self.certificate.delta;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| BigRational::new(rng.gen_range(1i64..=(1 << 20)).into(), (1i64 << 20).into());
        let mut report = SpotReport { samples, passed: 0 };
        for s in 0..samples {
            let w: Vec<BigRational> = (0..lat.simplex.vertices.len()).map(|_| unit(&mut rng)).collect();
            let total = w.iter().fold(BigRational::zero(), |a, x| a + x);
            let mut y = vec![BigRational::zero(); alg.dim()];
            for (wi, v) in w.iter().zip(&lat.simplex.vertices) {
                for (yk, vk) in y.iter_mut().zip(v) {
                    *yk += wi / &total * vk * &g.scale * &r;
                }
            }
            let v: Vec<Dyadic> = self
                .pairs
                .iter()
                .map(|p| {
                    let iv = p.params.interval_i().inflate(delta);
                    let t = iv.lo().to_rational() + unit(&mut rng) * iv.width().to_rational();
                    Dyadic::from_rational(&t, 96, Round::Down)
                })
                .collect();
            let ly = qmatvec(&conj, &y);
            let m = (0..lat.len())
                .max_by_key(|&idx| {
                    let u = lat.point(idx);
                    let z: QVec = ly.iter().zip(&u).map(|(a, b)| a / &r - b).collect();
                    lat.simplex.bary(&z).into_iter().min().expect("nonempty")
                })
                .expect("nonempty lattice");
            let labels = [m as u64 / self.c, m as u64 % self.c];
            let fail = |why: String| Error::coverage(format!("sample {s}: {why}"), format!("y = {y:?}, v = {v:?}"));
            let mut ij = Vec::new();
            for ((p, t), l) in self.pairs.iter().zip(&v).zip(labels) {
                ij.push(p.fiber.lookup(&p.certificate, t, l).ok_or_else(|| fail("no certificate cell".into()))?);
            }
            let i = self.k.trans.join_index(&ij.iter().map(|x| x.0 as u64).collect::<Vec<_>>());
            let j = self.k_prime.trans.join_index(&ij.iter().map(|x| x.1 as u64).collect::<Vec<_>>());
            let yi: Vec<DyInterval> = y.iter().map(|x| DyInterval::from_rational(x, prec)).collect();
            let p = ChartPoint::GL { x: alg.to_matrix(&yi), v: v.iter().map(|x| DyInterval::point(x.clone(), prec)).collect() };
            let img = fam.apply(&RenormOperator { i, j, label: j }, &p)?;
            let ChartPoint::GL { x, v: v2 } = img else { unreachable!("GL chart") };
            let yc = alg.coords(&x);
            let rr = DyInterval::point(g.cover.r.clone(), prec);
            for (jf, (row, o)) in lat.simplex.bary_lin.iter().zip(&lat.simplex.origin).enumerate() {
                let mut b = DyInterval::from_rational(o, prec);
                for (q, yk) in row.iter().zip(&yc) {
                    b = &b + &(&DyInterval::from_rational(q, prec) * &yk.div(&rr)?);
                }
                let need = DyInterval::from_rational(&(delta.to_rational() * &lat.simplex.inv_height[jf] / &r), prec);
                if !(b.lo() >= need.hi()) {
                    return Err(fail(format!("algebra image leaves rΔ at facet {jf} (β = {b})")));
                }
            }
            for (k, (p, t)) in self.pairs.iter().zip(&v2).enumerate() {
                let target = p.params.interval_i().deflate(delta).expect("δ < |I|/2");
                if !target.encloses(t) {
                    return Err(fail(format!("coordinate {k} image {t} leaves I_(δ)")));
                }
            }
            report.passed += 1;
        }
        Ok(report)
    }

    /// The operator family in the chart `x ↦ a·exp(X)·x + v`.
    pub fn gl_family(&self) -> Result<RenormFamily> {
        build_renorm_family(&self.k.to_affine(), &self.k_prime, AffChart::GLChart { base: IMatrix::scalar(self.d, &self.base) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn classes_cover_the_lattice() {
        assert_eq!(classes_for(5, 2), 3);
        assert_eq!(classes_for(330, 2), 19);
        assert_eq!(classes_for(4, 2), 2);
        assert_eq!(classes_for(4, 5), 5);
    }

    #[test]
    fn line_case_is_the_pair() {
        let a = assemble_theorem1(1, &q(1, 2), 2, &q(1, 10), &AssemblyConfig::default()).unwrap();
        assert_eq!(a.d, 1);
        assert!(a.spot_check(1, 0).is_err());
        let (dk, _) = a.dims().unwrap();
        assert!(dk.contains_rational(&q(4, 7)));
    }

    #[test]
    fn high_dimension_is_refused() {
        let e = assemble_theorem1(3, &q(1, 2), 3, &q(1, 10), &AssemblyConfig::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn plane_pair_certifies() {
        let a = assemble_theorem1(2, &q(1, 2), 2, &q(1, 10), &AssemblyConfig::default()).unwrap();
        assert_eq!(a.c, 3);
        assert!(a.delta_star().signum() > 0);
        let (dk, dkp) = a.dims().unwrap();
        assert!(dk.contains_rational(&q(8, 7)));
        assert!(dkp.lo() > &Dyadic::one());
        let rep = a.spot_check(20, 1).unwrap();
        assert_eq!(rep.passed, 20);
        let g = PlaneGroup::of(&a).unwrap();
        let fibers: Vec<FiberPair> = a.pairs.iter().map(|p| p.fiber.clone()).collect();
        let cfg = AssemblyConfig::default();
        replay_plane(&g, &a.certificate, &fibers, &cfg).unwrap();
        let mut bad = a.certificate.clone();
        bad.cross = bad.cross.shl(-8);
        assert!(replay_plane(&g, &bad, &fibers, &cfg).is_err());
    }

    #[test]
    fn badly_conditioned_a_is_refused() {
        let a = vec![vec![q(4, 1), q(0, 1)], vec![q(0, 1), q(1, 4)]];
        let e = assemble_theorem2(&a, &q(2, 1), &q(1, 2), &q(1, 10), &AssemblyConfig::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn rotated_a_is_refused() {
        let a = vec![vec![q(3, 5), q(-4, 5)], vec![q(4, 5), q(3, 5)]];
        let e = assemble_theorem2(&a, &q(2, 1), &q(1, 2), &q(1, 10), &AssemblyConfig::default());
        assert!(matches!(e, Err(Error::Domain(ref m)) if m.contains("diagonal")));
    }
}
