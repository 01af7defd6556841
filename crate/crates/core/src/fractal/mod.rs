//! Affine and homogeneous iterated function systems.

pub mod grid;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub use grid::{Grid1D, GridAxis, Translations};

use crate::error::{Error, Result};
use crate::rignum::{Dyadic, DyInterval, IMatrix, PowProduct};

/// Axis-aligned box, one interval per coordinate.
pub type IBox = Vec<DyInterval>;

/// Default cap on the number of boxes or explicitly materialized maps.
pub const DEFAULT_BOX_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMapR {
    pub linear: IMatrix,
    pub trans: Vec<DyInterval>,
}

impl AffineMapR {
    pub fn dim(&self) -> usize {
        self.trans.len()
    }

    pub fn apply(&self, x: &[DyInterval]) -> Vec<DyInterval> {
        self.linear.mul_vec(x).iter().zip(&self.trans).map(|(a, b)| a + b).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMapR) -> AffineMapR {
        AffineMapR { linear: self.linear.mul(&other.linear), trans: self.apply(&other.trans) }
    }

    pub fn inverse(&self) -> Result<AffineMapR> {
        let inv = self.linear.inverse()?;
        let t = inv.mul_vec(&self.trans).into_iter().map(|v| -v).collect();
        Ok(AffineMapR { linear: inv, trans: t })
    }
}

/// Box enclosure of `L·B`.
pub fn linear_box(l: &IMatrix, b: &[DyInterval]) -> IBox {
    l.mul_vec(b)
}

/// How linear parts are attached to maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearRule {
    Uniform(IMatrix),
    PerMap(Vec<IMatrix>),
    /// Product translations only: the class of a map is read from digit `class_axis[m]` of its
    /// coordinate-`m` grid index, combined mixed-radix (coordinate 0 slowest); class `L` uses
    /// `matrices[L mod len]`.
    ByClass { class_axis: Vec<usize>, matrices: Vec<IMatrix> },
}

/// Exact rational form of an affine map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAffine {
    pub linear: Vec<Vec<BigRational>>,
    pub trans: Vec<BigRational>,
}

impl ExactAffine {
    /// Exact image of the box `[lo, hi]`.
    pub fn image(&self, lo: &[BigRational], hi: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut out_lo = self.trans.clone();
        let mut out_hi = self.trans.clone();
        for (i, row) in self.linear.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                let (p, q) = (a * &lo[j], a * &hi[j]);
                let (mn, mx) = if p <= q { (p, q) } else { (q, p) };
                out_lo[i] += mn;
                out_hi[i] += mx;
            }
        }
        (out_lo, out_hi)
    }

    pub fn to_interval(&self, prec: u32) -> Result<AffineMapR> {
        let d = self.trans.len();
        let flat: Vec<BigRational> = self.linear.iter().flatten().cloned().collect();
        Ok(AffineMapR {
            linear: IMatrix::from_rationals(d, &flat, prec)?,
            trans: self.trans.iter().map(|t| DyInterval::from_rational(t, prec)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineIFS {
    pub dim: usize,
    pub trans: Translations,
    pub linear: LinearRule,
    pub domain: IBox,
    /// Exact maps, when known, used to settle boundary contacts that enclosures cannot.
    pub exact: Option<Vec<ExactAffine>>,
}

impl AffineIFS {
    pub fn from_maps(maps: Vec<AffineMapR>, domain: IBox) -> Result<Self> {
        let dim = domain.len();
        if maps.iter().any(|m| m.dim() != dim || m.linear.dim() != dim) {
            return Err(Error::Domain("map dimension differs from domain".into()));
        }
        let linears = maps.iter().map(|m| m.linear.clone()).collect();
        let trans = maps.into_iter().map(|m| m.trans).collect();
        Ok(AffineIFS {
            dim,
            trans: Translations::Explicit(trans),
            linear: LinearRule::PerMap(linears),
            domain,
            exact: None,
        })
    }

    pub fn from_exact(maps: Vec<ExactAffine>, domain: IBox, prec: u32) -> Result<Self> {
        let interval = maps.iter().map(|m| m.to_interval(prec)).collect::<Result<Vec<_>>>()?;
        let mut ifs = AffineIFS::from_maps(interval, domain)?;
        ifs.exact = Some(maps);
        Ok(ifs)
    }

    pub fn len(&self) -> u128 {
        self.trans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class label of map `idx` under a `ByClass` rule.
    pub fn class_of(&self, idx: u128) -> Option<usize> {
        match (&self.linear, &self.trans) {
            (LinearRule::ByClass { class_axis, .. }, Translations::Product(g)) => {
                let parts = self.trans.split_index(idx);
                let mut label = 0usize;
                for (m, grid) in g.iter().enumerate() {
                    let k = class_axis[m];
                    let digit = grid.digits(parts[m])[k];
                    label = label * grid.axes[k].count as usize + digit as usize;
                }
                Some(label)
            }
            _ => None,
        }
    }

    pub fn linear_of(&self, idx: u128) -> &IMatrix {
        match &self.linear {
            LinearRule::Uniform(m) => m,
            LinearRule::PerMap(v) => &v[idx as usize],
            LinearRule::ByClass { matrices, .. } => {
                let l = self.class_of(idx).expect("class rule needs product translations");
                &matrices[l % matrices.len()]
            }
        }
    }

    pub fn map(&self, idx: u128) -> AffineMapR {
        AffineMapR { linear: self.linear_of(idx).clone(), trans: self.trans.get(idx) }
    }

    pub fn distinct_linears(&self) -> Vec<&IMatrix> {
        match &self.linear {
            LinearRule::Uniform(m) => vec![m],
            LinearRule::PerMap(v) => v.iter().collect(),
            LinearRule::ByClass { matrices, .. } => matrices.iter().collect(),
        }
    }

    /// Box enclosure of `f_idx(B)`.
    pub fn image_box(&self, idx: u128, b: &[DyInterval]) -> IBox {
        self.map(idx).apply(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousIFS {
    pub dim: usize,
    pub lambda: DyInterval,
    pub a: IMatrix,
    pub trans: Translations,
    pub domain: IBox,
    /// Exact ratio when it is a product of rational powers.
    pub lambda_exact: Option<PowProduct>,
    /// Exact translations of an explicit list.
    pub trans_exact: Option<Vec<Vec<BigRational>>>,
}

impl HomogeneousIFS {
    pub fn len(&self) -> u128 {
        self.trans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear(&self) -> IMatrix {
        self.a.scale(&self.lambda)
    }

    pub fn to_affine(&self) -> AffineIFS {
        AffineIFS {
            dim: self.dim,
            trans: self.trans.clone(),
            linear: LinearRule::Uniform(self.linear()),
            domain: self.domain.clone(),
            exact: self.exact_maps(),
        }
    }

    fn exact_maps(&self) -> Option<Vec<ExactAffine>> {
        let lam = self.lambda_exact.as_ref()?.to_rational()?;
        let d = self.dim;
        let mut lin = vec![vec![BigRational::zero(); d]; d];
        for (i, row) in lin.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let e = self.a.get(i, j);
                if !e.is_point() {
                    return None;
                }
                *x = &lam * e.lo().to_rational();
            }
        }
        let t = self.trans_exact.as_ref()?;
        Some(t.iter().map(|v| ExactAffine { linear: lin.clone(), trans: v.clone() }).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(String),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub containment: Verdict,
    pub disjointness: Verdict,
    pub contraction: Verdict,
    pub overall: Verdict,
}

fn combine(vs: &[&Verdict]) -> Verdict {
    if let Some(v) = vs.iter().find(|v| matches!(v, Verdict::Invalid(_))) {
        return (*v).clone();
    }
    if let Some(v) = vs.iter().find(|v| matches!(v, Verdict::Inconclusive(_))) {
        return (*v).clone();
    }
    Verdict::Valid
}

fn box_inside(inner: &[DyInterval], outer: &[DyInterval]) -> bool {
    inner.iter().zip(outer).all(|(a, b)| b.encloses(a))
}

/// Some coordinate certainly separates the two boxes.
fn boxes_separated(a: &[DyInterval], b: &[DyInterval]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.hi() < y.lo() || y.hi() < x.lo())
}

/// Hull over all linear parts of the image offsets `L·U`.
fn offset_hull(ifs: &AffineIFS) -> IBox {
    let mut h: Option<IBox> = None;
    for l in ifs.distinct_linears() {
        let b = linear_box(l, &ifs.domain);
        h = Some(match h {
            None => b,
            Some(prev) => prev.iter().zip(&b).map(|(x, y)| x.hull(y)).collect(),
        });
    }
    h.unwrap_or_default()
}

fn exact_domain(ifs: &AffineIFS) -> (Vec<BigRational>, Vec<BigRational>) {
    (ifs.domain.iter().map(|u| u.lo().to_rational()).collect(), ifs.domain.iter().map(|u| u.hi().to_rational()).collect())
}

fn check_containment(ifs: &AffineIFS) -> Verdict {
    if let Some(maps) = &ifs.exact {
        let (lo, hi) = exact_domain(ifs);
        for (i, m) in maps.iter().enumerate() {
            let (a, b) = m.image(&lo, &hi);
            if a.iter().zip(&lo).any(|(x, y)| x < y) || b.iter().zip(&hi).any(|(x, y)| x > y) {
                return Verdict::Invalid(format!("f_{}(U) not inside U", i + 1));
            }
        }
        return Verdict::Valid;
    }
    match &ifs.trans {
        Translations::Product(_) => {
            let off = offset_hull(ifs);
            let th = ifs.trans.hull();
            let img: IBox = off.iter().zip(&th).map(|(a, b)| a + b).collect();
            if box_inside(&img, &ifs.domain) {
                Verdict::Valid
            } else {
                Verdict::Inconclusive("hull of images not certified inside U".into())
            }
        }
        Translations::Explicit(_) => {
            for i in 0..ifs.len() {
                let img = ifs.image_box(i, &ifs.domain);
                if !box_inside(&img, &ifs.domain) {
                    let outside = img.iter().zip(&ifs.domain).any(|(a, b)| a.hi() < b.lo() || b.hi() < a.lo());
                    let msg = format!("f_{}(U) not inside U", i + 1);
                    return if outside { Verdict::Invalid(msg) } else { Verdict::Inconclusive(msg) };
                }
            }
            Verdict::Valid
        }
    }
}

/// Exact test whether the closed images of maps `i` and `j` meet.
fn exact_images_meet(ifs: &AffineIFS, i: usize, j: usize) -> Option<bool> {
    let maps = ifs.exact.as_ref()?;
    let (lo, hi) = exact_domain(ifs);
    let (a_lo, a_hi) = maps[i].image(&lo, &hi);
    let (b_lo, b_hi) = maps[j].image(&lo, &hi);
    // boxes are exact images only for monomial linear parts
    let monomial = |m: &ExactAffine| m.linear.iter().all(|r| r.iter().filter(|x| !x.is_zero()).count() <= 1);
    let meet = (0..ifs.dim).all(|k| a_lo[k] <= b_hi[k] && b_lo[k] <= a_hi[k]);
    if !meet {
        Some(false)
    } else if monomial(&maps[i]) && monomial(&maps[j]) {
        Some(true)
    } else {
        None
    }
}

fn check_disjoint(ifs: &AffineIFS) -> Verdict {
    match &ifs.trans {
        Translations::Product(grids) => {
            let off = offset_hull(ifs);
            for (m, g) in grids.iter().enumerate() {
                if g.len() < 2 {
                    continue;
                }
                let w = off[m].width();
                match g.min_separation() {
                    Some(sep) if sep > w => {}
                    _ => {
                        return Verdict::Inconclusive(format!(
                            "coordinate {m}: translation spacing does not exceed image width"
                        ))
                    }
                }
            }
            Verdict::Valid
        }
        Translations::Explicit(_) => {
            let n = ifs.len() as usize;
            let boxes: Vec<IBox> = (0..n).map(|i| ifs.image_box(i as u128, &ifs.domain)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| boxes[a][0].lo().cmp(boxes[b][0].lo()));
            for (p, &i) in order.iter().enumerate() {
                for &j in &order[p + 1..] {
                    if boxes[j][0].lo() > boxes[i][0].hi() {
                        break;
                    }
                    if boxes_separated(&boxes[i], &boxes[j]) {
                        continue;
                    }
                    let (a, b) = (i.min(j) + 1, i.max(j) + 1);
                    let msg = format!("f_{a}(U) and f_{b}(U) not separated");
                    match exact_images_meet(ifs, i, j) {
                        Some(false) => {}
                        Some(true) => return Verdict::Invalid(msg),
                        None => return Verdict::Inconclusive(msg),
                    }
                }
            }
            Verdict::Valid
        }
    }
}

fn check_contraction(ifs: &AffineIFS) -> Verdict {
    let one = Dyadic::one();
    for l in ifs.distinct_linears() {
        if l.det().contains_zero() {
            return Verdict::Invalid("linear part not invertible".into());
        }
        let n = l.op_norm();
        if n.hi() >= &one {
            return if n.lo() >= &one {
                Verdict::Invalid("linear part not contracting".into())
            } else {
                Verdict::Inconclusive("contraction not certified".into())
            };
        }
    }
    Verdict::Valid
}

/// Certify `f_i(U) ⊂ U`, pairwise disjointness of the images and uniform contraction.
pub fn validate_ifs(ifs: &AffineIFS) -> ValidityReport {
    let containment = check_containment(ifs);
    let disjointness = check_disjoint(ifs);
    let contraction = check_contraction(ifs);
    let overall = combine(&[&containment, &disjointness, &contraction]);
    ValidityReport { containment, disjointness, contraction, overall }
}

fn is_orthogonal(a: &IMatrix) -> bool {
    a.transpose().mul(a).overlaps(&IMatrix::identity(a.dim(), a.prec()))
}

/// Enclosure of `log n / (−log λ)` for an equal-ratio self-similar system.
pub fn dim_self_similar(h: &HomogeneousIFS) -> Result<DyInterval> {
    if h.dim > 1 && !is_orthogonal(&h.a) {
        return Err(Error::Domain("similarity dimension needs a conformal linear part".into()));
    }
    let prec = h.lambda.prec().max(64);
    let n = h.len();
    if n == 1 {
        return Ok(DyInterval::zero(prec));
    }
    let n_int = BigInt::from(n);
    if let Some(ell) = &h.lambda_exact {
        let np = PowProduct::from_rational(&BigRational::from_integer(n_int.clone()))?;
        if let Some(q) = exact_log_ratio(&np, &ell.recip()) {
            return Ok(DyInterval::from_rational(&q, prec));
        }
        let ln_n = DyInterval::from_int(&n_int, prec).ln()?;
        let mut ln_inv = DyInterval::zero(prec);
        for (b, e) in ell.recip().factors() {
            let lb = DyInterval::from_int(b, prec).ln()?;
            ln_inv = &ln_inv + &(&lb * &DyInterval::from_rational(e, prec));
        }
        return ln_n.div(&ln_inv);
    }
    let ln_n = DyInterval::from_int(&n_int, prec).ln()?;
    let ln_l = h.lambda.ln()?;
    ln_n.div(&-ln_l)
}

/// `log x / log y` when both are powers of the same bases with proportional exponents.
fn exact_log_ratio(x: &PowProduct, y: &PowProduct) -> Option<BigRational> {
    let xs: Vec<_> = x.factors().collect();
    let ys: Vec<_> = y.factors().collect();
    if xs.len() != ys.len() || xs.is_empty() {
        return None;
    }
    let mut ratio: Option<BigRational> = None;
    for ((bx, ex), (by, ey)) in xs.iter().zip(&ys) {
        if bx != by {
            return None;
        }
        let r = *ex / *ey;
        match &ratio {
            None => ratio = Some(r),
            Some(q) if *q == r => {}
            _ => return None,
        }
    }
    ratio
}

/// Piece length `λ|U|` and sorted-neighbour spacings of a one-dimensional system.
fn pieces_and_spacings(h: &HomogeneousIFS) -> Result<(DyInterval, Vec<DyInterval>)> {
    if h.dim != 1 {
        return Err(Error::Domain("thickness is defined here for d = 1".into()));
    }
    let piece = &h.lambda * &(&h.a.get(0, 0).abs() * &h.domain[0].width_interval());
    let spacings = match &h.trans {
        Translations::Product(g) => g[0].spacings(),
        Translations::Explicit(v) => {
            let mut t: Vec<DyInterval> = v.iter().map(|x| x[0].clone()).collect();
            t.sort_by(|a, b| a.mid().cmp(&b.mid()));
            t.windows(2).map(|w| &w[1] - &w[0]).collect()
        }
    };
    Ok((piece, spacings))
}

/// Gaps `G_i` between consecutive first-generation pieces.
pub fn first_gaps(h: &HomogeneousIFS) -> Result<Vec<DyInterval>> {
    let (piece, spacings) = pieces_and_spacings(h)?;
    let gaps: Vec<DyInterval> = spacings.iter().map(|s| s - &piece).collect();
    if let Some(g) = gaps.iter().find(|g| !g.is_positive()) {
        return Err(Error::Domain(format!("adjacent or overlapping pieces (gap {g})")));
    }
    Ok(gaps)
}

/// Enclosure of `min_i λ|U| / |G_i|`.
pub fn thickness_homogeneous(h: &HomogeneousIFS) -> Result<DyInterval> {
    let (piece, _) = pieces_and_spacings(h)?;
    let gaps = first_gaps(h)?;
    let mut best: Option<DyInterval> = None;
    for g in &gaps {
        let t = piece.div(g)?;
        best = Some(match best {
            None => t,
            Some(b) => b.min(&t),
        });
    }
    best.ok_or_else(|| Error::Domain("a single piece has no gaps".into()))
}

/// `K^d` for a one-dimensional homogeneous system with `A = 1`.
pub fn product_ifs(h: &HomogeneousIFS, d: usize, cap: u128) -> Result<HomogeneousIFS> {
    if h.dim != 1 || d == 0 {
        return Err(Error::Domain("product needs a one-dimensional factor and d ≥ 1".into()));
    }
    let trans = match &h.trans {
        Translations::Product(g) => Translations::Product(vec![g[0].clone(); d]),
        Translations::Explicit(v) => {
            let n = v.len() as u128;
            let total = n.checked_pow(d as u32).unwrap_or(u128::MAX);
            if total > cap {
                return Err(Error::ResourceLimit(format!("{total} product maps exceed cap {cap}")));
            }
            let mut out: Vec<Vec<DyInterval>> = vec![Vec::new()];
            for _ in 0..d {
                out = out.into_iter().flat_map(|p| v.iter().map(move |t| [p.clone(), t.clone()].concat())).collect();
            }
            Translations::Explicit(out)
        }
    };
    Ok(HomogeneousIFS {
        dim: d,
        lambda: h.lambda.clone(),
        a: IMatrix::identity(d, h.a.prec()),
        trans,
        domain: vec![h.domain[0].clone(); d],
        lambda_exact: h.lambda_exact.clone(),
        trans_exact: h.trans_exact.as_ref().map(|v| {
            let mut out: Vec<Vec<BigRational>> = vec![Vec::new()];
            for _ in 0..d {
                out = out.into_iter().flat_map(|p| v.iter().map(move |t| [p.clone(), t.clone()].concat())).collect();
            }
            out
        }),
    })
}

/// Box of `f_{w_1} ∘ … ∘ f_{w_k}(U)`.
pub fn word_box(ifs: &AffineIFS, word: &[u128]) -> IBox {
    let mut b = ifs.domain.clone();
    for &i in word.iter().rev() {
        b = ifs.image_box(i, &b);
    }
    b
}

/// All `n^depth` boxes of depth-fold compositions, words in lexicographic order.
pub fn approximate_set(ifs: &AffineIFS, depth: u32, cap: u128) -> Result<Vec<IBox>> {
    let n = ifs.len();
    let total = n.checked_pow(depth).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::ResourceLimit(format!("{total} boxes exceed cap {cap}")));
    }
    let mut boxes = vec![ifs.domain.clone()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(boxes.len() * n as usize);
        for i in 0..n {
            let m = ifs.map(i);
            for b in &boxes {
                next.push(m.apply(b));
            }
        }
        boxes = next;
    }
    Ok(boxes)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bunching {
    Bunched(u32),
    NotCertified,
}

/// Smallest `N ≤ cap` with `‖Dg^N‖·m(Dg^N)⁻¹·μ^{αN} < 1` for `Dg = (λA)⁻¹`, `μ = 1/mu_inv`.
///
/// Returns `NotCertified` also when `mu_inv` certainly exceeds the expansion `1/‖λA‖`.
pub fn check_bunched(h: &HomogeneousIFS, alpha: &BigRational, mu_inv: &DyInterval, cap: u32) -> Bunching {
    let prec = mu_inv.prec().max(h.a.prec()).max(64);
    let expansion = match h.linear().op_norm().recip() {
        Ok(e) => e,
        Err(_) => return Bunching::NotCertified,
    };
    if mu_inv.lo() > expansion.hi() {
        return Bunching::NotCertified;
    }
    let dg = match h.a.inverse() {
        Ok(m) => m.with_prec(prec),
        Err(_) => return Bunching::NotCertified,
    };
    let mut power = IMatrix::identity(h.dim, prec);
    let one = DyInterval::one(prec);
    for n in 1..=cap {
        power = power.mul(&dg);
        let kappa = match power.condition() {
            Ok(k) => k,
            Err(_) => return Bunching::NotCertified,
        };
        let e = -(alpha * BigRational::from_integer(n.into()));
        let mu_pow = match mu_inv.with_prec(prec).pow_rational(&e) {
            Ok(v) => v,
            Err(_) => return Bunching::NotCertified,
        };
        if (&kappa * &mu_pow).hi() < one.lo() {
            return Bunching::Bunched(n);
        }
    }
    Bunching::NotCertified
}

impl DyInterval {
    /// Width as an exact point interval.
    pub fn width_interval(&self) -> DyInterval {
        DyInterval::point(self.width(), self.prec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> DyInterval {
        DyInterval::from_ratio(p, q, 128)
    }

    fn unit() -> IBox {
        vec![DyInterval::new(Dyadic::zero(), Dyadic::one(), 128).unwrap()]
    }

    pub(crate) fn middle_thirds() -> HomogeneousIFS {
        HomogeneousIFS {
            dim: 1,
            lambda: r(1, 3),
            a: IMatrix::identity(1, 128),
            trans: Translations::Explicit(vec![vec![r(0, 1)], vec![r(2, 3)]]),
            domain: unit(),
            lambda_exact: Some(PowProduct::from_rational(&BigRational::new(1.into(), 3.into())).unwrap()),
            trans_exact: Some(vec![vec![BigRational::zero()], vec![BigRational::new(2.into(), 3.into())]]),
        }
    }

    #[test]
    fn middle_thirds_is_valid() {
        let rep = validate_ifs(&middle_thirds().to_affine());
        assert_eq!(rep.overall, Verdict::Valid);
    }

    #[test]
    fn halves_are_invalid() {
        let h = HomogeneousIFS {
            lambda: r(1, 2),
            trans: Translations::Explicit(vec![vec![r(0, 1)], vec![r(1, 2)]]),
            lambda_exact: Some(PowProduct::from_int(2).unwrap().recip()),
            trans_exact: Some(vec![vec![BigRational::zero()], vec![BigRational::new(1.into(), 2.into())]]),
            ..middle_thirds()
        };
        let rep = validate_ifs(&h.to_affine());
        assert!(matches!(rep.disjointness, Verdict::Invalid(_)));
        assert!(matches!(rep.overall, Verdict::Invalid(_)));
    }

    #[test]
    fn middle_thirds_dimension() {
        let d = dim_self_similar(&middle_thirds()).unwrap();
        assert!(d.lo().to_f64() > 0.6309 && d.hi().to_f64() < 0.6310);
        let mut h = middle_thirds();
        h.lambda_exact = None;
        let d2 = dim_self_similar(&h).unwrap();
        assert!(d.overlaps(&d2));
        h.trans = Translations::Explicit(vec![vec![r(0, 1)]]);
        assert!(dim_self_similar(&h).unwrap().contains(&Dyadic::zero()));
    }

    #[test]
    fn middle_thirds_thickness_is_one() {
        let t = thickness_homogeneous(&middle_thirds()).unwrap();
        assert!(t.contains(&Dyadic::one()));
    }

    #[test]
    fn product_of_middle_thirds() {
        let p = product_ifs(&middle_thirds(), 2, 100).unwrap();
        assert_eq!(p.len(), 4);
        let same = product_ifs(&middle_thirds(), 1, 100).unwrap();
        assert_eq!(same.trans, middle_thirds().trans);
        assert!(validate_ifs(&p.to_affine()).overall.is_valid());
        let dp = dim_self_similar(&p).unwrap();
        let d1 = dim_self_similar(&middle_thirds()).unwrap();
        assert!(dp.overlaps(&(&d1 + &d1)));
    }

    #[test]
    fn approximation_depths() {
        let ifs = middle_thirds().to_affine();
        assert_eq!(approximate_set(&ifs, 0, 10).unwrap(), vec![unit()]);
        let b = approximate_set(&ifs, 2, 10).unwrap();
        assert_eq!(b.len(), 4);
        for x in &b {
            assert!((&x[0].width_interval() - &r(1, 9)).mag() < Dyadic::pow2(-100));
        }
        assert!(approximate_set(&ifs, 5, 10).is_err());
        assert_eq!(word_box(&ifs, &[1, 0]), b[2]);
    }

    #[test]
    fn bunching_examples() {
        let conformal = HomogeneousIFS {
            dim: 2,
            lambda: r(1, 10),
            a: IMatrix::identity(2, 128),
            trans: Translations::Explicit(vec![vec![r(0, 1), r(0, 1)]]),
            domain: vec![unit()[0].clone(); 2],
            lambda_exact: None,
            trans_exact: None,
        };
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(check_bunched(&conformal, &half, &r(10, 1), 8), Bunching::Bunched(1));

        let sheared = HomogeneousIFS { a: IMatrix::diag(&[r(2, 1), r(1, 2)]), lambda: r(1, 32), ..conformal.clone() };
        // κ(A^N) = 4^N and μ^{αN} = 16^{-N/2} = 4^{-N}: equality at every N
        assert_eq!(check_bunched(&sheared, &half, &r(16, 1), 8), Bunching::NotCertified);
    }
}
