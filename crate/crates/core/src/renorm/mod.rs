//! Renormalization operators `X ↦ f_i⁻¹ ∘ X ∘ f'_j` in explicit charts on affine maps.

use crate::error::{Error, Result};
use crate::fractal::{AffineIFS, AffineMapR, Grid1D, GridAxis, LinearRule, Translations};
use crate::rignum::{mat_exp_enclosure, mat_log_enclosure, DyInterval, IMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffChart {
    /// `x ↦ s·x + t` on the line.
    Scale1D,
    /// `x ↦ s·x + t` on `ℝ^d`.
    ScaleVec { dim: usize },
    /// `x ↦ a·exp(X)·x + v` around a fixed base `a`.
    GLChart { base: IMatrix },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChartPoint {
    Scale { s: DyInterval, t: Vec<DyInterval> },
    GL { x: IMatrix, v: Vec<DyInterval> },
}

impl ChartPoint {
    pub fn scale1(s: DyInterval, t: DyInterval) -> Self {
        ChartPoint::Scale { s, t: vec![t] }
    }

    pub fn hull(&self, o: &ChartPoint) -> Result<ChartPoint> {
        match (self, o) {
            (ChartPoint::Scale { s, t }, ChartPoint::Scale { s: s2, t: t2 }) => Ok(ChartPoint::Scale {
                s: s.hull(s2),
                t: t.iter().zip(t2).map(|(a, b)| a.hull(b)).collect(),
            }),
            (ChartPoint::GL { x, v }, ChartPoint::GL { x: x2, v: v2 }) => Ok(ChartPoint::GL {
                x: x.hull(x2),
                v: v.iter().zip(v2).map(|(a, b)| a.hull(b)).collect(),
            }),
            _ => Err(Error::ChartMismatch("points from different charts".into())),
        }
    }

    pub fn encloses(&self, o: &ChartPoint) -> bool {
        match (self, o) {
            (ChartPoint::Scale { s, t }, ChartPoint::Scale { s: s2, t: t2 }) => {
                s.encloses(s2) && t.iter().zip(t2).all(|(a, b)| a.encloses(b))
            }
            (ChartPoint::GL { x, v }, ChartPoint::GL { x: x2, v: v2 }) => {
                x.encloses(x2) && v.iter().zip(v2).all(|(a, b)| a.encloses(b))
            }
            _ => false,
        }
    }

    pub fn overlaps(&self, o: &ChartPoint) -> bool {
        match (self, o) {
            (ChartPoint::Scale { s, t }, ChartPoint::Scale { s: s2, t: t2 }) => {
                s.overlaps(s2) && t.iter().zip(t2).all(|(a, b)| a.overlaps(b))
            }
            (ChartPoint::GL { x, v }, ChartPoint::GL { x: x2, v: v2 }) => {
                x.overlaps(x2) && v.iter().zip(v2).all(|(a, b)| a.overlaps(b))
            }
            _ => false,
        }
    }
}

impl AffChart {
    /// Enclosure of the affine map with the given coordinates.
    pub fn to_affine(&self, p: &ChartPoint) -> Result<AffineMapR> {
        match (self, p) {
            (AffChart::Scale1D | AffChart::ScaleVec { .. }, ChartPoint::Scale { s, t }) => {
                if s.contains_zero() {
                    return Err(Error::ChartExit("scale enclosure contains 0".into()));
                }
                Ok(AffineMapR { linear: IMatrix::scalar(t.len(), s), trans: t.clone() })
            }
            (AffChart::GLChart { base }, ChartPoint::GL { x, v }) => {
                let m = base.mul(&mat_exp_enclosure(x)?);
                if m.det().contains_zero() {
                    return Err(Error::ChartExit("linear part not certified invertible".into()));
                }
                Ok(AffineMapR { linear: m, trans: v.clone() })
            }
            _ => Err(Error::ChartMismatch("point does not belong to this chart".into())),
        }
    }

    /// Chart coordinates enclosing an affine map.
    pub fn from_affine(&self, m: &AffineMapR) -> Result<ChartPoint> {
        match self {
            AffChart::Scale1D | AffChart::ScaleVec { .. } => {
                let d = m.dim();
                let s = m.linear.get(0, 0).clone();
                for i in 0..d {
                    for j in 0..d {
                        let e = m.linear.get(i, j);
                        let ok = if i == j { e.overlaps(&s) } else { e.contains_zero() };
                        if !ok {
                            return Err(Error::ChartExit("linear part is not a scalar".into()));
                        }
                    }
                }
                let s = (0..d).fold(s, |acc, i| acc.hull(m.linear.get(i, i)));
                Ok(ChartPoint::Scale { s, t: m.trans.clone() })
            }
            AffChart::GLChart { base } => {
                let y = base.inverse()?.mul(&m.linear);
                let x = mat_log_enclosure(&y).map_err(|e| Error::ChartExit(format!("leaves the chart: {e}")))?;
                Ok(ChartPoint::GL { x, v: m.trans.clone() })
            }
        }
    }
}

/// `R_{i,j}`; `label` is the separability class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenormOperator {
    pub i: u128,
    pub j: u128,
    pub label: u128,
}

/// All `k·k'` operators of a pair, indexed `i·k' + j`.
#[derive(Clone, Debug)]
pub struct RenormFamily {
    pub chart: AffChart,
    pub left: AffineIFS,
    pub right: AffineIFS,
    /// Common contraction `ℓ` for scale charts.
    pub ratio: Option<DyInterval>,
}

fn scalar_of(ifs: &AffineIFS) -> Option<DyInterval> {
    let m = match &ifs.linear {
        LinearRule::Uniform(m) => m,
        _ => return None,
    };
    let s = m.get(0, 0);
    let d = m.dim();
    for i in 0..d {
        for j in 0..d {
            let e = m.get(i, j);
            let ok = if i == j { e == s } else { e.is_point() && e.lo().is_zero() };
            if !ok {
                return None;
            }
        }
    }
    Some(s.clone())
}

/// Build the operator family of a pair in the given chart.
pub fn build_renorm_family(left: &AffineIFS, right: &AffineIFS, chart: AffChart) -> Result<RenormFamily> {
    if left.dim != right.dim {
        return Err(Error::ChartMismatch("systems act on different dimensions".into()));
    }
    let ratio = match &chart {
        AffChart::Scale1D | AffChart::ScaleVec { .. } => {
            if let AffChart::ScaleVec { dim } = chart {
                if dim != left.dim {
                    return Err(Error::ChartMismatch("chart dimension differs".into()));
                }
            } else if left.dim != 1 {
                return Err(Error::ChartMismatch("Scale1D needs one-dimensional systems".into()));
            }
            let l = scalar_of(left).ok_or_else(|| Error::ChartMismatch("left linear parts are not one scalar".into()))?;
            let r = scalar_of(right).ok_or_else(|| Error::ChartMismatch("right linear parts are not one scalar".into()))?;
            if l != r {
                return Err(Error::ChartMismatch("contraction ratios differ; scale fiber is not preserved".into()));
            }
            Some(l)
        }
        AffChart::GLChart { base } => {
            if base.dim() != left.dim {
                return Err(Error::ChartMismatch("base matrix dimension differs".into()));
            }
            None
        }
    };
    Ok(RenormFamily { chart, left: left.clone(), right: right.clone(), ratio })
}

impl RenormFamily {
    pub fn len(&self) -> u128 {
        self.left.len() * self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn op(&self, idx: u128) -> RenormOperator {
        let k2 = self.right.len();
        RenormOperator { i: idx / k2, j: idx % k2, label: idx % k2 }
    }

    fn ell(&self) -> Result<&DyInterval> {
        self.ratio.as_ref().ok_or_else(|| Error::ChartMismatch("operator needs a scale chart".into()))
    }

    /// `R_i⁻¹: X ↦ f_i⁻¹ ∘ X`.
    pub fn left_inverse(&self, i: u128, p: &ChartPoint) -> Result<ChartPoint> {
        match p {
            ChartPoint::Scale { s, t } => {
                let ell = self.ell()?;
                let ti = self.left.trans.get(i);
                Ok(ChartPoint::Scale {
                    s: s.div(ell)?,
                    t: t.iter().zip(&ti).map(|(a, b)| (a - b).div(ell)).collect::<Result<_>>()?,
                })
            }
            ChartPoint::GL { .. } => {
                let x = self.chart.to_affine(p)?;
                let fi = self.left.map(i).inverse()?;
                self.chart.from_affine(&fi.compose(&x))
            }
        }
    }

    /// `R'_j: X ↦ X ∘ f'_j`.
    pub fn right_op(&self, j: u128, p: &ChartPoint) -> Result<ChartPoint> {
        match p {
            ChartPoint::Scale { s, t } => {
                let ell = self.ell()?;
                let tj = self.right.trans.get(j);
                Ok(ChartPoint::Scale { s: s * ell, t: t.iter().zip(&tj).map(|(a, b)| &(s * b) + a).collect() })
            }
            ChartPoint::GL { .. } => {
                let x = self.chart.to_affine(p)?;
                self.chart.from_affine(&x.compose(&self.right.map(j)))
            }
        }
    }

    /// `R_{i,j}(X) = f_i⁻¹ ∘ X ∘ f'_j`.
    pub fn apply(&self, op: &RenormOperator, p: &ChartPoint) -> Result<ChartPoint> {
        match p {
            ChartPoint::Scale { s, t } => {
                let ell = self.ell()?;
                let ti = self.left.trans.get(op.i);
                let tj = self.right.trans.get(op.j);
                let t = t
                    .iter()
                    .zip(ti.iter().zip(&tj))
                    .map(|(x, (a, b))| (&(&(s * b) + x) - a).div(ell))
                    .collect::<Result<_>>()?;
                Ok(ChartPoint::Scale { s: s.clone(), t })
            }
            ChartPoint::GL { .. } => {
                let x = self.chart.to_affine(p)?;
                let fi = self.left.map(op.i).inverse()?;
                self.chart.from_affine(&fi.compose(&x).compose(&self.right.map(op.j)))
            }
        }
    }

    /// `R_{i,j}⁻¹(Y) = f_i ∘ Y ∘ f'_j⁻¹`.
    pub fn apply_inverse(&self, op: &RenormOperator, p: &ChartPoint) -> Result<ChartPoint> {
        match p {
            ChartPoint::Scale { s, t } => {
                let ell = self.ell()?;
                let ti = self.left.trans.get(op.i);
                let tj = self.right.trans.get(op.j);
                let t = t.iter().zip(ti.iter().zip(&tj)).map(|(y, (a, b))| &(&(ell * y) + a) - &(s * b)).collect();
                Ok(ChartPoint::Scale { s: s.clone(), t })
            }
            ChartPoint::GL { .. } => {
                let y = self.chart.to_affine(p)?;
                let gj = self.right.map(op.j).inverse()?;
                self.chart.from_affine(&self.left.map(op.i).compose(&y).compose(&gj))
            }
        }
    }

    /// Center `(0, t_i/(1−ℓ))` of the homothety `R_i⁻¹`.
    pub fn fixed_point_homothety(&self, i: u128) -> Result<ChartPoint> {
        let ell = self
            .ratio
            .as_ref()
            .ok_or_else(|| Error::Domain("R_i⁻¹ is a homothety only in scale charts".into()))?;
        let one_minus = &DyInterval::one(ell.prec()) - ell;
        let t = self.left.trans.get(i).iter().map(|x| x.div(&one_minus)).collect::<Result<_>>()?;
        Ok(ChartPoint::Scale { s: DyInterval::zero(ell.prec()), t })
    }

    /// `R_{i,j}` on the fiber `s` of a one-dimensional pair as `t ↦ α·t + β_{i·k'+j}`.
    pub fn shift_form(&self, s: &DyInterval) -> Result<(DyInterval, Grid1D)> {
        let ell = self.ell()?;
        let alpha = ell.recip()?;
        let (tl, tr) = one_dim_grids(&self.left, &self.right)?;
        let scale_r = &alpha * s;
        let origin = &(&(s * &tr.origin) - &tl.origin) * &alpha;
        let mut axes: Vec<GridAxis> =
            tl.axes.iter().map(|a| GridAxis { count: a.count, step: -(&a.step * &alpha) }).collect();
        axes.extend(tr.axes.iter().map(|a| GridAxis { count: a.count, step: &a.step * &scale_r }));
        Ok((alpha, Grid1D { origin, axes }))
    }

    /// `R_i⁻¹` in the `t` coordinate as `t ↦ α·t + β_i`.
    pub fn left_shift_form(&self) -> Result<(DyInterval, Grid1D)> {
        let alpha = self.ell()?.recip()?;
        let (tl, _) = one_dim_grids(&self.left, &self.right)?;
        let axes = tl.axes.iter().map(|a| GridAxis { count: a.count, step: -(&a.step * &alpha) }).collect();
        Ok((alpha.clone(), Grid1D { origin: -(&tl.origin * &alpha), axes }))
    }

    /// `R'_j` in the `t` coordinate on fiber `s` as `t ↦ t + β_j`.
    pub fn right_shift_form(&self, s: &DyInterval) -> Result<(DyInterval, Grid1D)> {
        let (_, tr) = one_dim_grids(&self.left, &self.right)?;
        let axes = tr.axes.iter().map(|a| GridAxis { count: a.count, step: &a.step * s }).collect();
        Ok((DyInterval::one(s.prec()), Grid1D { origin: s * &tr.origin, axes }))
    }
}

fn as_grid(t: &Translations) -> Result<Grid1D> {
    match t {
        Translations::Product(g) if g.len() == 1 => Ok(g[0].clone()),
        Translations::Explicit(v) if v.len() == 1 => Ok(Grid1D::single(v[0][0].clone())),
        _ => Err(Error::ChartMismatch("shift form needs one-dimensional grid translations".into())),
    }
}

fn one_dim_grids(l: &AffineIFS, r: &AffineIFS) -> Result<(Grid1D, Grid1D)> {
    Ok((as_grid(&l.trans)?, as_grid(&r.trans)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rignum::Dyadic;

    fn r(p: i64, q: i64) -> DyInterval {
        DyInterval::from_ratio(p, q, 128)
    }

    fn line_ifs(ell: DyInterval, grid: Grid1D) -> AffineIFS {
        AffineIFS {
            dim: 1,
            trans: Translations::Product(vec![grid]),
            linear: LinearRule::Uniform(IMatrix::scalar(1, &ell)),
            domain: vec![DyInterval::new(Dyadic::zero(), Dyadic::one(), 128).unwrap()],
            exact: None,
        }
    }

    fn thirds() -> AffineIFS {
        line_ifs(r(1, 3), Grid1D::arithmetic(r(0, 1), 2, r(2, 3)))
    }

    #[test]
    fn single_half_map_gives_identity() {
        let f = line_ifs(r(1, 2), Grid1D::single(r(0, 1)));
        let fam = build_renorm_family(&f, &f, AffChart::Scale1D).unwrap();
        assert_eq!(fam.len(), 1);
        // identity on the scale fiber and at t = 0; off the fiber t is doubled
        let p = ChartPoint::scale1(r(3, 7), r(0, 1));
        assert_eq!(fam.apply(&fam.op(0), &p).unwrap(), p);
        let q = fam.apply(&fam.op(0), &ChartPoint::scale1(r(3, 7), r(-2, 5))).unwrap();
        assert_eq!(q, ChartPoint::scale1(r(3, 7), r(-4, 5)));
    }

    #[test]
    fn thirds_homothety_center() {
        let fam = build_renorm_family(&thirds(), &thirds(), AffChart::Scale1D).unwrap();
        match fam.fixed_point_homothety(1).unwrap() {
            ChartPoint::Scale { t, .. } => assert!(t[0].contains(&Dyadic::one())),
            _ => unreachable!(),
        }
        match fam.fixed_point_homothety(0).unwrap() {
            ChartPoint::Scale { t, .. } => assert!(t[0].contains(&Dyadic::zero())),
            _ => unreachable!(),
        }
        let c = ChartPoint::scale1(r(1, 5), r(1, 1));
        match fam.left_inverse(1, &c).unwrap() {
            ChartPoint::Scale { s, t } => {
                assert!(t[0].contains(&Dyadic::one()));
                assert!(s.overlaps(&r(3, 5)));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn unequal_ratios_break_scale_chart() {
        let g = line_ifs(r(1, 4), Grid1D::arithmetic(r(0, 1), 2, r(3, 4)));
        assert!(matches!(build_renorm_family(&thirds(), &g, AffChart::Scale1D), Err(Error::ChartMismatch(_))));
    }

    #[test]
    fn forward_inverse_and_composition() {
        let fam = build_renorm_family(&thirds(), &thirds(), AffChart::Scale1D).unwrap();
        let p = ChartPoint::scale1(r(2, 5), r(1, 7));
        for idx in 0..fam.len() {
            let op = fam.op(idx);
            let q = fam.apply(&op, &p).unwrap();
            assert!(fam.apply_inverse(&op, &q).unwrap().overlaps(&p));
            let split = fam.left_inverse(op.i, &fam.right_op(op.j, &p).unwrap()).unwrap();
            assert!(split.overlaps(&q));
            let x = fam.chart.to_affine(&p).unwrap();
            let direct = fam.left.map(op.i).inverse().unwrap().compose(&x).compose(&fam.right.map(op.j));
            assert!(fam.chart.from_affine(&direct).unwrap().overlaps(&q));
        }
    }

    #[test]
    fn shift_form_matches_apply() {
        let fam = build_renorm_family(&thirds(), &thirds(), AffChart::Scale1D).unwrap();
        let s = r(1, 5);
        let (alpha, beta) = fam.shift_form(&s).unwrap();
        let t = r(3, 11);
        for idx in 0..fam.len() {
            let via = &(&alpha * &t) + &beta.value(idx as u64);
            match fam.apply(&fam.op(idx), &ChartPoint::scale1(s.clone(), t.clone())).unwrap() {
                ChartPoint::Scale { t: out, .. } => assert!(out[0].overlaps(&via)),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn gl_chart_agrees_with_scale_chart() {
        let fam = build_renorm_family(&thirds(), &thirds(), AffChart::Scale1D).unwrap();
        let gl = build_renorm_family(&thirds(), &thirds(), AffChart::GLChart { base: IMatrix::scalar(1, &r(1, 2)) })
            .unwrap();
        let p = ChartPoint::scale1(r(1, 2), r(1, 9));
        let x = fam.chart.to_affine(&p).unwrap();
        let pg = gl.chart.from_affine(&x).unwrap();
        let op = fam.op(3);
        let a = fam.chart.to_affine(&fam.apply(&op, &p).unwrap()).unwrap();
        let b = gl.chart.to_affine(&gl.apply(&op, &pg).unwrap()).unwrap();
        assert!(a.linear.overlaps(&b.linear));
        assert!(a.trans[0].overlaps(&b.trans[0]));
    }
}
