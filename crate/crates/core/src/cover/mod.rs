//! Covering certificates for renormalization families.
//!
//! A certificate lists cells covering `B_δ(V)` and, per cell, an operator sending it into
//! `V_(δ)`. One-dimensional fiber families are swept with compressed runs; everything else is
//! handled by adaptive bisection.

pub mod bisect;
pub mod sweep;

pub use bisect::{bisect_cover, replay_boxes, split_widest, BisectConfig, CellBox, CoverFamily};
pub use sweep::{replay_runs, run_lookup, sweep_cover, CellRun, ShiftFamily, SweepConfig};

use crate::error::{Error, Result};
use crate::fractal::Translations;
use crate::renorm::{AffChart, ChartPoint, RenormFamily};
use crate::rignum::{Dyadic, DyInterval, IMatrix, Round};

/// A box of chart coordinates; only `inflatable` coordinates are thickened or thinned by `δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub core: Vec<DyInterval>,
    pub inflatable: Vec<bool>,
}

impl Region {
    pub fn new(core: Vec<DyInterval>, inflatable: Vec<bool>) -> Result<Self> {
        if core.len() != inflatable.len() {
            return Err(Error::Domain("mask length differs from region dimension".into()));
        }
        Ok(Region { core, inflatable })
    }

    /// `{s} × I` in a scale chart.
    pub fn fiber(s: DyInterval, t: Vec<DyInterval>) -> Self {
        let mut core = vec![s];
        let n = t.len();
        core.extend(t);
        let mut inflatable = vec![false];
        inflatable.extend(std::iter::repeat(true).take(n));
        Region { core, inflatable }
    }

    pub fn b_delta(&self, delta: &Dyadic) -> Vec<DyInterval> {
        self.core.iter().zip(&self.inflatable).map(|(c, &f)| if f { c.inflate(delta) } else { c.clone() }).collect()
    }

    pub fn v_delta(&self, delta: &Dyadic) -> Result<Vec<DyInterval>> {
        self.core
            .iter()
            .zip(&self.inflatable)
            .map(|(c, &f)| {
                if f {
                    c.deflate(delta).ok_or_else(|| Error::Domain("δ exceeds half the region width".into()))
                } else {
                    Ok(c.clone())
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageCells {
    Runs(Vec<CellRun>),
    Boxes(Vec<CellBox>),
}

impl StageCells {
    pub fn cell_count(&self) -> u64 {
        match self {
            StageCells::Runs(r) => r.iter().map(|x| x.count).sum(),
            StageCells::Boxes(b) => b.len() as u64,
        }
    }

    pub fn record_count(&self) -> usize {
        match self {
            StageCells::Runs(r) => r.len(),
            StageCells::Boxes(b) => b.len(),
        }
    }
}

/// One covering check: `cells` cover `source` and every cell is sent into `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    /// Separability class the operators are drawn from, if restricted.
    pub class: Option<u64>,
    pub source: Vec<DyInterval>,
    pub target: Vec<DyInterval>,
    pub cells: StageCells,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertMeta {
    pub precision: u32,
    pub max_depth: u32,
    pub cells: u64,
    pub records: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringCertificate {
    /// Inflation of the covered region.
    pub delta: Dyadic,
    /// Margin of the images inside the region.
    pub delta_out: Dyadic,
    pub classes: u64,
    pub stages: Vec<Stage>,
    pub meta: CertMeta,
}

impl CoveringCertificate {
    fn assemble(delta: &Dyadic, delta_out: &Dyadic, classes: u64, stages: Vec<Stage>, prec: u32, depth: u32) -> Self {
        let cells = stages.iter().map(|s| s.cells.cell_count()).sum();
        let records = stages.iter().map(|s| s.cells.record_count() as u64).sum();
        CoveringCertificate {
            delta: delta.clone(),
            delta_out: delta_out.clone(),
            classes,
            stages,
            meta: CertMeta { precision: prec, max_depth: depth, cells, records },
        }
    }

    /// The strong covering constant `min(δ_in, δ_out)`.
    pub fn certified_delta(&self) -> Dyadic {
        self.delta.clone().min(self.delta_out.clone())
    }
}

/// How operators are grouped into separability classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Partition {
    /// A single class.
    Whole,
    /// Class of `R_{i,j}` is the digit of `j` on this axis of the right translation grid.
    RightAxis(usize),
    /// Explicit label per operator index.
    Labels(Vec<u64>),
}

impl Partition {
    fn classes(&self, fam: &RenormFamily) -> Result<u64> {
        match self {
            Partition::Whole => Ok(1),
            Partition::RightAxis(a) => match &fam.right.trans {
                Translations::Product(g) if g.len() == 1 && *a < g[0].axes.len() => Ok(g[0].axes[*a].count),
                _ => Err(Error::Domain("axis partition needs a one-dimensional grid".into())),
            },
            Partition::Labels(l) => {
                if l.len() as u128 != fam.len() {
                    return Err(Error::Domain("one label per operator is required".into()));
                }
                Ok(l.iter().max().map(|m| m + 1).unwrap_or(0))
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoverConfig {
    pub bisect: BisectConfig,
    pub sweep: SweepConfig,
}

impl CoverFamily for ShiftFamily {
    fn len(&self) -> u128 {
        self.beta.len() as u128
    }

    fn image(&self, op: u128, cell: &[DyInterval]) -> Result<Vec<DyInterval>> {
        Ok(vec![ShiftFamily::image(self, self.parent(op as u64), &cell[0])?])
    }
}

fn point_of(chart: &AffChart, cell: &[DyInterval]) -> Result<ChartPoint> {
    match chart {
        AffChart::Scale1D | AffChart::ScaleVec { .. } => Ok(ChartPoint::Scale { s: cell[0].clone(), t: cell[1..].to_vec() }),
        AffChart::GLChart { base } => {
            let d = base.dim();
            if cell.len() != d * d + d {
                return Err(Error::Domain("GL chart cell has the wrong dimension".into()));
            }
            Ok(ChartPoint::GL { x: IMatrix::from_entries(d, cell[..d * d].to_vec())?, v: cell[d * d..].to_vec() })
        }
    }
}

fn box_of(p: &ChartPoint) -> Vec<DyInterval> {
    match p {
        ChartPoint::Scale { s, t } => std::iter::once(s.clone()).chain(t.iter().cloned()).collect(),
        ChartPoint::GL { x, v } => x.entries().iter().chain(v).cloned().collect(),
    }
}

impl CoverFamily for RenormFamily {
    fn len(&self) -> u128 {
        RenormFamily::len(self)
    }

    fn image(&self, op: u128, cell: &[DyInterval]) -> Result<Vec<DyInterval>> {
        let p = point_of(&self.chart, cell)?;
        Ok(box_of(&self.apply(&self.op(op), &p)?))
    }
}

/// The composite family `R_{i,j}` on the fiber of `region` as a shift family, when available.
fn fiber_shift(region: &Region, fam: &RenormFamily) -> Option<ShiftFamily> {
    if fam.chart != AffChart::Scale1D || region.core.len() != 2 {
        return None;
    }
    let s = &region.core[0];
    if !s.is_point() {
        return None;
    }
    let (alpha, beta) = fam.shift_form(s).ok()?;
    Some(ShiftFamily::new(alpha, beta))
}

fn left_axes(fam: &RenormFamily) -> usize {
    match &fam.left.trans {
        Translations::Product(g) => g[0].axes.len(),
        Translations::Explicit(_) => 0,
    }
}

fn class_of_label(labels: &Partition, fam: &RenormFamily, op: u128) -> u64 {
    match labels {
        Partition::Whole => 0,
        Partition::Labels(l) => l[op as usize],
        Partition::RightAxis(a) => match &fam.right.trans {
            Translations::Product(g) => g[0].digits((op % fam.right.len()) as u64)[*a],
            Translations::Explicit(_) => 0,
        },
    }
}

/// Certify `B_δ(V) ⊂ ⋃_{R ∈ class} R⁻¹(V_(δ))` for every class of the partition.
pub fn verify_separable(
    region: &Region,
    fam: &RenormFamily,
    partition: &Partition,
    delta: &Dyadic,
    cfg: &CoverConfig,
) -> Result<CoveringCertificate> {
    if delta.signum() <= 0 {
        return Err(Error::Domain("δ must be positive".into()));
    }
    let classes = partition.classes(fam)?;
    let source = region.b_delta(delta);
    let target = region.v_delta(delta)?;
    let prec = region.core.iter().map(|x| x.prec()).max().unwrap_or(64);
    let mut stages = Vec::new();
    let shift = fiber_shift(region, fam);
    for class in 0..classes {
        let restricted = match (&shift, partition) {
            (Some(sf), Partition::Whole) => Some(sf.clone()),
            (Some(sf), Partition::RightAxis(a)) => Some(sf.restrict(left_axes(fam) + a, class)?),
            _ => None,
        };
        let cells = match restricted {
            Some(sf) => {
                let runs = sweep_cover(&sf, source[1].lo(), source[1].hi(), &target[1], &cfg.sweep)
                    .map_err(|e| tag_class(e, class))?;
                StageCells::Runs(runs)
            }
            None => {
                let allowed = |op: u128| class_of_label(partition, fam, op) == class;
                StageCells::Boxes(bisect_cover(fam, &source, &target, &allowed, &cfg.bisect).map_err(|e| tag_class(e, class))?)
            }
        };
        stages.push(Stage {
            name: "composite".into(),
            class: (classes > 1).then_some(class),
            source: source.clone(),
            target: target.clone(),
            cells,
        });
    }
    Ok(CoveringCertificate::assemble(delta, delta, classes, stages, prec, cfg.bisect.max_depth))
}

/// Certify the strong covering condition with the whole family.
pub fn verify_covering(region: &Region, fam: &RenormFamily, delta: &Dyadic, cfg: &CoverConfig) -> Result<CoveringCertificate> {
    verify_separable(region, fam, &Partition::Whole, delta, cfg)
}

fn tag_class(e: Error, class: u64) -> Error {
    match e {
        Error::CoverageFailure { reason, witness } => Error::coverage(format!("class {class}: {reason}"), witness),
        other => other,
    }
}

/// Re-check a certificate produced by [`verify_separable`].
pub fn replay_separable(
    cert: &CoveringCertificate,
    region: &Region,
    fam: &RenormFamily,
    partition: &Partition,
) -> Result<()> {
    let classes = partition.classes(fam)?;
    if cert.classes != classes || cert.stages.len() as u64 != classes {
        return Err(Error::coverage("certificate classes differ from the partition", String::new()));
    }
    let source = region.b_delta(&cert.delta);
    let target = region.v_delta(&cert.delta_out)?;
    let shift = fiber_shift(region, fam);
    for (class, stage) in (0..classes).zip(&cert.stages) {
        if stage.source != source || stage.target != target {
            return Err(Error::coverage("stage boxes differ from the region", String::new()));
        }
        match &stage.cells {
            StageCells::Runs(runs) => {
                let sf = match (&shift, partition) {
                    (Some(sf), Partition::Whole) => sf.clone(),
                    (Some(sf), Partition::RightAxis(a)) => sf.restrict(left_axes(fam) + a, class)?,
                    _ => return Err(Error::coverage("runs need a fiber family", String::new())),
                };
                replay_runs(&sf, runs, source[1].lo(), source[1].hi(), &target[1]).map_err(|e| tag_class(e, class))?;
            }
            StageCells::Boxes(cells) => {
                let allowed = |op: u128| class_of_label(partition, fam, op) == class;
                replay_boxes(fam, cells, &source, &target, &allowed, cert.meta.max_depth).map_err(|e| tag_class(e, class))?;
            }
        }
    }
    Ok(())
}

/// A one-dimensional pair split into its two halves: `R_i⁻¹` from fiber `s` to fiber `s/ℓ` and
/// `R'_j` back, meeting in the intermediate interval `M = J` inflated by `mid_inflation·δ`.
#[derive(Clone, Debug)]
pub struct FiberPair {
    pub left: ShiftFamily,
    pub right: ShiftFamily,
    /// Axis of the right grid carrying the separability class.
    pub class_axis: Option<usize>,
    pub interval: DyInterval,
    pub mid_core: DyInterval,
    pub mid_inflation: Dyadic,
}

impl FiberPair {
    /// Halves of a scale-chart family on the fiber `s`.
    pub fn from_family(
        fam: &RenormFamily,
        s: &DyInterval,
        interval: DyInterval,
        mid_core: DyInterval,
        mid_inflation: Dyadic,
        class_axis: Option<usize>,
    ) -> Result<Self> {
        let (la, lb) = fam.left_shift_form()?;
        let ell = fam.ratio.as_ref().ok_or_else(|| Error::ChartMismatch("fiber pair needs a scale chart".into()))?;
        let (ra, rb) = fam.right_shift_form(&s.div(ell)?)?;
        Ok(FiberPair {
            left: ShiftFamily::new(la, lb),
            right: ShiftFamily::new(ra, rb),
            class_axis,
            interval,
            mid_core,
            mid_inflation,
        })
    }

    pub fn classes(&self) -> u64 {
        self.class_axis.map(|a| self.right.beta.axes[a].count).unwrap_or(1)
    }

    fn class_family(&self, class: u64) -> Result<ShiftFamily> {
        match self.class_axis {
            Some(a) => self.right.restrict(a, class),
            None => Ok(self.right.clone()),
        }
    }

    /// Operators `(i, j)` the certificate assigns to `t`, `j` drawn from `class`.
    pub fn lookup(&self, cert: &CoveringCertificate, t: &Dyadic, class: u64) -> Option<(u128, u128)> {
        let runs = |st: &Stage| match &st.cells {
            StageCells::Runs(r) => Some(r.clone()),
            StageCells::Boxes(_) => None,
        };
        let i = run_lookup(&runs(cert.stages.first()?)?, t)?;
        let m = self.left.image(i, &DyInterval::point(t.clone(), self.left.alpha.prec())).ok()?;
        let st = cert.stages.get(1 + class as usize)?;
        let j = run_lookup(&runs(st)?, &m.mid()).or_else(|| run_lookup(&runs(st)?, m.lo()))?;
        Some((i, j))
    }

    pub fn mid(&self, delta_in: &Dyadic) -> DyInterval {
        self.mid_core.inflate(&(&self.mid_inflation * delta_in).round(64, Round::Up))
    }
}

/// Two-stage certificate: `B_δin(I) → M` by the left family, then `M → I_(δout)` per class.
pub fn verify_factored(pair: &FiberPair, delta_in: &Dyadic, delta_out: &Dyadic, cfg: &SweepConfig) -> Result<CoveringCertificate> {
    if delta_in.signum() <= 0 || delta_out.signum() <= 0 {
        return Err(Error::Domain("δ must be positive".into()));
    }
    let src = pair.interval.inflate(delta_in);
    let mid = pair.mid(delta_in);
    let tgt = pair.interval.deflate(delta_out).ok_or_else(|| Error::Domain("δ exceeds half of |I|".into()))?;
    let mut stages = Vec::new();
    let runs = sweep_cover(&pair.left, src.lo(), src.hi(), &mid, cfg).map_err(|e| tag_stage(e, "left"))?;
    stages.push(Stage {
        name: "left".into(),
        class: None,
        source: vec![src.clone()],
        target: vec![mid.clone()],
        cells: StageCells::Runs(runs),
    });
    let classes = pair.classes();
    for class in 0..classes {
        let fam = pair.class_family(class)?;
        let runs = sweep_cover(&fam, mid.lo(), mid.hi(), &tgt, cfg).map_err(|e| tag_class(tag_stage(e, "right"), class))?;
        stages.push(Stage {
            name: "right".into(),
            class: pair.class_axis.map(|_| class),
            source: vec![mid.clone()],
            target: vec![tgt.clone()],
            cells: StageCells::Runs(runs),
        });
    }
    Ok(CoveringCertificate::assemble(delta_in, delta_out, classes, stages, pair.left.alpha.prec(), 0))
}

fn tag_stage(e: Error, stage: &str) -> Error {
    match e {
        Error::CoverageFailure { reason, witness } => Error::coverage(format!("{stage} stage: {reason}"), witness),
        other => other,
    }
}

/// Re-check a certificate produced by [`verify_factored`].
pub fn replay_factored(cert: &CoveringCertificate, pair: &FiberPair) -> Result<()> {
    let src = pair.interval.inflate(&cert.delta);
    let mid = pair.mid(&cert.delta);
    let tgt = pair.interval.deflate(&cert.delta_out).ok_or_else(|| Error::Domain("δ exceeds half of |I|".into()))?;
    let classes = pair.classes();
    if cert.stages.len() as u64 != classes + 1 || cert.classes != classes {
        return Err(Error::coverage("certificate stages differ from the pair", String::new()));
    }
    let runs = |st: &Stage| match &st.cells {
        StageCells::Runs(r) => Ok(r.clone()),
        StageCells::Boxes(_) => Err(Error::coverage("expected cell runs", String::new())),
    };
    let left = &cert.stages[0];
    if left.source != vec![src.clone()] || left.target != vec![mid.clone()] {
        return Err(Error::coverage("left stage boxes differ from the pair", String::new()));
    }
    replay_runs(&pair.left, &runs(left)?, src.lo(), src.hi(), &mid).map_err(|e| tag_stage(e, "left"))?;
    for (class, st) in (0..classes).zip(&cert.stages[1..]) {
        if st.source != vec![mid.clone()] || st.target != vec![tgt.clone()] {
            return Err(Error::coverage("right stage boxes differ from the pair", String::new()));
        }
        let fam = pair.class_family(class)?;
        replay_runs(&fam, &runs(st)?, mid.lo(), mid.hi(), &tgt).map_err(|e| tag_class(tag_stage(e, "right"), class))?;
    }
    Ok(())
}

/// Largest `δ` found by halving from `start` and then `refine` bisection steps; not claimed
/// maximal, only certified.
pub fn max_delta<T>(
    start: &Dyadic,
    min: &Dyadic,
    refine: u32,
    mut attempt: impl FnMut(&Dyadic) -> Result<T>,
) -> Result<(Dyadic, T)> {
    let mut bad: Option<Dyadic> = None;
    let mut d = start.clone();
    let (mut good, mut best) = loop {
        if &d < min {
            return Err(Error::coverage("no δ in the search range certifies", format!("δ < {:e}", min.to_f64())));
        }
        match attempt(&d) {
            Ok(c) => break (d, c),
            Err(Error::ResourceLimit(m)) => return Err(Error::ResourceLimit(m)),
            Err(_) => {
                bad = Some(d.clone());
                d = d.shl(-1);
            }
        }
    };
    if let Some(mut hi) = bad {
        for _ in 0..refine {
            let m = Dyadic::midpoint(&good, &hi).round(24, Round::Down);
            if m <= good || m >= hi {
                break;
            }
            match attempt(&m) {
                Ok(c) => {
                    good = m;
                    best = c;
                }
                Err(Error::ResourceLimit(msg)) => return Err(Error::ResourceLimit(msg)),
                Err(_) => hi = m,
            }
        }
    }
    Ok((good, best))
}
