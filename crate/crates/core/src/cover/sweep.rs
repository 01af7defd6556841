//! Left-to-right sweep for one-dimensional families `t ↦ α·t + β_op` with grid-indexed shifts.
//!
//! Consecutive cells that move one grid axis by a fixed number of digits are stored as a single
//! run and certified at once by evaluating the run affinely in its index.

use crate::error::{Error, Result};
use crate::fractal::Grid1D;
use crate::rignum::{Dyadic, DyInterval, Round};

/// Cells `[lo + k·step, hi + k·step]` for `k < count`, cell `k` sent by operator `op + k·op_step`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellRun {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub step: Dyadic,
    pub count: u64,
    pub op: u128,
    pub op_step: i128,
    /// Hull of the images of all cells of the run.
    pub image: DyInterval,
}

impl CellRun {
    pub fn single(lo: Dyadic, hi: Dyadic, op: u128, image: DyInterval) -> Self {
        CellRun { lo, hi, step: Dyadic::zero(), count: 1, op, op_step: 0, image }
    }

    /// Right end of the last cell.
    pub fn end(&self) -> Dyadic {
        &self.hi + &(&self.step * &Dyadic::from_i64(self.count as i64 - 1))
    }
}

/// Operator of the first cell containing `x`.
pub fn run_lookup(runs: &[CellRun], x: &Dyadic) -> Option<u128> {
    for run in runs {
        if x < &run.lo || x > &run.end() {
            continue;
        }
        if run.count == 1 || run.step.signum() == 0 {
            if x <= &run.hi {
                return Some(run.op);
            }
            continue;
        }
        let q = ((x - &run.lo).to_rational() / run.step.to_rational()).floor().to_integer();
        let k0: i64 = num_traits::ToPrimitive::to_i64(&q).unwrap_or(i64::MAX).min(run.count as i64 - 1);
        for k in [k0 - 1, k0] {
            if k < 0 {
                continue;
            }
            let kd = Dyadic::from_i64(k);
            let off = &run.step * &kd;
            if &(&run.lo + &off) <= x && x <= &(&run.hi + &off) {
                return Some((run.op as i128 + k as i128 * run.op_step) as u128);
            }
        }
    }
    None
}

/// `t ↦ α·t + β_op`, `β` a grid; sub-families keep the operator numbering of their parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftFamily {
    pub alpha: DyInterval,
    pub beta: Grid1D,
    pub base: u128,
    pub strides: Vec<u128>,
}

impl ShiftFamily {
    pub fn new(alpha: DyInterval, beta: Grid1D) -> Self {
        let strides = (0..beta.axes.len()).map(|k| beta.stride(k) as u128).collect();
        ShiftFamily { alpha, beta, base: 0, strides }
    }

    pub fn len(&self) -> u64 {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Operators whose grid digit on `axis` equals `digit`.
    pub fn restrict(&self, axis: usize, digit: u64) -> Result<ShiftFamily> {
        let beta = self.beta.fix_axis(axis, digit)?;
        let mut strides = self.strides.clone();
        let s = strides.remove(axis);
        Ok(ShiftFamily { alpha: self.alpha.clone(), beta, base: self.base + digit as u128 * s, strides })
    }

    pub fn parent(&self, sub: u64) -> u128 {
        let d = self.beta.digits(sub);
        self.base + d.iter().zip(&self.strides).map(|(&x, &s)| x as u128 * s).sum::<u128>()
    }

    /// Grid digits of a parent index that belongs to this family.
    pub fn digits_of(&self, parent: u128) -> Option<Vec<u64>> {
        let mut rem = parent.checked_sub(self.base)?;
        let mut out = Vec::with_capacity(self.strides.len());
        for (ax, &s) in self.beta.axes.iter().zip(&self.strides) {
            let d = rem / s;
            if d >= ax.count as u128 {
                return None;
            }
            rem -= d * s;
            out.push(d as u64);
        }
        (rem == 0).then_some(out)
    }

    pub fn beta_of(&self, parent: u128) -> Result<DyInterval> {
        let d = self.digits_of(parent).ok_or_else(|| Error::Domain(format!("operator {parent} not in family")))?;
        Ok(self.beta.value_digits(&d))
    }

    pub fn image(&self, parent: u128, cell: &DyInterval) -> Result<DyInterval> {
        Ok(&(&self.alpha * cell) + &self.beta_of(parent)?)
    }

    /// Axis and digit increment realizing `op_step` from `op` over `count` cells.
    fn run_axis(&self, op: u128, op_step: i128, count: u64) -> Option<(usize, i64)> {
        let digits = self.digits_of(op)?;
        for (a, (&s, ax)) in self.strides.iter().zip(&self.beta.axes).enumerate() {
            if op_step % s as i128 != 0 {
                continue;
            }
            let q = op_step / s as i128;
            if q.unsigned_abs() >= ax.count as u128 {
                continue;
            }
            let last = digits[a] as i128 + (count as i128 - 1) * q;
            if last < 0 || last >= ax.count as i128 {
                return None;
            }
            return Some((a, q as i64));
        }
        None
    }

    /// Enclosure of all images of a run, affine in the cell index.
    pub fn run_image(&self, run: &CellRun) -> Result<DyInterval> {
        let prec = self.alpha.prec();
        let cell = DyInterval::new(run.lo.clone(), run.hi.clone(), prec)?;
        let first = self.image(run.op, &cell)?;
        if run.count == 1 {
            return Ok(first);
        }
        let (a, q) = self
            .run_axis(run.op, run.op_step, run.count)
            .ok_or_else(|| Error::Domain("run does not move along one grid axis".into()))?;
        let dbeta = &self.beta.axes[a].step * &DyInterval::from_i64(q, prec);
        let drift = &(&self.alpha * &DyInterval::point(run.step.clone(), prec)) + &dbeta;
        let k = DyInterval::new(Dyadic::zero(), Dyadic::from_i64(run.count as i64 - 1), prec)?;
        Ok(&first + &(&k * &drift))
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub max_runs: usize,
    pub max_run_len: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { max_runs: 2_000_000, max_run_len: u64::MAX }
    }
}

struct Planner<'a> {
    fam: &'a ShiftFamily,
    t_lo: DyInterval,
    t_hi: DyInterval,
    prec: u32,
}

impl Planner<'_> {
    /// Operator of largest reach whose preimage of the target starts at or before (strictly
    /// before when `strict`) `x`.
    fn reach(&self, x: &Dyadic, strict: bool) -> Option<u64> {
        let v = &self.t_lo - &(&self.fam.alpha * &DyInterval::point(x.clone(), self.prec));
        self.fam.beta.ceil_index(&v.mid(), strict)
    }

    fn pre_lo(&self, sub: u64) -> Dyadic {
        let b = self.fam.beta.value(sub);
        (&self.t_lo - &b).div(&self.fam.alpha).map(|v| v.mid()).unwrap_or_else(|_| Dyadic::zero())
    }

    fn pre_hi(&self, sub: u64) -> Dyadic {
        let b = self.fam.beta.value(sub);
        (&self.t_hi - &b).div(&self.fam.alpha).map(|v| v.mid()).unwrap_or_else(|_| Dyadic::zero())
    }
}

fn fmt_cell(lo: &Dyadic, hi: &Dyadic) -> String {
    format!("[{:.17e}, {:.17e}]", lo.to_f64(), hi.to_f64())
}

/// Cover `[lo, hi]` by runs whose images lie in `target`.
pub fn sweep_cover(
    fam: &ShiftFamily,
    lo: &Dyadic,
    hi: &Dyadic,
    target: &DyInterval,
    cfg: &SweepConfig,
) -> Result<Vec<CellRun>> {
    if fam.is_empty() {
        return Err(Error::coverage("empty family", fmt_cell(lo, hi)));
    }
    if !fam.alpha.is_positive() {
        return Err(Error::Domain("sweep needs α > 0".into()));
    }
    let prec = fam.alpha.prec();
    let p = Planner {
        fam,
        t_lo: DyInterval::point(target.lo().clone(), prec),
        t_hi: DyInterval::point(target.hi().clone(), prec),
        prec,
    };
    let round = |d: Dyadic| d.round(prec + 16, Round::Down);
    let mut out: Vec<CellRun> = Vec::new();
    let mut x = lo.clone();
    let push = |run: CellRun, out: &mut Vec<CellRun>| -> Result<()> {
        if out.len() >= cfg.max_runs {
            return Err(Error::ResourceLimit(format!("more than {} cell runs", cfg.max_runs)));
        }
        out.push(run);
        Ok(())
    };
    loop {
        let o = p.reach(&x, false).ok_or_else(|| Error::coverage("no operator reaches the point", fmt_cell(&x, &x)))?;
        let r = p.pre_hi(o);
        if r <= x {
            return Err(Error::coverage("no operator preimage contains the point", fmt_cell(&x, &x)));
        }
        let op = fam.parent(o);
        if &r >= hi {
            let cell = DyInterval::new(x.clone(), hi.clone(), prec)?;
            let image = fam.image(op, &cell)?;
            if !target.encloses(&image) {
                return Err(Error::coverage("final cell image leaves the target", fmt_cell(&x, hi)));
            }
            push(CellRun::single(x, hi.clone(), op, image), &mut out)?;
            return Ok(out);
        }
        let o2 = p
            .reach(&r, true)
            .filter(|&o2| o2 != o && p.pre_hi(o2) > r)
            .ok_or_else(|| Error::coverage("gap between operator preimages", fmt_cell(&r, &r)))?;
        let e = round(Dyadic::midpoint(&p.pre_lo(o2), &r));
        if e <= x {
            return Err(Error::coverage("consecutive preimages do not overlap", fmt_cell(&x, &e)));
        }
        let cell = DyInterval::new(x.clone(), e.clone(), prec)?;
        let image = fam.image(op, &cell)?;
        if !target.encloses(&image) {
            return Err(Error::coverage("cell image leaves the target", fmt_cell(&x, &e)));
        }
        push(CellRun::single(x, e.clone(), op, image), &mut out)?;
        x = e;

        // try a run starting at x with operator o2, advancing by the same digit move
        let op2 = fam.parent(o2);
        let op_step = op2 as i128 - op as i128;
        let Some((a, q)) = fam.run_axis(op2, op_step, 1) else { continue };
        let dbeta = &fam.beta.axes[a].step * &DyInterval::from_i64(q, prec);
        let cstep = match (-dbeta).div(&fam.alpha) {
            Ok(v) if v.is_positive() => round(v.mid()),
            _ => continue,
        };
        let d0 = fam.digits_of(op2).map(|d| d[a] as i64).unwrap_or(0);
        let count_a = fam.beta.axes[a].count as i64;
        let by_digits = if q > 0 { (count_a - 1 - d0) / q + 1 } else { d0 / (-q) + 1 } as u64;
        let room = (hi - &x).to_rational() / cstep.to_rational();
        let by_space = room.floor().to_integer().try_into().unwrap_or(u64::MAX);
        let mut k = by_digits.min(by_space).min(cfg.max_run_len);
        while k >= 2 {
            let mut run = CellRun {
                lo: x.clone(),
                hi: &x + &cstep,
                step: cstep.clone(),
                count: k,
                op: op2,
                op_step,
                image: DyInterval::zero(prec),
            };
            let img = fam.run_image(&run)?;
            if target.encloses(&img) {
                run.image = img;
                x = &x + &(&cstep * &Dyadic::from_i64(k as i64));
                push(run, &mut out)?;
                break;
            }
            k /= 2;
        }
        if &x >= hi {
            return Ok(out);
        }
    }
}

/// Re-check runs: union covers `[lo, hi]` and every image lies in `target`.
pub fn replay_runs(fam: &ShiftFamily, runs: &[CellRun], lo: &Dyadic, hi: &Dyadic, target: &DyInterval) -> Result<()> {
    let mut order: Vec<&CellRun> = runs.iter().collect();
    order.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut reach = lo.clone();
    for run in &order {
        if run.count == 0 || run.hi < run.lo || (run.count > 1 && (run.step.signum() < 0 || run.step > &run.hi - &run.lo)) {
            return Err(Error::coverage("malformed run", fmt_cell(&run.lo, &run.hi)));
        }
        if run.lo > reach {
            return Err(Error::coverage("cells leave a gap", fmt_cell(&reach, &run.lo)));
        }
        let img = fam.run_image(run)?;
        if !target.encloses(&img) {
            return Err(Error::coverage(
                format!("image of operator {} leaves the target", run.op),
                fmt_cell(&run.lo, &run.end()),
            ));
        }
        reach = reach.max(run.end());
    }
    if &reach < hi {
        return Err(Error::coverage("cells stop short of the region", fmt_cell(&reach, hi)));
    }
    Ok(())
}
