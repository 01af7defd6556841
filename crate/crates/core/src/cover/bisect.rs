//! Adaptive bisection: cells of a box are split along their widest coordinate until some
//! operator maps the cell into the target.

use crate::error::{Error, Result};
use crate::rignum::{Dyadic, DyInterval};

/// A finite operator family acting on boxes of chart coordinates.
pub trait CoverFamily {
    fn len(&self) -> u128;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Box enclosure of the image of `cell` under operator `op`.
    fn image(&self, op: u128, cell: &[DyInterval]) -> Result<Vec<DyInterval>>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub cell: Vec<DyInterval>,
    pub op: u128,
    pub image: Vec<DyInterval>,
}

#[derive(Clone, Debug)]
pub struct BisectConfig {
    pub max_depth: u32,
    pub max_cells: usize,
}

impl Default for BisectConfig {
    fn default() -> Self {
        BisectConfig { max_depth: 40, max_cells: 1_000_000 }
    }
}

pub(crate) fn box_inside(inner: &[DyInterval], outer: &[DyInterval]) -> bool {
    inner.len() == outer.len() && inner.iter().zip(outer).all(|(a, b)| b.encloses(a))
}

pub(crate) fn box_separated(a: &[DyInterval], b: &[DyInterval]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.hi() < y.lo() || y.hi() < x.lo())
}

pub(crate) fn fmt_box(b: &[DyInterval]) -> String {
    let parts: Vec<String> = b.iter().map(|x| format!("[{:.12e}, {:.12e}]", x.lo().to_f64(), x.hi().to_f64())).collect();
    parts.join(" × ")
}

/// Halves of `cell` split at the midpoint of its widest coordinate.
pub fn split_widest(cell: &[DyInterval]) -> Option<(Vec<DyInterval>, Vec<DyInterval>)> {
    let (k, w) = cell.iter().enumerate().map(|(k, x)| (k, x.width())).max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))?;
    if w.is_zero() {
        return None;
    }
    let c = &cell[k];
    let m = Dyadic::midpoint(c.lo(), c.hi());
    let mut left = cell.to_vec();
    let mut right = cell.to_vec();
    left[k] = DyInterval::new(c.lo().clone(), m.clone(), c.prec()).ok()?;
    right[k] = DyInterval::new(m, c.hi().clone(), c.prec()).ok()?;
    Some((left, right))
}

enum Verdict {
    Mapped(u128, Vec<DyInterval>),
    Refuted,
    Undecided,
}

fn try_ops(fam: &dyn CoverFamily, cell: &[DyInterval], target: &[DyInterval], allowed: &dyn Fn(u128) -> bool) -> Verdict {
    let mut all_out = true;
    for op in 0..fam.len() {
        if !allowed(op) {
            continue;
        }
        match fam.image(op, cell) {
            Ok(img) if box_inside(&img, target) => return Verdict::Mapped(op, img),
            Ok(img) if box_separated(&img, target) => {}
            _ => all_out = false,
        }
    }
    if all_out {
        Verdict::Refuted
    } else {
        Verdict::Undecided
    }
}

/// Cells in depth-first order covering `source`, each mapped into `target` by an allowed operator.
pub fn bisect_cover(
    fam: &dyn CoverFamily,
    source: &[DyInterval],
    target: &[DyInterval],
    allowed: &dyn Fn(u128) -> bool,
    cfg: &BisectConfig,
) -> Result<Vec<CellBox>> {
    let mut out = Vec::new();
    let mut stack = vec![(source.to_vec(), 0u32)];
    while let Some((cell, depth)) = stack.pop() {
        match try_ops(fam, &cell, target, allowed) {
            Verdict::Mapped(op, image) => {
                if out.len() >= cfg.max_cells {
                    return Err(Error::ResourceLimit(format!("more than {} cells", cfg.max_cells)));
                }
                out.push(CellBox { cell, op, image });
            }
            Verdict::Refuted => {
                return Err(Error::coverage("every operator maps the cell outside the target", fmt_box(&cell)))
            }
            Verdict::Undecided => {
                let halves = if depth < cfg.max_depth { split_widest(&cell) } else { None };
                match halves {
                    Some((l, r)) => {
                        stack.push((r, depth + 1));
                        stack.push((l, depth + 1));
                    }
                    None => {
                        return Err(Error::Inconclusive(format!(
                            "no admissible operator at depth {depth} for cell {}",
                            fmt_box(&cell)
                        )))
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Rebuild the bisection tree from `source` and re-check every cell.
pub fn replay_boxes(
    fam: &dyn CoverFamily,
    cells: &[CellBox],
    source: &[DyInterval],
    target: &[DyInterval],
    allowed: &dyn Fn(u128) -> bool,
    max_depth: u32,
) -> Result<()> {
    let mut idx = 0usize;
    let mut stack = vec![(source.to_vec(), 0u32)];
    while let Some((cell, depth)) = stack.pop() {
        let c = cells.get(idx).ok_or_else(|| Error::coverage("cells stop before the region is covered", fmt_box(&cell)))?;
        if !box_inside(&c.cell, &cell) {
            return Err(Error::coverage("cell list does not match the subdivision", fmt_box(&cell)));
        }
        {
            if c.cell == cell {
                if !allowed(c.op) {
                    return Err(Error::coverage(format!("operator {} outside the class", c.op), fmt_box(&cell)));
                }
                let img = fam.image(c.op, &cell)?;
                if !box_inside(&img, target) {
                    return Err(Error::coverage(format!("image of operator {} leaves the target", c.op), fmt_box(&cell)));
                }
                idx += 1;
                continue;
            }
        }
        let halves = if depth < max_depth { split_widest(&cell) } else { None };
        let (l, r) = halves.ok_or_else(|| Error::coverage("cell list does not match the subdivision", fmt_box(&cell)))?;
        stack.push((r, depth + 1));
        stack.push((l, depth + 1));
    }
    if idx != cells.len() {
        return Err(Error::coverage("extra cells after the subdivision is exhausted", String::new()));
    }
    Ok(())
}
