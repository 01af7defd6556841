//! Lazily indexed translation sets.
//!
//! A [`Grid1D`] is the positional set `origin + Σ_a d_a·step_a` with digits `d_a < count_a`;
//! axes are listed slowest first so that index order is mixed-radix with the last axis fastest.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rignum::{Dyadic, DyInterval};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridAxis {
    pub count: u64,
    pub step: DyInterval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid1D {
    pub origin: DyInterval,
    pub axes: Vec<GridAxis>,
}

impl Grid1D {
    pub fn single(origin: DyInterval) -> Self {
        Grid1D { origin, axes: Vec::new() }
    }

    pub fn arithmetic(origin: DyInterval, count: u64, step: DyInterval) -> Self {
        Grid1D { origin, axes: vec![GridAxis { count, step }] }
    }

    pub fn len(&self) -> u64 {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn digits(&self, mut idx: u64) -> Vec<u64> {
        let mut out = vec![0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = idx % ax.count;
            idx /= ax.count;
        }
        out
    }

    pub fn index_of(&self, digits: &[u64]) -> u64 {
        self.axes.iter().zip(digits).fold(0, |acc, (ax, &d)| acc * ax.count + d)
    }

    /// Index stride of axis `k`.
    pub fn stride(&self, k: usize) -> u64 {
        self.axes[k + 1..].iter().map(|a| a.count).product()
    }

    pub fn value(&self, idx: u64) -> DyInterval {
        self.value_digits(&self.digits(idx))
    }

    pub fn value_digits(&self, digits: &[u64]) -> DyInterval {
        let mut v = self.origin.clone();
        for (ax, &d) in self.axes.iter().zip(digits) {
            if d > 0 {
                v = &v + &(&ax.step * &DyInterval::from_int(&d.into(), ax.step.prec()));
            }
        }
        v
    }

    /// Enclosure of all values.
    pub fn hull(&self) -> DyInterval {
        let mut v = self.origin.clone();
        for ax in &self.axes {
            if ax.count > 1 {
                let span = &ax.step * &DyInterval::from_int(&(ax.count - 1).into(), ax.step.prec());
                v = &v + &span.hull(&DyInterval::zero(span.prec()));
            }
        }
        v
    }

    /// Sub-grid with axis `k` frozen at digit `d`.
    pub fn fix_axis(&self, k: usize, d: u64) -> Result<Grid1D> {
        let ax = self.axes.get(k).ok_or_else(|| Error::Domain("no such axis".into()))?;
        if d >= ax.count {
            return Err(Error::Domain("digit out of range".into()));
        }
        let origin = &self.origin + &(&ax.step * &DyInterval::from_int(&d.into(), ax.step.prec()));
        let mut axes = self.axes.clone();
        axes.remove(k);
        Ok(Grid1D { origin, axes })
    }

    /// Axes with more than one digit, sorted by increasing step magnitude.
    fn active_axes_sorted(&self) -> Vec<&GridAxis> {
        let mut v: Vec<&GridAxis> = self.axes.iter().filter(|a| a.count > 1).collect();
        v.sort_by(|a, b| a.step.mag().cmp(&b.step.mag()));
        v
    }

    /// Certified lower bounds for the distances between consecutive sorted values, one per
    /// active axis: `|step_a| − Σ_{b below a} (count_b − 1)|step_b|`.
    ///
    /// Distinct indices then have values at least the smallest of these apart.
    pub fn spacings(&self) -> Vec<DyInterval> {
        let axes = self.active_axes_sorted();
        let mut below = DyInterval::zero(self.origin.prec());
        let mut out = Vec::with_capacity(axes.len());
        for ax in axes {
            let s = ax.step.abs();
            out.push(&s - &below);
            below = &below + &(&s * &DyInterval::from_int(&(ax.count - 1).into(), s.prec()));
        }
        out
    }

    /// Index of the smallest value `≥ v` (or `> v` when `strict`), located on enclosure midpoints.
    ///
    /// Needs positional separation; callers re-certify whatever they do with the result.
    pub fn ceil_index(&self, v: &Dyadic, strict: bool) -> Option<u64> {
        let mut order: Vec<usize> = (0..self.axes.len()).filter(|&k| self.axes[k].count > 1).collect();
        order.sort_by(|&a, &b| self.axes[b].step.mag().cmp(&self.axes[a].step.mag()));
        let steps: Vec<BigRational> = self.axes.iter().map(|a| a.step.mid().to_rational()).collect();
        // value range contributed by the axes after position p
        let mut tail_min = vec![BigRational::zero(); order.len() + 1];
        let mut tail_max = vec![BigRational::zero(); order.len() + 1];
        for p in (0..order.len()).rev() {
            let a = order[p];
            let span = &steps[a] * BigRational::from_integer((self.axes[a].count - 1).into());
            let (lo, hi) = if span.is_negative() { (span, BigRational::zero()) } else { (BigRational::zero(), span) };
            tail_min[p] = &tail_min[p + 1] + lo;
            tail_max[p] = &tail_max[p + 1] + hi;
        }
        let mut digits = vec![0u64; self.axes.len()];
        let target = v.to_rational();
        let base = self.origin.mid().to_rational();
        if self.search(&order, &steps, &tail_max, 0, base, &target, strict, &mut digits) {
            Some(self.index_of(&digits))
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        order: &[usize],
        steps: &[BigRational],
        tail_max: &[BigRational],
        p: usize,
        base: BigRational,
        v: &BigRational,
        strict: bool,
        digits: &mut [u64],
    ) -> bool {
        if p == order.len() {
            return if strict { base > *v } else { base >= *v };
        }
        let a = order[p];
        let count = self.axes[a].count as i64;
        let step = &steps[a];
        // first digit, in value order, whose sub-grid can still reach v
        let need = (v - &base - &tail_max[p + 1]) / step;
        let (mut d, dir) = if step.is_positive() {
            (need.ceil().to_integer().to_i64().unwrap_or(i64::MAX).clamp(0, count), 1)
        } else {
            (need.floor().to_integer().to_i64().unwrap_or(i64::MIN).clamp(-1, count - 1), -1)
        };
        for _ in 0..2 {
            if d < 0 || d >= count {
                return false;
            }
            digits[a] = d as u64;
            let b = &base + step * BigRational::from_integer(d.into());
            if self.search(order, steps, tail_max, p + 1, b, v, strict, digits) {
                return true;
            }
            d += dir;
        }
        false
    }

    /// Lower bound on the distance between distinct values, `None` for fewer than two values.
    pub fn min_separation(&self) -> Option<Dyadic> {
        self.spacings().iter().map(|s| s.lo().clone()).min()
    }
}

/// Translation vectors of an IFS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Translations {
    Explicit(Vec<Vec<DyInterval>>),
    /// Cartesian product, one grid per coordinate; coordinate 0 is the slowest index.
    Product(Vec<Grid1D>),
}

impl Translations {
    pub fn dim(&self) -> usize {
        match self {
            Translations::Explicit(v) => v.first().map(|t| t.len()).unwrap_or(0),
            Translations::Product(g) => g.len(),
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            Translations::Explicit(v) => v.len() as u128,
            Translations::Product(g) => g.iter().map(|x| x.len() as u128).product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-coordinate indices of map `idx` for product sets.
    pub fn split_index(&self, mut idx: u128) -> Vec<u64> {
        match self {
            Translations::Explicit(_) => vec![idx as u64],
            Translations::Product(g) => {
                let mut out = vec![0; g.len()];
                for (m, grid) in g.iter().enumerate().rev() {
                    let n = grid.len() as u128;
                    out[m] = (idx % n) as u64;
                    idx /= n;
                }
                out
            }
        }
    }

    pub fn join_index(&self, parts: &[u64]) -> u128 {
        match self {
            Translations::Explicit(_) => parts[0] as u128,
            Translations::Product(g) => {
                g.iter().zip(parts).fold(0u128, |acc, (grid, &p)| acc * grid.len() as u128 + p as u128)
            }
        }
    }

    pub fn get(&self, idx: u128) -> Vec<DyInterval> {
        match self {
            Translations::Explicit(v) => v[idx as usize].clone(),
            Translations::Product(g) => {
                let parts = self.split_index(idx);
                g.iter().zip(parts).map(|(grid, p)| grid.value(p)).collect()
            }
        }
    }

    /// Coordinatewise hull of all translations.
    pub fn hull(&self) -> Vec<DyInterval> {
        match self {
            Translations::Explicit(v) => {
                let mut h = v[0].clone();
                for t in &v[1..] {
                    for (a, b) in h.iter_mut().zip(t) {
                        *a = a.hull(b);
                    }
                }
                h
            }
            Translations::Product(g) => g.iter().map(|x| x.hull()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> DyInterval {
        DyInterval::from_ratio(p, q, 64)
    }

    #[test]
    fn mixed_radix_indexing() {
        let g = Grid1D {
            origin: r(0, 1),
            axes: vec![GridAxis { count: 3, step: r(10, 1) }, GridAxis { count: 2, step: r(1, 1) }],
        };
        assert_eq!(g.len(), 6);
        assert_eq!(g.digits(5), vec![2, 1]);
        assert_eq!(g.index_of(&[1, 1]), 3);
        assert!(g.value(3).contains(&Dyadic::from_i64(11)));
        assert_eq!(g.stride(0), 2);
        let f = g.fix_axis(1, 1).unwrap();
        assert!(f.value(2).contains(&Dyadic::from_i64(21)));
    }

    #[test]
    fn positional_spacings() {
        let g = Grid1D {
            origin: r(0, 1),
            axes: vec![GridAxis { count: 3, step: r(-10, 1) }, GridAxis { count: 4, step: r(2, 1) }],
        };
        let s = g.spacings();
        assert!(s[0].contains(&Dyadic::from_i64(2)));
        assert!(s[1].contains(&Dyadic::from_i64(4)));
        assert_eq!(g.min_separation(), Some(Dyadic::from_i64(2)));
        assert!(g.hull().contains(&Dyadic::from_i64(-20)) && g.hull().contains(&Dyadic::from_i64(6)));
    }

    #[test]
    fn ceil_search_on_mixed_signs() {
        let g = Grid1D {
            origin: r(100, 1),
            axes: vec![GridAxis { count: 4, step: r(-10, 1) }, GridAxis { count: 3, step: r(2, 1) }],
        };
        let vals: Vec<i64> = (0..g.len()).map(|i| g.value(i).mid().to_f64() as i64).collect();
        for v in 60..=110 {
            for strict in [false, true] {
                let want = (0..g.len())
                    .filter(|&i| if strict { vals[i as usize] > v } else { vals[i as usize] >= v })
                    .min_by_key(|&i| vals[i as usize]);
                assert_eq!(g.ceil_index(&Dyadic::from_i64(v), strict), want, "v = {v} strict = {strict}");
            }
        }
    }

    #[test]
    fn product_indexing_round_trip() {
        let a = Grid1D::arithmetic(r(0, 1), 3, r(1, 1));
        let b = Grid1D::arithmetic(r(0, 1), 5, r(1, 1));
        let t = Translations::Product(vec![a, b]);
        assert_eq!(t.len(), 15);
        for i in 0..15u128 {
            assert_eq!(t.join_index(&t.split_index(i)), i);
        }
        let v = t.get(7);
        assert!(v[0].contains(&Dyadic::from_i64(1)) && v[1].contains(&Dyadic::from_i64(2)));
    }
}
