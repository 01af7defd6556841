//! Exact cellwise covering of a simplex by deflated lattice translates.
//!
//! Points of the source simplex are written in barycentric coordinates `β` (`Σβ = 1`). A cell is
//! a box in `β` intersected with the simplex; the minimum of each target barycentric coordinate
//! over a cell is a small linear program with a closed-form greedy solution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{qceil, qint, QMat, QVec, SimplexLattice};
use crate::error::{Error, Result};

/// Source simplex with vertex `i` at barycentric coordinates `source[·][i]` relative to `Δ`;
/// every point must lie in `Δ + u` deflated by `margin` for some lattice point `u`.
#[derive(Clone, Debug)]
pub struct CellProblem<'a> {
    pub lattice: &'a SimplexLattice,
    pub source: QMat,
    pub margin: BigRational,
}

#[derive(Clone, Debug)]
pub struct CellConfig {
    /// Initial grid resolution in `β`; `0` picks `(N+1)k`.
    pub grid: u32,
    pub max_refine: u32,
    pub max_cells: usize,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig { grid: 0, max_refine: 6, max_cells: 2_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellReport {
    pub cells: usize,
    pub max_depth: u32,
}

struct Cell {
    lo: QVec,
    hi: QVec,
    depth: u32,
}

/// `min Σ_i w_i β_i` over `lo ≤ β ≤ hi`, `Σβ = 1` (assumed feasible).
fn lp_min(w: &[BigRational], lo: &[BigRational], hi: &[BigRational]) -> BigRational {
    let mut val: BigRational = w.iter().zip(lo).fold(BigRational::zero(), |a, (x, y)| a + x * y);
    let mut rem = BigRational::one() - lo.iter().fold(BigRational::zero(), |a, x| a + x);
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[a].cmp(&w[b]));
    for i in order {
        if !rem.is_positive() {
            break;
        }
        let room = &hi[i] - &lo[i];
        let take = if room < rem { room } else { rem.clone() };
        val += &w[i] * &take;
        rem -= take;
    }
    val
}

fn feasible(lo: &[BigRational], hi: &[BigRational]) -> bool {
    let one = BigRational::one();
    let slo = lo.iter().fold(BigRational::zero(), |a, x| a + x);
    let shi = hi.iter().fold(BigRational::zero(), |a, x| a + x);
    slo <= one && shi >= one
}

impl CellProblem<'_> {
    /// Bounds `U_j` with `m_j ≤ U_j` forced on lattice numerators; `shift` is `-margin` for
    /// a covering test and `+margin` for a refutation test.
    fn bounds(&self, mins: &[BigRational], shift: &BigRational) -> Vec<BigInt> {
        let lat = self.lattice;
        let n1 = qint(lat.n as i64 + 1);
        let sigma = qint(lat.total() as i64) / &n1;
        (0..lat.n)
            .map(|j| {
                let x = &n1 * (&mins[j] + &sigma * &lat.simplex.origin[j] + shift * &lat.simplex.inv_height[j]);
                // strict: m_j < x
                qceil(&x) - BigInt::one()
            })
            .collect()
    }

    fn bounds_closed(&self, vals: &[BigRational], shift: &BigRational) -> Vec<BigInt> {
        let lat = self.lattice;
        let n1 = qint(lat.n as i64 + 1);
        let sigma = qint(lat.total() as i64) / &n1;
        (0..lat.n)
            .map(|j| {
                let x = &n1 * (&vals[j] + &sigma * &lat.simplex.origin[j] + shift * &lat.simplex.inv_height[j]);
                x.floor().to_integer()
            })
            .collect()
    }

    fn member(&self, u: &[BigInt]) -> bool {
        let lat = self.lattice;
        let total = BigInt::from(lat.total());
        if lat.full {
            // some composition of the total fits under u
            return u.iter().all(|x| !x.is_negative()) && u.iter().map(|x| x.min(&total).clone()).sum::<BigInt>() >= total;
        }
        lat.coeffs.iter().any(|m| m.iter().zip(u).all(|(mi, ui)| BigInt::from(*mi) <= *ui))
    }

    fn mins(&self, lo: &[BigRational], hi: &[BigRational]) -> QVec {
        self.source.iter().map(|w| lp_min(w, lo, hi)).collect()
    }

    /// Whether the point `β` lies outside every translate inflated by the margin.
    pub fn point_refuted(&self, beta: &[BigRational]) -> bool {
        let vals: QVec = self.source.iter().map(|w| super::dot(w, beta)).collect();
        let u = self.bounds_closed(&vals, &self.margin);
        !self.member(&u)
    }
}

fn fmt_cell(lo: &[BigRational], hi: &[BigRational]) -> String {
    let parts: Vec<String> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| format!("[{:.6}, {:.6}]", a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)))
        .collect();
    format!("β ∈ {}", parts.join(" × "))
}

fn grid_cells(n: usize, g: u32, prefix: &mut Vec<u32>, sum: u32, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == n {
        // box [q/g, (q+1)/g] meets Σβ = 1
        if sum <= g && sum + n as u32 >= g {
            out.push(prefix.clone());
        }
        return;
    }
    for qv in 0..g {
        if sum + qv > g {
            break;
        }
        prefix.push(qv);
        grid_cells(n, g, prefix, sum + qv, out);
        prefix.pop();
    }
}

/// Certify that every point of the source simplex lies in some deflated translate.
pub fn cover_cells(problem: &CellProblem<'_>, cfg: &CellConfig) -> Result<CellReport> {
    let lat = problem.lattice;
    let n = lat.n;
    if lat.is_empty() {
        return Err(Error::coverage("empty lattice", String::new()));
    }
    for i in 0..n {
        let e: QVec = (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect();
        if problem.point_refuted(&e) {
            return Err(Error::coverage(format!("source vertex {i} lies outside every translate"), fmt_cell(&e, &e)));
        }
    }
    let g = if cfg.grid == 0 { (n as u64 + 1) * lat.k } else { cfg.grid as u64 } as u32;
    let gq = qint(g as i64);
    let mut starts = Vec::new();
    grid_cells(n, g, &mut Vec::new(), 0, &mut starts);
    let mut stack: Vec<Cell> = starts
        .into_iter()
        .rev()
        .map(|qv| Cell {
            lo: qv.iter().map(|&x| qint(x as i64) / &gq).collect(),
            hi: qv.iter().map(|&x| qint(x as i64 + 1) / &gq).collect(),
            depth: 0,
        })
        .collect();
    let neg = -problem.margin.clone();
    let mut report = CellReport { cells: 0, max_depth: 0 };
    while let Some(cell) = stack.pop() {
        // clip the box to the simplex
        let lo: QVec = cell.lo.iter().map(|x| if x.is_negative() { BigRational::zero() } else { x.clone() }).collect();
        let hi: QVec = cell.hi.iter().map(|x| if *x > BigRational::one() { BigRational::one() } else { x.clone() }).collect();
        if !feasible(&lo, &hi) {
            continue;
        }
        let mins = problem.mins(&lo, &hi);
        if problem.member(&problem.bounds(&mins, &neg)) {
            report.cells += 1;
            report.max_depth = report.max_depth.max(cell.depth);
            if report.cells > cfg.max_cells {
                return Err(Error::ResourceLimit(format!("more than {} cells", cfg.max_cells)));
            }
            continue;
        }
        if cell.depth >= cfg.max_refine {
            let slo: BigRational = lo.iter().fold(BigRational::zero(), |a, x| a + x);
            let shi: BigRational = hi.iter().fold(BigRational::zero(), |a, x| a + x);
            let t = if shi == slo { BigRational::zero() } else { (BigRational::one() - &slo) / (&shi - &slo) };
            let pt: QVec = lo.iter().zip(&hi).map(|(a, b)| a + &t * (b - a)).collect();
            let why = if problem.point_refuted(&pt) { "point outside every translate" } else { "subdivision exhausted" };
            return Err(Error::coverage(why, fmt_cell(&lo, &hi)));
        }
        let k = (0..n).max_by(|&a, &b| (&hi[a] - &lo[a]).cmp(&(&hi[b] - &lo[b])).then(b.cmp(&a))).expect("nonempty");
        let mid = (&lo[k] + &hi[k]) / qint(2);
        let mut right_lo = lo.clone();
        right_lo[k] = mid.clone();
        let mut left_hi = hi.clone();
        left_hi[k] = mid;
        stack.push(Cell { lo: right_lo, hi: hi.clone(), depth: cell.depth + 1 });
        stack.push(Cell { lo, hi: left_hi, depth: cell.depth + 1 });
    }
    Ok(report)
}
