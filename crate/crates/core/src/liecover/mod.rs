//! Finite coverings of a neighbourhood of the identity in a matrix group.
//!
//! A simplex `Δ` around `0` in the Lie algebra is covered, after scaling by `k`, by translates
//! `Δ + u` for `u` in a finite lattice `M`; the exponential map transports this to the group.

pub mod cells;
pub mod group;

pub use cells::{cover_cells, CellConfig, CellProblem, CellReport};
pub use group::{
    check_sample, choose_r, choose_r_below, radius_certifies, choose_r_verify_group, condition_at_most, exp_offset_bound, sample_conditioned,
    verify_conjugation, verify_conjugation_scaled, verify_proposition_region, GroupCover, PropositionReport, Side,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rignum::{DyInterval, Dyadic, IMatrix, Round};

pub type QVec = Vec<BigRational>;
pub type QMat = Vec<Vec<BigRational>>;

pub(crate) fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

pub(crate) fn qint(p: i64) -> BigRational {
    BigRational::from_integer(p.into())
}

pub(crate) fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Solve `A x = b` exactly; `None` when `A` is singular.
pub fn qsolve(a: &QMat, b: &QVec) -> Option<QVec> {
    let n = a.len();
    let mut m: QMat = a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn qinverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let cols: Vec<QVec> = (0..n)
        .map(|j| qsolve(a, &(0..n).map(|i| if i == j { BigRational::one() } else { BigRational::zero() }).collect()))
        .collect::<Option<_>>()?;
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

pub fn qmatmul(a: &QMat, b: &QMat) -> QMat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).fold(BigRational::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect()).collect()
}

pub(crate) fn qmatvec(a: &QMat, v: &[BigRational]) -> QVec {
    a.iter().map(|row| dot(row, v)).collect()
}

/// Enclosure of `√q` for `q ≥ 0`.
pub(crate) fn qsqrt(x: &BigRational, prec: u32) -> DyInterval {
    DyInterval::from_rational(x, prec).sqrt().expect("nonnegative")
}

/// Matrix Lie algebra with a fixed basis; the norm is Euclidean in basis coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    /// `gl(d)` with the elementary matrices `E_ij` in row-major order.
    Gl(usize),
    /// `sl(2)` with basis `diag(1, -1), E_12, E_21`.
    Sl2,
}

impl Algebra {
    pub fn dim(&self) -> usize {
        match self {
            Algebra::Gl(d) => d * d,
            Algebra::Sl2 => 3,
        }
    }

    pub fn matrix_dim(&self) -> usize {
        match self {
            Algebra::Gl(d) => *d,
            Algebra::Sl2 => 2,
        }
    }

    pub fn to_matrix(&self, x: &[DyInterval]) -> IMatrix {
        match self {
            Algebra::Gl(d) => IMatrix::from_entries(*d, x.to_vec()).expect("square"),
            Algebra::Sl2 => IMatrix::from_entries(2, vec![x[0].clone(), x[1].clone(), x[2].clone(), -&x[0]]).expect("square"),
        }
    }

    pub fn coords(&self, m: &IMatrix) -> Vec<DyInterval> {
        match self {
            Algebra::Gl(_) => m.entries().to_vec(),
            Algebra::Sl2 => vec![m.get(0, 0).clone(), m.get(0, 1).clone(), m.get(1, 0).clone()],
        }
    }

    pub fn to_matrix_exact(&self, x: &[BigRational]) -> QMat {
        match self {
            Algebra::Gl(d) => x.chunks(*d).map(|r| r.to_vec()).collect(),
            Algebra::Sl2 => vec![vec![x[0].clone(), x[1].clone()], vec![x[2].clone(), -&x[0]]],
        }
    }

    pub fn coords_exact(&self, m: &QMat) -> QVec {
        match self {
            Algebra::Gl(_) => m.iter().flatten().cloned().collect(),
            Algebra::Sl2 => vec![m[0][0].clone(), m[0][1].clone(), m[1][0].clone()],
        }
    }

    /// Matrix of `x ↦ a x a⁻¹` in basis coordinates.
    pub fn conjugation(&self, a: &QMat) -> Result<QMat> {
        let ai = qinverse(a).ok_or_else(|| Error::Domain("singular matrix".into()))?;
        let n = self.dim();
        let cols: Vec<QVec> = (0..n)
            .map(|k| {
                let e: QVec = (0..n).map(|i| if i == k { BigRational::one() } else { BigRational::zero() }).collect();
                self.coords_exact(&qmatmul(&qmatmul(a, &self.to_matrix_exact(&e)), &ai))
            })
            .collect();
        Ok((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
    }
}

/// Euclidean norm enclosure of a vector of enclosures.
pub(crate) fn norm_hi(v: &[DyInterval]) -> Dyadic {
    let prec = v.first().map(|x| x.prec()).unwrap_or(64);
    let s = v.iter().fold(DyInterval::zero(prec), |acc, x| &acc + &x.sqr());
    s.sqrt().expect("nonnegative").hi().clone()
}

/// Rational points on the unit sphere close to `x`, by inverse stereographic projection.
fn rational_unit(x: &[f64], bits: u32) -> QVec {
    let d = x.len();
    if d == 1 {
        return vec![qint(if x[0] >= 0.0 { 1 } else { -1 })];
    }
    // project from the pole farther from x
    let s = if x[d - 1] > 0.0 { 1.0 } else { -1.0 };
    let scale = (1u64 << bits) as f64;
    let y: QVec = x[..d - 1]
        .iter()
        .map(|&xi| {
            let p = (xi / (1.0 + s * x[d - 1]) * scale).round() as i64;
            BigRational::new(p.into(), BigInt::from(1u64 << bits))
        })
        .collect();
    let n2 = y.iter().fold(BigRational::zero(), |acc, v| acc + v * v);
    let den = BigRational::one() + &n2;
    let mut out: QVec = y.iter().map(|v| v * qint(2) / &den).collect();
    let last = (BigRational::one() - &n2) / &den;
    out.push(if s > 0.0 { last } else { -last });
    out
}

/// Simplex `Δ` with rational unit vertices `v_i` and `0` in its interior.
#[derive(Clone, Debug)]
pub struct Simplex {
    pub dim: usize,
    pub vertices: Vec<QVec>,
    /// Facet `j` is `{x : facets[j]·x = 1}`, opposite `v_j`.
    pub facets: Vec<QVec>,
    /// Barycentric coordinates of the origin.
    pub origin: QVec,
    /// `bary(y) = bary_lin · y + origin`.
    pub bary_lin: QMat,
    /// Upper bounds for `1/h_j`, `h_j` the height of `v_j` over facet `j`.
    pub inv_height: QVec,
}

impl Simplex {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn bary(&self, y: &[BigRational]) -> QVec {
        qmatvec(&self.bary_lin, y).into_iter().zip(&self.origin).map(|(a, b)| a + b).collect()
    }

    pub fn contains_origin_strictly(&self) -> bool {
        self.origin.iter().all(|l| l.is_positive())
    }
}

/// Regular simplex in `ℝ^dim_g` with `dim_g + 1` rational unit vertices.
pub fn build_simplex(dim_g: usize) -> Result<Simplex> {
    if dim_g == 0 {
        return Err(Error::Domain("algebra dimension must be positive".into()));
    }
    let n = dim_g + 1;
    // vertices e_i − (1/n)·1 expressed in the Helmert basis of {Σx = 0}, scaled to unit length
    let norm = ((n - 1) as f64 / n as f64).sqrt();
    let vertices: Vec<QVec> = (0..n)
        .map(|i| {
            let p: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64).collect();
            let x: Vec<f64> = (1..n)
                .map(|k| {
                    let kf = k as f64;
                    let s: f64 = (0..k).map(|j| p[j]).sum::<f64>() - kf * p[k];
                    s / (kf * (kf + 1.0)).sqrt() / norm
                })
                .collect();
            rational_unit(&x, 24)
        })
        .collect();
    simplex_from_vertices(vertices)
}

pub fn simplex_from_vertices(vertices: Vec<QVec>) -> Result<Simplex> {
    let n = vertices.len();
    let dim = n - 1;
    let mut qm: QMat = (0..dim).map(|r| vertices.iter().map(|v| v[r].clone()).collect()).collect();
    qm.push(vec![BigRational::one(); n]);
    let qi = qinverse(&qm).ok_or_else(|| Error::Domain("simplex vertices are affinely dependent".into()))?;
    let bary_lin: QMat = qi.iter().map(|row| row[..dim].to_vec()).collect();
    let origin: QVec = qi.iter().map(|row| row[dim].clone()).collect();
    if !origin.iter().all(|l| l.is_positive()) {
        return Err(Error::Domain("origin is not interior to the simplex".into()));
    }
    let mut facets = Vec::with_capacity(n);
    let mut inv_height = Vec::with_capacity(n);
    for j in 0..n {
        let rows: QMat = (0..n).filter(|&i| i != j).map(|i| vertices[i].clone()).collect();
        let a = qsolve(&rows, &vec![BigRational::one(); dim]).ok_or_else(|| Error::Domain("degenerate facet".into()))?;
        let gap = BigRational::one() - dot(&a, &vertices[j]);
        let na = qsqrt(&dot(&a, &a), 96);
        inv_height.push(na.hi().to_rational() / gap);
        facets.push(a);
    }
    Ok(Simplex { dim, vertices, facets, origin, bary_lin, inv_height })
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `M = {Σ ℓ_i v_i : Σ ℓ_i = k − N/(N+1), ℓ_i ∈ ℕ/(N+1)}`, stored as integer numerators.
#[derive(Clone, Debug)]
pub struct SimplexLattice {
    pub n: usize,
    pub k: u64,
    pub simplex: Simplex,
    pub coeffs: Vec<Vec<u32>>,
    /// Whether `coeffs` is the whole lattice.
    pub full: bool,
    pub margin: Option<BigRational>,
    pub scale: Option<Dyadic>,
}

impl SimplexLattice {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(N+1)k − N`, the common coefficient sum.
    pub fn total(&self) -> u64 {
        (self.n as u64 + 1) * self.k - self.n as u64
    }

    pub fn point(&self, idx: usize) -> QVec {
        let den = qint(self.n as i64 + 1);
        let mut p = vec![BigRational::zero(); self.simplex.dim];
        for (m, v) in self.coeffs[idx].iter().zip(&self.simplex.vertices) {
            if *m > 0 {
                let w = qint(*m as i64) / &den;
                for (pi, vi) in p.iter_mut().zip(v) {
                    *pi += &w * vi;
                }
            }
        }
        p
    }

    pub fn closed_form(&self) -> BigInt {
        if self.k == 1 {
            BigInt::from(self.n)
        } else {
            binomial((self.n as u64 + 1) * self.k - 1, self.n as u64 - 1)
        }
    }

    /// Certified `|M| < e^{N+1} k^{N−1}`.
    pub fn bound_certified(&self) -> bool {
        let prec = 128;
        let e = DyInterval::from_i64(self.n as i64 + 1, prec).exp();
        let b = &e * &DyInterval::from_int(&BigInt::from(self.k).pow(self.n as u32 - 1), prec);
        Dyadic::from_int(BigInt::from(self.coeffs.len())) < *b.lo()
    }

    /// Copy without the lattice point at `idx`.
    pub fn pruned(&self, idx: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(idx);
        out.full = false;
        out
    }

    pub fn max_point_norm(&self) -> Dyadic {
        (0..self.len())
            .map(|i| {
                let p = self.point(i);
                qsqrt(&dot(&p, &p), 96).hi().clone()
            })
            .max()
            .unwrap_or_else(Dyadic::zero)
    }
}

fn compositions(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for m in (0..=total).rev() {
        prefix.push(m);
        compositions(n, total - m, prefix, out);
        prefix.pop();
    }
}

/// Enumerate `M` for `N` vertices and scale `k`; refuses lattices larger than `cap`.
pub fn enumerate_lattice(n: usize, k: u64, simplex: Simplex, cap: usize) -> Result<SimplexLattice> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if simplex.len() != n {
        return Err(Error::Domain("simplex has the wrong number of vertices".into()));
    }
    let expected = if k == 1 { BigInt::from(n) } else { binomial((n as u64 + 1) * k - 1, n as u64 - 1) };
    if expected > BigInt::from(cap) {
        return Err(Error::ResourceLimit(format!("lattice of {expected} points exceeds cap {cap}")));
    }
    let total = (n as u64 + 1) * k - n as u64;
    let mut coeffs = Vec::with_capacity(expected.to_usize().unwrap_or(0));
    compositions(n, total as u32, &mut Vec::new(), &mut coeffs);
    Ok(SimplexLattice { n, k, simplex, coeffs, full: true, margin: None, scale: None })
}

/// Largest `c` in the search found by halving from `1/(4(N+1))` and `refine` bisection steps.
pub fn verify_algebra_covering(lat: &mut SimplexLattice, cfg: &CellConfig, refine: u32) -> Result<BigRational> {
    let n = lat.n;
    let kq = qint(lat.k as i64);
    // source kΔ̄: column i holds bary(k v_i) = k e_i + (1 − k) λ
    let source: QMat = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let base = (BigRational::one() - &kq) * &lat.simplex.origin[j];
                    if i == j {
                        base + &kq
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();
    let attempt = |c: &BigRational| cover_cells(&CellProblem { lattice: lat, source: source.clone(), margin: c.clone() }, cfg);
    let mut c = q(1, 4 * (n as i64 + 1));
    let mut bad = None;
    let mut last_err = None;
    for _ in 0..30 {
        match attempt(&c) {
            Ok(_) => break,
            Err(Error::ResourceLimit(m)) => return Err(Error::ResourceLimit(m)),
            Err(e) => {
                last_err = Some(e);
                bad = Some(c.clone());
                c /= qint(2);
            }
        }
    }
    if bad.as_ref() == Some(&c) || (bad.is_some() && attempt(&c).is_err()) {
        return Err(last_err.unwrap_or_else(|| Error::coverage("no margin certifies", String::new())));
    }
    if let Some(mut hi) = bad {
        for _ in 0..refine {
            let mid = (&c + &hi) / qint(2);
            match attempt(&mid) {
                Ok(_) => c = mid,
                Err(Error::ResourceLimit(m)) => return Err(Error::ResourceLimit(m)),
                Err(_) => hi = mid,
            }
        }
    }
    lat.margin = Some(c.clone());
    Ok(c)
}

/// `⌈x⌉` for a rational.
pub(crate) fn qceil(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub(crate) fn dy(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
    Dyadic::from_rational(q, prec, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_simplex_is_plus_minus_one() {
        let s = build_simplex(1).unwrap();
        assert_eq!(s.vertices, vec![vec![qint(1)], vec![qint(-1)]]);
        let lat = enumerate_lattice(2, 1, s, 100).unwrap();
        let pts: Vec<QVec> = (0..lat.len()).map(|i| lat.point(i)).collect();
        assert!(pts.contains(&vec![q(1, 3)]) && pts.contains(&vec![q(-1, 3)]));
    }

    #[test]
    fn regular_simplices_have_unit_vertices() {
        for d in 1..=4 {
            let s = build_simplex(d).unwrap();
            assert!(s.contains_origin_strictly());
            for v in &s.vertices {
                assert!(dot(v, v).is_one());
            }
            // the centre sits near 1/N in barycentric coordinates
            for l in &s.origin {
                assert!((l.to_f64().unwrap() - 1.0 / (d as f64 + 1.0)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn lattice_sizes() {
        for (n, k, size) in [(2usize, 1u64, 2usize), (3, 2, 21), (5, 2, 330)] {
            let lat = enumerate_lattice(n, k, build_simplex(n - 1).unwrap(), 10_000).unwrap();
            assert_eq!(lat.len(), size);
            assert_eq!(BigInt::from(lat.len()), lat.closed_form());
            assert!(lat.bound_certified());
        }
        let too_big = enumerate_lattice(5, 4, build_simplex(4).unwrap(), 1000);
        assert!(matches!(too_big, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn interval_covering_margin() {
        // [−1, 1] ⊂ (Δ + 1/3)_(c) ∪ (Δ − 1/3)_(c) exactly for c < 1/3
        let mut lat = enumerate_lattice(2, 1, build_simplex(1).unwrap(), 10).unwrap();
        let c = verify_algebra_covering(&mut lat, &CellConfig::default(), 4).unwrap();
        assert!(c >= q(1, 12) && c < q(1, 3));
    }

    #[test]
    fn conjugation_matrix_of_diagonal() {
        let a = vec![vec![qint(2), qint(0)], vec![qint(0), q(1, 2)]];
        let l = Algebra::Sl2.conjugation(&a).unwrap();
        assert_eq!(l[0][0], qint(1));
        assert_eq!(l[1][1], qint(4));
        assert_eq!(l[2][2], q(1, 4));
    }
}
