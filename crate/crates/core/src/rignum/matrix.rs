//! Square interval matrices, norms, and exp/log enclosures near the identity.

use num_rational::BigRational;

use super::dyadic::Dyadic;
use super::interval::DyInterval;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMatrix {
    dim: usize,
    entries: Vec<DyInterval>,
}

impl IMatrix {
    pub fn from_entries(dim: usize, entries: Vec<DyInterval>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Domain(format!("need {0}x{0} entries, got {1}", dim, entries.len())));
        }
        Ok(IMatrix { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<DyInterval>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Domain("matrix must be square".into()));
        }
        IMatrix::from_entries(d, rows.into_iter().flatten().collect())
    }

    pub fn from_rationals(dim: usize, vals: &[BigRational], prec: u32) -> Result<Self> {
        IMatrix::from_entries(dim, vals.iter().map(|q| DyInterval::from_rational(q, prec)).collect())
    }

    pub fn identity(dim: usize, prec: u32) -> Self {
        IMatrix::scalar(dim, &DyInterval::one(prec))
    }

    pub fn zero(dim: usize, prec: u32) -> Self {
        IMatrix { dim, entries: vec![DyInterval::zero(prec); dim * dim] }
    }

    pub fn scalar(dim: usize, s: &DyInterval) -> Self {
        let mut m = IMatrix::zero(dim, s.prec());
        for i in 0..dim {
            m.entries[i * dim + i] = s.clone();
        }
        m
    }

    pub fn diag(vals: &[DyInterval]) -> Self {
        let d = vals.len();
        let prec = vals.iter().map(|v| v.prec()).max().unwrap_or(64);
        let mut m = IMatrix::zero(d, prec);
        for (i, v) in vals.iter().enumerate() {
            m.entries[i * d + i] = v.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &DyInterval {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: DyInterval) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[DyInterval] {
        &self.entries
    }

    pub fn prec(&self) -> u32 {
        self.entries.iter().map(|e| e.prec()).max().unwrap_or(64)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        self.map(|e| e.with_prec(prec))
    }

    pub fn map(&self, f: impl Fn(&DyInterval) -> DyInterval) -> Self {
        IMatrix { dim: self.dim, entries: self.entries.iter().map(f).collect() }
    }

    fn zip(&self, o: &IMatrix, f: impl Fn(&DyInterval, &DyInterval) -> DyInterval) -> Self {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        IMatrix { dim: self.dim, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, o: &IMatrix) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &IMatrix) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: &DyInterval) -> Self {
        self.map(|e| e * s)
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn hull(&self, o: &IMatrix) -> Self {
        self.zip(o, |a, b| a.hull(b))
    }

    /// Entrywise enclosure test: `o ⊆ self`.
    pub fn encloses(&self, o: &IMatrix) -> bool {
        self.dim == o.dim && self.entries.iter().zip(&o.entries).all(|(a, b)| a.encloses(b))
    }

    pub fn overlaps(&self, o: &IMatrix) -> bool {
        self.dim == o.dim && self.entries.iter().zip(&o.entries).all(|(a, b)| a.overlaps(b))
    }

    pub fn mul(&self, o: &IMatrix) -> Self {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let d = self.dim;
        let prec = self.prec().max(o.prec());
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = DyInterval::zero(prec);
                for k in 0..d {
                    acc = &acc + &(self.get(i, k) * o.get(k, j));
                }
                out.push(acc);
            }
        }
        IMatrix { dim: d, entries: out }
    }

    pub fn mul_vec(&self, v: &[DyInterval]) -> Vec<DyInterval> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        let d = self.dim;
        (0..d)
            .map(|i| {
                let mut acc = DyInterval::zero(self.prec());
                for (k, vk) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, k) * vk);
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut m = self.clone();
        for i in 0..d {
            for j in 0..d {
                m.entries[i * d + j] = self.get(j, i).clone();
            }
        }
        m
    }

    pub fn trace(&self) -> DyInterval {
        let mut acc = DyInterval::zero(self.prec());
        for i in 0..self.dim {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    /// Determinant by cofactor expansion.
    pub fn det(&self) -> DyInterval {
        let d = self.dim;
        match d {
            1 => self.entries[0].clone(),
            2 => &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)),
            _ => {
                let mut acc = DyInterval::zero(self.prec());
                for j in 0..d {
                    let minor = self.minor(0, j);
                    let term = self.get(0, j) * &minor.det();
                    acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    fn minor(&self, r: usize, c: usize) -> IMatrix {
        let d = self.dim;
        let mut e = Vec::with_capacity((d - 1) * (d - 1));
        for i in 0..d {
            for j in 0..d {
                if i != r && j != c {
                    e.push(self.get(i, j).clone());
                }
            }
        }
        IMatrix { dim: d - 1, entries: e }
    }

    /// Inverse via the adjugate; requires a determinant enclosure excluding 0.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim;
        let det = self.det();
        if det.contains_zero() {
            return Err(Error::Domain("matrix not certifiably invertible".into()));
        }
        if d == 1 {
            return Ok(IMatrix { dim: 1, entries: vec![self.entries[0].recip()?] });
        }
        let mut out = IMatrix::zero(d, self.prec());
        for i in 0..d {
            for j in 0..d {
                let c = self.minor(j, i).det();
                let c = if (i + j) % 2 == 0 { c } else { -c };
                out.set(i, j, c.div(&det)?);
            }
        }
        Ok(out)
    }

    /// Upper bound on the Frobenius norm (submultiplicative, dominates ‖·‖_op).
    pub fn frobenius_upper(&self) -> Dyadic {
        let prec = self.prec();
        let mut acc = DyInterval::zero(prec);
        for e in &self.entries {
            acc = &acc + &DyInterval::point(e.mag(), prec).sqr();
        }
        acc.sqrt().expect("nonnegative").hi().clone()
    }

    /// Enclosure of the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> DyInterval {
        let mut acc = DyInterval::zero(self.prec());
        for e in &self.entries {
            acc = &acc + &e.sqr();
        }
        acc
    }

    /// Enclosure of the Frobenius norm.
    pub fn frobenius(&self) -> DyInterval {
        self.frobenius_sq().sqrt().expect("nonnegative")
    }

    /// Enclosure of the operator 2-norm. Exact formula for d ≤ 2, Frobenius-based bracket otherwise.
    pub fn op_norm(&self) -> DyInterval {
        match self.dim {
            1 => self.entries[0].abs(),
            2 => {
                let f = self.frobenius_sq();
                let det = self.det();
                let disc = &f.sqr() - &det.sqr().shl(2);
                let disc = clamp_nonneg(&disc);
                let s = (&f + &disc.sqrt().expect("nonnegative")).shl(-1);
                clamp_nonneg(&s).sqrt().expect("nonnegative")
            }
            d => {
                let fr = self.frobenius();
                let lo = fr.div(&DyInterval::from_i64(d as i64, fr.prec()).sqrt().expect("positive")).expect("nonzero");
                DyInterval::new(lo.lo().clone(), fr.hi().clone(), fr.prec()).expect("ordered")
            }
        }
    }

    /// Enclosure of the co-norm m(A) = ‖A⁻¹‖_op⁻¹.
    pub fn conorm(&self) -> Result<DyInterval> {
        self.inverse()?.op_norm().recip()
    }

    /// Enclosure of κ(A) = ‖A‖·‖A⁻¹‖.
    pub fn condition(&self) -> Result<DyInterval> {
        if self.dim == 2 {
            // σ_max/σ_min = σ_max² / |det|
            let f = self.frobenius_sq();
            let det = self.det();
            if det.contains_zero() {
                return Err(Error::Domain("singular matrix".into()));
            }
            let disc = clamp_nonneg(&(&f.sqr() - &det.sqr().shl(2)));
            let s = (&f + &disc.sqrt().expect("nonnegative")).shl(-1);
            return s.div(&det.abs());
        }
        Ok(&self.op_norm() * &self.inverse()?.op_norm())
    }
}

fn clamp_nonneg(x: &DyInterval) -> DyInterval {
    if x.lo().signum() >= 0 {
        x.clone()
    } else {
        let hi = Dyadic::max(x.hi(), &Dyadic::zero());
        DyInterval::new(Dyadic::zero(), hi, x.prec()).expect("ordered")
    }
}

/// Inflate every entry by `[-r, r]`.
fn add_ball(m: &IMatrix, r: &Dyadic) -> IMatrix {
    m.map(|e| e.inflate(r))
}

/// Enclosure of `exp(X)` for `‖X‖_F ≤ 1`, Taylor degree doubling from 12 until the remainder
/// is below `2^-prec`.
pub fn mat_exp_enclosure(x: &IMatrix) -> Result<IMatrix> {
    let prec = x.prec();
    let norm = x.frobenius_upper();
    if norm > Dyadic::one() {
        return Err(Error::Domain("exp enclosure needs ‖X‖ ≤ 1".into()));
    }
    let d = x.dim();
    let target = Dyadic::pow2(-(prec as i64));
    let nx = DyInterval::point(norm, prec);
    let mut m: i64 = 12;
    loop {
        // ‖X‖^{m+1} / ((m+1)! (1 − ‖X‖/(m+2)))
        let mut fact = DyInterval::one(prec);
        for k in 2..=(m + 1) {
            fact = &fact * &DyInterval::from_i64(k, prec);
        }
        let denom = &fact * &(&DyInterval::one(prec) - &nx.div(&DyInterval::from_i64(m + 2, prec))?);
        let rem = nx.powi((m + 1) as u32).div(&denom)?;
        if rem.hi() <= &target || m >= 384 {
            // Horner: I + X/1 (I + X/2 (I + ... (I + X/m)))
            let id = IMatrix::identity(d, prec);
            let mut acc = id.clone();
            for k in (1..=m).rev() {
                let step = x.mul(&acc).scale(&DyInterval::from_i64(1, prec).div(&DyInterval::from_i64(k, prec))?);
                acc = id.add(&step);
            }
            return Ok(add_ball(&acc, rem.hi()));
        }
        m *= 2;
    }
}

/// Enclosure of `log(Y)` for `‖Y − I‖_F ≤ 1/2`.
pub fn mat_log_enclosure(y: &IMatrix) -> Result<IMatrix> {
    let prec = y.prec();
    let d = y.dim();
    let z = y.sub(&IMatrix::identity(d, prec));
    let norm = z.frobenius_upper();
    if norm > Dyadic::pow2(-1) {
        return Err(Error::Domain("log enclosure needs ‖Y − I‖ ≤ 1/2".into()));
    }
    let target = Dyadic::pow2(-(prec as i64));
    let nz = DyInterval::point(norm.clone(), prec);
    let mut m: i64 = 12;
    loop {
        // ‖Z‖^{m+1} / ((m+1)(1 − ‖Z‖))
        let rem = nz
            .powi((m + 1) as u32)
            .div(&(&DyInterval::from_i64(m + 1, prec) * &(&DyInterval::one(prec) - &nz)))?;
        if rem.hi() <= &target || m >= 1024 || norm.is_zero() {
            // Horner for Σ (−1)^{k+1} Z^k / k
            let mut acc = IMatrix::zero(d, prec);
            for k in (1..=m).rev() {
                let c = DyInterval::from_ratio(if k % 2 == 1 { 1 } else { -1 }, k, prec);
                acc = z.mul(&IMatrix::scalar(d, &c).add(&acc));
            }
            return Ok(add_ball(&acc, rem.hi()));
        }
        m *= 2;
    }
}

/// Enclosures of `E1 = e^Z − I` and `E2 = e^Z − I − Z` for `‖Z‖_F ≤ 1`.
///
/// Summed as series of `Z`-powers so no cancellation against `I` happens; widths scale with
/// the width of `Z` times `‖Z‖` rather than with `1`.
pub fn exp_minus_linear(z: &IMatrix) -> Result<(IMatrix, IMatrix)> {
    let prec = z.prec();
    let norm = z.frobenius_upper();
    if norm > Dyadic::one() {
        return Err(Error::Domain("series needs ‖Z‖ ≤ 1".into()));
    }
    let d = z.dim();
    let nz = DyInterval::point(norm, prec);
    let target = Dyadic::pow2(-(prec as i64));
    let mut m: i64 = 12;
    loop {
        let mut fact = DyInterval::one(prec);
        for k in 2..=(m + 1) {
            fact = &fact * &DyInterval::from_i64(k, prec);
        }
        let denom = &fact * &(&DyInterval::one(prec) - &nz.div(&DyInterval::from_i64(m + 2, prec))?);
        let rem = nz.powi((m + 1) as u32).div(&denom)?;
        if rem.hi() <= &target || m >= 384 {
            // E2 = Z²/2! (I + Z/3 (I + ... ))
            let id = IMatrix::identity(d, prec);
            let mut acc = id.clone();
            for k in (3..=m).rev() {
                let step = z.mul(&acc).scale(&DyInterval::one(prec).div(&DyInterval::from_i64(k, prec))?);
                acc = id.add(&step);
            }
            let e2 = z.mul(&z).mul(&acc).scale(&DyInterval::from_ratio(1, 2, prec));
            let e2 = add_ball(&e2, rem.hi());
            let e1 = z.add(&e2);
            return Ok((e1, e2));
        }
        m *= 2;
    }
}

/// Enclosure of the nonlinear part `log(e^X e^Y) − X − Y`.
///
/// With `Q = E2(X) + E2(Y) + E1(X)E1(Y)` and `P = X + Y + Q`, the remainder equals
/// `Q − Σ_{m≥2} (−1)^m P^m / m`; the tail is bounded like the log series.
pub fn product_log_deviation(x: &IMatrix, y: &IMatrix) -> Result<IMatrix> {
    let prec = x.prec().max(y.prec());
    let d = x.dim();
    let (e1x, e2x) = exp_minus_linear(x)?;
    let (e1y, e2y) = exp_minus_linear(y)?;
    let q = e2x.add(&e2y).add(&e1x.mul(&e1y));
    let p = x.add(y).add(&q);
    let np = p.frobenius_upper();
    if np > Dyadic::pow2(-1) {
        return Err(Error::Domain("product too far from the identity".into()));
    }
    let nz = DyInterval::point(np.clone(), prec);
    let target = Dyadic::pow2(-(prec as i64));
    let mut m: i64 = 12;
    loop {
        let rem = nz
            .powi((m + 1) as u32)
            .div(&(&DyInterval::from_i64(m + 1, prec) * &(&DyInterval::one(prec) - &nz)))?;
        if rem.hi() <= &target || m >= 1024 || np.is_zero() {
            // Σ_{k=2}^{m} (−1)^k P^k / k = P² (1/2 − P/3 + P²/4 − ...)
            let mut acc = IMatrix::zero(d, prec);
            for k in (2..=m).rev() {
                let c = DyInterval::from_ratio(if k % 2 == 0 { 1 } else { -1 }, k, prec);
                acc = IMatrix::scalar(d, &c).add(&p.mul(&acc));
            }
            let series = p.mul(&p).mul(&acc);
            let series = add_ball(&series, rem.hi());
            return Ok(q.sub(&series));
        }
        m *= 2;
    }
}
