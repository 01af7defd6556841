//! Closed intervals with dyadic endpoints and outward rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

/// Default working mantissa precision in bits.
pub const DEFAULT_PREC: u32 = 128;

/// Precision ceiling for adaptive refinement. `CANTORCERT_MAX_PRECISION` overrides it.
pub fn max_precision() -> u32 {
    std::env::var("CANTORCERT_MAX_PRECISION")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&p| p >= 32)
        .unwrap_or(512)
}

/// Result of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    CertainlyLess,
    CertainlyGreater,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyInterval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl DyInterval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(DyInterval::rounded(lo, hi, prec))
    }

    /// Build from endpoints known to be ordered, rounding outward to `prec`.
    fn rounded(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        DyInterval { lo: lo.round(prec, Round::Down), hi: hi.round(prec, Round::Up), prec }
    }

    pub fn point(d: Dyadic, prec: u32) -> Self {
        DyInterval::rounded(d.clone(), d, prec)
    }

    pub fn zero(prec: u32) -> Self {
        DyInterval::point(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        DyInterval::point(Dyadic::one(), prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        DyInterval::point(Dyadic::from_i64(v), prec)
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        DyInterval::point(Dyadic::from_int(v.clone()), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        DyInterval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
            prec,
        }
    }

    pub fn from_ratio(p: i64, q: i64, prec: u32) -> Self {
        DyInterval::from_rational(&BigRational::new(p.into(), q.into()), prec)
    }

    /// `[-r, r]` for `r ≥ 0`.
    pub fn ball(r: &Dyadic, prec: u32) -> Self {
        let r = r.abs();
        DyInterval::rounded(-&r, r, prec)
    }

    pub fn hull(&self, other: &DyInterval) -> Self {
        DyInterval {
            lo: Dyadic::min(&self.lo, &other.lo),
            hi: Dyadic::max(&self.hi, &other.hi),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Same set at a new working precision (rounded outward if coarser).
    pub fn with_prec(&self, prec: u32) -> Self {
        DyInterval::rounded(self.lo.clone(), self.hi.clone(), prec)
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    /// Largest absolute value over the interval.
    pub fn mag(&self) -> Dyadic {
        Dyadic::max(&self.lo.abs(), &self.hi.abs())
    }

    /// Smallest absolute value over the interval.
    pub fn mig(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            Dyadic::min(&self.lo.abs(), &self.hi.abs())
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &DyInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn inside_open(&self, other: &DyInterval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn overlaps(&self, other: &DyInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &DyInterval) -> Option<DyInterval> {
        let lo = Dyadic::max(&self.lo, &other.lo);
        let hi = Dyadic::min(&self.hi, &other.hi);
        if lo <= hi {
            Some(DyInterval { lo, hi, prec: self.prec.max(other.prec) })
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            -self
        } else {
            DyInterval { lo: Dyadic::zero(), hi: self.mag(), prec: self.prec }
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Self {
        DyInterval { lo: self.lo.shl(k), hi: self.hi.shl(k), prec: self.prec }
    }

    /// Inflate by `r ≥ 0` on both sides.
    pub fn inflate(&self, r: &Dyadic) -> Self {
        let r = r.abs();
        DyInterval::rounded(&self.lo - &r, &self.hi + &r, self.prec)
    }

    /// Shrink by `r` on both sides; `None` if nothing is left.
    pub fn deflate(&self, r: &Dyadic) -> Option<Self> {
        let r = r.abs();
        let lo = &self.lo + &r;
        let hi = &self.hi - &r;
        if lo <= hi {
            Some(DyInterval { lo, hi, prec: self.prec })
        } else {
            None
        }
    }

    pub fn sqr(&self) -> Self {
        let a = self.lo.abs();
        let b = self.hi.abs();
        let hi = Dyadic::max(&a, &b);
        let hi = &hi * &hi;
        let lo = if self.contains_zero() {
            Dyadic::zero()
        } else {
            let m = Dyadic::min(&a, &b);
            &m * &m
        };
        DyInterval::rounded(lo, hi, self.prec)
    }

    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return DyInterval::one(self.prec);
        }
        if n % 2 == 0 {
            return self.sqr().powi(n / 2);
        }
        let mut acc = self.clone();
        let mut base = self.sqr();
        let mut k = n / 2;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.sqr();
            k >>= 1;
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        DyInterval::one(self.prec).div(self)
    }

    pub fn div(&self, y: &DyInterval) -> Result<Self> {
        if y.contains_zero() {
            return Err(Error::Domain("division by an interval containing 0".into()));
        }
        let prec = self.prec.max(y.prec);
        let quot = |a: &Dyadic, b: &Dyadic, dir: Round| -> Dyadic {
            if a.is_zero() {
                return Dyadic::zero();
            }
            Dyadic::from_ratio(a.mant(), b.mant(), prec, dir).shl(a.exp() - b.exp())
        };
        let cands = [(&self.lo, &y.lo), (&self.lo, &y.hi), (&self.hi, &y.lo), (&self.hi, &y.hi)];
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for (a, b) in cands {
            let l = quot(a, b, Round::Down);
            let h = quot(a, b, Round::Up);
            lo = Some(match lo {
                Some(v) => Dyadic::min(&v, &l),
                None => l,
            });
            hi = Some(match hi {
                Some(v) => Dyadic::max(&v, &h),
                None => h,
            });
        }
        Ok(DyInterval::rounded(lo.unwrap(), hi.unwrap(), prec))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo.signum() < 0 {
            return Err(Error::Domain("sqrt of an interval with negative part".into()));
        }
        Ok(DyInterval {
            lo: sqrt_dir(&self.lo, self.prec, Round::Down),
            hi: sqrt_dir(&self.hi, self.prec, Round::Up),
            prec: self.prec,
        })
    }

    pub fn min(&self, other: &DyInterval) -> Self {
        DyInterval {
            lo: Dyadic::min(&self.lo, &other.lo),
            hi: Dyadic::min(&self.hi, &other.hi),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn max(&self, other: &DyInterval) -> Self {
        DyInterval {
            lo: Dyadic::max(&self.lo, &other.lo),
            hi: Dyadic::max(&self.hi, &other.hi),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    /// Does the interval contain the exact rational `q`?
    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }
}

/// `CertainlyLess` iff `hi(x) < lo(y)`.
pub fn certified_compare(x: &DyInterval, y: &DyInterval) -> Cmp {
    if x.hi < y.lo {
        Cmp::CertainlyLess
    } else if y.hi < x.lo {
        Cmp::CertainlyGreater
    } else {
        Cmp::Unknown
    }
}

fn sqrt_dir(d: &Dyadic, prec: u32, dir: Round) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let m = d.mant().clone();
    let e = d.exp();
    let want = 2 * prec as i64 + 4;
    let mut s = (want - m.bits() as i64).max(0);
    if (e - s).rem_euclid(2) != 0 {
        s += 1;
    }
    let m2: BigInt = m << (s as u64);
    let e2 = e - s;
    let r = m2.sqrt();
    let r = if dir == Round::Up && &r * &r != m2 { r + 1 } else { r };
    Dyadic::new(r, e2 / 2).round(prec, dir)
}

impl fmt::Display for DyInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6e}, {:.6e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl<'a> Add<&'a DyInterval> for &'a DyInterval {
    type Output = DyInterval;
    fn add(self, rhs: &DyInterval) -> DyInterval {
        DyInterval::rounded(&self.lo + &rhs.lo, &self.hi + &rhs.hi, self.prec.max(rhs.prec))
    }
}

impl<'a> Sub<&'a DyInterval> for &'a DyInterval {
    type Output = DyInterval;
    fn sub(self, rhs: &DyInterval) -> DyInterval {
        DyInterval::rounded(&self.lo - &rhs.hi, &self.hi - &rhs.lo, self.prec.max(rhs.prec))
    }
}

impl<'a> Mul<&'a DyInterval> for &'a DyInterval {
    type Output = DyInterval;
    fn mul(self, rhs: &DyInterval) -> DyInterval {
        let prec = self.prec.max(rhs.prec);
        if self.lo.signum() >= 0 && rhs.lo.signum() >= 0 {
            return DyInterval::rounded(&self.lo * &rhs.lo, &self.hi * &rhs.hi, prec);
        }
        let p = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let mut lo = p[0].clone();
        let mut hi = p[0].clone();
        for v in &p[1..] {
            if v < &lo {
                lo = v.clone();
            }
            if v > &hi {
                hi = v.clone();
            }
        }
        DyInterval::rounded(lo, hi, prec)
    }
}

impl Neg for &DyInterval {
    type Output = DyInterval;
    fn neg(self) -> DyInterval {
        DyInterval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }
}

impl Neg for DyInterval {
    type Output = DyInterval;
    fn neg(self) -> DyInterval {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<DyInterval> for DyInterval {
            type Output = DyInterval;
            fn $f(self, rhs: DyInterval) -> DyInterval {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a DyInterval> for DyInterval {
            type Output = DyInterval;
            fn $f(self, rhs: &DyInterval) -> DyInterval {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<DyInterval> for &'a DyInterval {
            type Output = DyInterval;
            fn $f(self, rhs: DyInterval) -> DyInterval {
                self.$f(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

/// Integer `⌊x⌋` for an exact rational.
pub fn floor_rational(q: &BigRational) -> BigInt {
    q.floor().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(p: i64, q: i64) -> DyInterval {
        DyInterval::from_ratio(p, q, 64)
    }

    #[test]
    fn sqrt_of_perfect_square_is_exact() {
        let r = DyInterval::from_i64(4, 64).sqrt().unwrap();
        assert_eq!(r, DyInterval::from_i64(2, 64));
    }

    #[test]
    fn unit_multiplication_is_identity() {
        let x = iv(1, 3);
        assert_eq!(&DyInterval::one(64) * &x, x);
    }

    #[test]
    fn compare_examples() {
        let a = DyInterval::new(Dyadic::from_i64(1), Dyadic::from_i64(2), 64).unwrap();
        let b = DyInterval::new(Dyadic::from_i64(3), Dyadic::from_i64(4), 64).unwrap();
        let c = DyInterval::new(Dyadic::from_i64(1), Dyadic::from_i64(3), 64).unwrap();
        let d = DyInterval::new(Dyadic::from_i64(2), Dyadic::from_i64(4), 64).unwrap();
        assert_eq!(certified_compare(&a, &b), Cmp::CertainlyLess);
        assert_eq!(certified_compare(&b, &a), Cmp::CertainlyGreater);
        assert_eq!(certified_compare(&c, &d), Cmp::Unknown);
    }

    #[test]
    fn division_encloses_third() {
        let x = DyInterval::from_i64(1, 64).div(&DyInterval::from_i64(3, 64)).unwrap();
        assert!(x.contains_rational(&BigRational::new(1.into(), 3.into())));
        assert!(x.width_f64() < 1e-18);
        assert!(DyInterval::one(64).div(&iv(0, 1)).is_err());
    }

    #[test]
    fn sqrt_rejects_negative() {
        assert!(iv(-1, 2).sqrt().is_err());
    }

    #[test]
    fn sqr_with_zero_inside() {
        let x = DyInterval::new(Dyadic::from_i64(-1), Dyadic::from_i64(2), 64).unwrap();
        let s = x.sqr();
        assert_eq!(s.lo(), &Dyadic::zero());
        assert_eq!(s.hi(), &Dyadic::from_i64(4));
        assert_eq!(x.powi(3).lo(), &Dyadic::from_i64(-4));
    }

    #[test]
    fn sqrt_two_brackets() {
        let r = DyInterval::from_i64(2, 100).sqrt().unwrap();
        let lo = r.lo().to_rational();
        let hi = r.hi().to_rational();
        let two = BigRational::from_integer(2.into());
        assert!(&lo * &lo <= two && two <= &hi * &hi);
        assert!(r.width_f64() < 1e-28);
    }
}
