//! Exact products of rational powers `∏ b_k^{e_k}` with integer bases and rational exponents.
//!
//! Every such value `v` satisfies `v^Q = V` for a rational `V` and the common exponent
//! denominator `Q`, so floors and comparisons reduce to integer root extraction while `V` stays
//! small; larger cases fall back to enclosures of `ln v`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dyadic::Dyadic;
use super::interval::DyInterval;
use crate::error::{Error, Result};

/// Largest `V = v^Q` handled by exact root extraction; beyond it, log enclosures decide.
const EXACT_BITS: u64 = 1 << 12;

/// Positive real `∏ base^exp`; bases are integers ≥ 2 that are not perfect powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowProduct {
    factors: BTreeMap<BigInt, BigRational>,
}

fn small_primes(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= limit {
        if out.iter().take_while(|&&q| q * q <= p).all(|&q| p % q != 0) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// Write `n = r^k` with `r` not a perfect power. Large inputs are left unreduced.
pub fn primitive_root(n: &BigInt) -> (BigInt, u64) {
    let mut r = n.clone();
    let mut k = 1u64;
    if r.bits() > 4096 {
        return (r, k);
    }
    'outer: loop {
        for p in small_primes(r.bits()) {
            let root = r.nth_root(p as u32);
            if root > BigInt::one() && num_traits::pow(root.clone(), p as usize) == r {
                r = root;
                k *= p;
                continue 'outer;
            }
        }
        return (r, k);
    }
}

fn rat_pow_int(q: &BigRational, e: &BigInt) -> BigRational {
    let m: usize = e.abs().to_usize().expect("exponent fits in usize");
    let p = num_traits::pow(q.clone(), m);
    if e.is_negative() {
        p.recip()
    } else {
        p
    }
}

impl PowProduct {
    pub fn one() -> Self {
        PowProduct { factors: BTreeMap::new() }
    }

    fn push(&mut self, base: &BigInt, e: BigRational) {
        if base <= &BigInt::one() || e.is_zero() {
            return;
        }
        let (r, k) = primitive_root(base);
        let e = e * BigRational::from_integer(BigInt::from(k));
        let slot = self.factors.entry(r.clone()).or_insert_with(BigRational::zero);
        *slot += e;
        if slot.is_zero() {
            self.factors.remove(&r);
        }
    }

    /// `b^e` for a positive rational base.
    pub fn power(b: &BigRational, e: &BigRational) -> Result<Self> {
        if !b.is_positive() {
            return Err(Error::Domain("power base must be positive".into()));
        }
        let mut out = PowProduct::one();
        out.push(b.numer(), e.clone());
        out.push(b.denom(), -e.clone());
        Ok(out)
    }

    pub fn from_rational(q: &BigRational) -> Result<Self> {
        PowProduct::power(q, &BigRational::one())
    }

    pub fn from_int(n: i64) -> Result<Self> {
        PowProduct::from_rational(&BigRational::from_integer(n.into()))
    }

    pub fn mul(&self, other: &PowProduct) -> PowProduct {
        let mut out = self.clone();
        for (b, e) in &other.factors {
            out.push(b, e.clone());
        }
        out
    }

    pub fn recip(&self) -> PowProduct {
        PowProduct { factors: self.factors.iter().map(|(b, e)| (b.clone(), -e.clone())).collect() }
    }

    pub fn div(&self, other: &PowProduct) -> PowProduct {
        self.mul(&other.recip())
    }

    pub fn pow(&self, e: &BigRational) -> PowProduct {
        let mut out = PowProduct::one();
        for (b, x) in &self.factors {
            out.push(b, x * e);
        }
        out
    }

    pub fn factors(&self) -> impl Iterator<Item = (&BigInt, &BigRational)> {
        self.factors.iter()
    }

    /// Common exponent denominator `Q` and the rational `V = v^Q`.
    pub fn rational_power(&self) -> (BigInt, BigRational) {
        let q = self.factors.values().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let mut v = BigRational::one();
        for (b, e) in &self.factors {
            let k = (e * BigRational::from_integer(q.clone())).to_integer();
            v *= rat_pow_int(&BigRational::from_integer(b.clone()), &k);
        }
        (q, v)
    }

    /// The exact value when it is rational.
    pub fn to_rational(&self) -> Option<BigRational> {
        let (q, v) = self.rational_power();
        if q.is_one() {
            return Some(v);
        }
        let qq = q.to_u32()?;
        let n = v.numer().nth_root(qq);
        let d = v.denom().nth_root(qq);
        if num_traits::pow(n.clone(), qq as usize) == *v.numer()
            && num_traits::pow(d.clone(), qq as usize) == *v.denom()
        {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }

    fn root_index(&self) -> Result<(u32, BigRational)> {
        let (q, v) = self.rational_power();
        let q = q.to_u32().ok_or_else(|| Error::PrecisionExhausted("root index too large".into()))?;
        Ok((q, v))
    }

    /// Bit length of `V = v^Q` estimated from the exponents.
    fn power_bits(&self) -> Option<u64> {
        let q = self.factors.values().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let mut bits = 0u64;
        for (b, e) in &self.factors {
            let k = (e.abs() * BigRational::from_integer(q.clone())).to_integer().to_u64()?;
            bits = bits.checked_add(k.checked_mul(b.bits())?)?;
        }
        Some(bits)
    }

    fn exact_is_cheap(&self) -> bool {
        self.power_bits().is_some_and(|b| b <= EXACT_BITS)
    }

    /// Enclosure of `ln v`.
    fn ln_enclosure(&self, prec: u32) -> Result<DyInterval> {
        let mut s = DyInterval::zero(prec);
        for (b, e) in &self.factors {
            s = &s + &(&DyInterval::from_int(b, prec).ln()? * &DyInterval::from_rational(e, prec));
        }
        Ok(s)
    }

    /// Exact `⌊v⌋`.
    pub fn floor(&self) -> Result<BigInt> {
        if self.exact_is_cheap() {
            let (q, v) = self.root_index()?;
            return Ok(v.floor().to_integer().nth_root(q));
        }
        for prec in [128u32, 512, 2048] {
            let x = self.ln_enclosure(prec + 32)?.exp();
            let lo = x.lo().to_rational().floor().to_integer();
            let hi = x.hi().to_rational().floor().to_integer();
            if lo == hi {
                return Ok(lo);
            }
        }
        Err(Error::PrecisionExhausted("floor of a power product is not separated from an integer".into()))
    }

    /// Exact ordering of two products.
    pub fn cmp_exact(&self, other: &PowProduct) -> Result<Ordering> {
        let r = self.div(other);
        if r.factors.is_empty() {
            return Ok(Ordering::Equal);
        }
        if r.exact_is_cheap() {
            let (_, v) = r.root_index()?;
            return Ok(v.cmp(&BigRational::one()));
        }
        for prec in [128u32, 512, 2048] {
            let l = r.ln_enclosure(prec)?;
            if l.is_positive() {
                return Ok(Ordering::Greater);
            }
            if l.is_negative() {
                return Ok(Ordering::Less);
            }
        }
        Err(Error::PrecisionExhausted("power products are not separated".into()))
    }

    /// Outward enclosure with about `prec` significant bits.
    pub fn eval(&self, prec: u32) -> Result<DyInterval> {
        if !self.exact_is_cheap() {
            return Ok(self.ln_enclosure(prec + 32)?.exp().with_prec(prec));
        }
        let (q, v) = self.root_index()?;
        if q == 1 {
            return Ok(DyInterval::from_rational(&v, prec));
        }
        let log2v = v.numer().bits() as i64 - v.denom().bits() as i64;
        let k = prec as i64 + 4 - Integer::div_floor(&log2v, &(q as i64));
        let shift = k * q as i64;
        let (num, den) = if shift >= 0 {
            (v.numer() << (shift as u64), v.denom().clone())
        } else {
            (v.numer().clone(), v.denom() << ((-shift) as u64))
        };
        let (fl, rem) = num.div_mod_floor(&den);
        let r = fl.nth_root(q);
        let exact = rem.is_zero() && num_traits::pow(r.clone(), q as usize) == fl;
        let lo = Dyadic::new(r.clone(), -k);
        let hi = if exact { lo.clone() } else { Dyadic::new(r + 1, -k) };
        DyInterval::new(lo, hi, prec)
    }
}

/// `⌊b^e⌋` exactly, with an enclosure of `b^e`.
pub fn floor_pow(b: &BigRational, e: &BigRational, prec: u32) -> Result<(BigInt, DyInterval)> {
    let p = PowProduct::power(b, e)?;
    Ok((p.floor()?, p.eval(prec)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(&BigInt::from(1296)), (BigInt::from(6), 4));
        assert_eq!(primitive_root(&BigInt::from(64)), (BigInt::from(2), 6));
        assert_eq!(primitive_root(&BigInt::from(12)), (BigInt::from(12), 1));
    }

    #[test]
    fn floor_pow_examples() {
        let (f, e) = floor_pow(&q(6, 1), &q(4, 1), 64).unwrap();
        assert_eq!(f, BigInt::from(1296));
        assert!(e.is_point() && e.contains(&Dyadic::from_i64(1296)));

        // ℓ = 6^-7, exponent −(1/2 + 1/14)
        let ell = BigRational::new(1.into(), BigInt::from(6).pow(7));
        let (f, e) = floor_pow(&ell, &q(-8, 14), 64).unwrap();
        assert_eq!(f, BigInt::from(1296));
        assert!(e.is_point());

        let (f, e) = floor_pow(&q(2, 1), &q(1, 2), 64).unwrap();
        assert_eq!(f, BigInt::one());
        assert!(!e.is_point());
        let lo = e.lo().to_rational();
        let hi = e.hi().to_rational();
        assert!(&lo * &lo < q(2, 1) && q(2, 1) < &hi * &hi);
    }

    #[test]
    fn six_minus_three_halves_matches_series_path() {
        let p = PowProduct::power(&q(6, 1), &q(-3, 2)).unwrap();
        let v = p.eval(256).unwrap();
        let w = DyInterval::from_i64(6, 256).pow_rational(&q(-3, 2)).unwrap();
        assert!(v.overlaps(&w));
        assert!(v.lo().to_rational() > q(680, 10000) && v.hi().to_rational() < q(681, 10000));
    }

    #[test]
    fn exact_cancellation() {
        // |I|/a = sqrt(n ℓ) / sqrt(ℓ) = sqrt(1296) = 36
        let ell = PowProduct::power(&q(6, 1), &q(-7, 1)).unwrap();
        let n = PowProduct::from_int(1296).unwrap();
        let len_i = n.mul(&ell).pow(&q(1, 2));
        let a = ell.pow(&q(1, 2));
        assert_eq!(len_i.div(&a).to_rational(), Some(q(36, 1)));
        assert_eq!(len_i.to_rational(), None);
        assert_eq!(len_i.cmp_exact(&a).unwrap(), Ordering::Greater);
    }

    #[test]
    fn floor_with_mixed_bases() {
        // sqrt(2) * sqrt(18) = 6 exactly, bases do not merge
        let x = PowProduct::power(&q(2, 1), &q(1, 2)).unwrap().mul(&PowProduct::power(&q(18, 1), &q(1, 2)).unwrap());
        assert_eq!(x.floor().unwrap(), BigInt::from(6));
        assert_eq!(x.to_rational(), Some(q(6, 1)));
    }
}
