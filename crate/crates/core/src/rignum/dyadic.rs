//! Exact dyadic rationals `mant * 2^exp`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for a lossy conversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// An exact dyadic rational. Normalized so the mantissa is odd (or zero with exponent 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_shr(m: &BigInt, k: u64) -> BigInt {
    // BigInt >> rounds toward negative infinity.
    m >> k
}

fn ceil_shr(m: &BigInt, k: u64) -> BigInt {
    -((-m) >> k)
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_int(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    /// Exact conversion from a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & 0x000f_ffff_ffff_ffff;
        let (m, e) = if raw_exp == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign * m), e))
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Floor of log2 |x| for nonzero x.
    pub fn ilog2(&self) -> i64 {
        self.exp + self.mant.bits() as i64 - 1
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let b = self.mant.bits();
        if b <= prec as u64 {
            return self.clone();
        }
        let k = b - prec as u64;
        let m = match dir {
            Round::Down => floor_shr(&self.mant, k),
            Round::Up => ceil_shr(&self.mant, k),
        };
        Dyadic::new(m, self.exp + k as i64)
    }

    /// Directed rounding of `num / den` to `prec` significant bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32, dir: Round) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Dyadic::zero();
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
        let k = prec as i64 + 2 + den.bits() as i64 - num.bits() as i64;
        let (n2, d2) = if k >= 0 { (num << (k as u64), den) } else { (num, den << ((-k) as u64)) };
        let (q, r) = n2.div_mod_floor(&d2);
        let q = if dir == Round::Up && !r.is_zero() { q + 1 } else { q };
        Dyadic::new(q, -k).round(prec, dir)
    }

    /// Directed rounding of a rational to `prec` significant bits.
    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Self {
        Dyadic::from_ratio(q.numer(), q.denom(), prec, dir)
    }

    /// Exact value as a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as u64))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Exact value as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.exp >= 0 {
            Some(&self.mant << (self.exp as u64))
        } else {
            None
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as u64)
        } else {
            floor_shr(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn ceil(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as u64)
        } else {
            ceil_shr(&self.mant, (-self.exp) as u64)
        }
    }

    /// Nearest `f64` (approximate, for display and heuristics only).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = self.mant.bits() as i64;
        let shift = (b - 60).max(0);
        let m = (&self.mant >> (shift as u64)).to_f64().unwrap_or(0.0);
        let e = self.exp + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * (2f64).powi(e as i32)
    }

    /// Exact midpoint `(a + b) / 2`.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        (a + b).shl(-1)
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Hex rendering `[-]0x<mant>p<exp>`, exact and canonical.
    pub fn to_hex(&self) -> String {
        let sign = if self.mant.is_negative() { "-" } else { "" };
        format!("{}0x{:x}p{}", sign, self.mant.abs(), self.exp)
    }

    /// Parse the format produced by [`Dyadic::to_hex`].
    pub fn from_hex(s: &str) -> Option<Dyadic> {
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let rest = rest.strip_prefix("0x")?;
        let (m, e) = rest.split_once('p')?;
        let mant = BigInt::parse_bytes(m.as_bytes(), 16)?;
        let exp: i64 = e.parse().ok()?;
        let mant = if neg { -mant } else { mant };
        Some(Dyadic::new(mant, exp))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // same nonzero sign: compare magnitudes by bit position first
        let la = self.ilog2();
        let lb = other.ilog2();
        if la != lb {
            let mag = la.cmp(&lb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(rhs.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &rhs.mant << ((rhs.exp - e) as u64);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &rhs.mant, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalizes_trailing_zeros() {
        let x = d(12, 0);
        assert_eq!(x.mant(), &BigInt::from(3));
        assert_eq!(x.exp(), 2);
        assert_eq!(d(0, 7), Dyadic::zero());
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(1, -3) < d(1, -2));
        assert!(d(-1, -3) > d(-1, -2));
        assert!(d(3, -1) > d(1, 0));
        assert!(d(-5, 10) < d(1, -100));
    }

    #[test]
    fn ratio_rounding_brackets() {
        let lo = Dyadic::from_ratio(&BigInt::from(1), &BigInt::from(3), 20, Round::Down);
        let hi = Dyadic::from_ratio(&BigInt::from(1), &BigInt::from(3), 20, Round::Up);
        let third = BigRational::new(1.into(), 3.into());
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(lo.bits() <= 20 && hi.bits() <= 20);
        let exact = Dyadic::from_ratio(&BigInt::from(3), &BigInt::from(4), 20, Round::Up);
        assert_eq!(exact, d(3, -2));
    }

    #[test]
    fn hex_round_trip() {
        for x in [d(0, 0), d(-255, -9), d(1, 40), d(7, -3)] {
            assert_eq!(Dyadic::from_hex(&x.to_hex()).unwrap(), x);
        }
        assert_eq!(d(-255, -9).to_hex(), "-0xffp-9");
    }

    #[test]
    fn floor_ceil_negative() {
        let x = d(-5, -1); // -2.5
        assert_eq!(x.floor(), BigInt::from(-3));
        assert_eq!(x.ceil(), BigInt::from(-2));
    }

    #[test]
    fn from_f64_exact() {
        assert_eq!(Dyadic::from_f64(0.375).unwrap(), d(3, -3));
        assert_eq!(Dyadic::from_f64(-2.0).unwrap(), d(-1, 1));
    }
}
