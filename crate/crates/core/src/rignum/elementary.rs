//! exp, ln and real powers on intervals.

use num_rational::BigRational;
use num_traits::Signed;

use super::dyadic::Dyadic;
use super::interval::DyInterval;
use crate::error::{Error, Result};

/// Enclosure of `e^x` for an exact dyadic.
fn exp_point(x: &Dyadic, prec: u32) -> DyInterval {
    if x.is_zero() {
        return DyInterval::one(prec);
    }
    // argument reduction: |y| = |x| / 2^s ≤ 1/2
    let s = (x.ilog2() + 2).max(0);
    let w = prec + 24 + s as u32;
    let y = DyInterval::point(x.shl(-s), w);
    let mut sum = DyInterval::one(w);
    let mut term = DyInterval::one(w);
    let tol = Dyadic::pow2(-(w as i64) - 4);
    let mut k: i64 = 1;
    loop {
        term = (&term * &y).div(&DyInterval::from_i64(k, w)).expect("nonzero divisor");
        if term.mag() < tol {
            // tail after term k-1 is at most 2|term_k| since |y| ≤ 1/2
            sum = sum.inflate(&term.mag().shl(1));
            break;
        }
        sum = &sum + &term;
        k += 1;
    }
    for _ in 0..s {
        sum = sum.sqr();
    }
    sum.with_prec(prec)
}

/// atanh(z) for |z| ≤ 1/3 via its odd series with a geometric tail bound.
fn atanh_small(z: &DyInterval, w: u32) -> DyInterval {
    let z2 = z.sqr();
    let mut pow = z.clone();
    let mut sum = z.clone();
    let tol = Dyadic::pow2(-(w as i64) - 4);
    let mut j: i64 = 1;
    loop {
        pow = &pow * &z2;
        let term = pow.div(&DyInterval::from_i64(2 * j + 1, w)).expect("odd divisor");
        if pow.mag() < tol {
            // tail ≤ |z|^{2j+1} / (1 − z²) ≤ (9/8)|z|^{2j+1}
            sum = sum.inflate(&pow.mag().shl(1));
            break;
        }
        sum = &sum + &term;
        j += 1;
    }
    sum
}

fn ln2(w: u32) -> DyInterval {
    let third = DyInterval::from_ratio(1, 3, w);
    atanh_small(&third, w).shl(1)
}

/// Enclosure of `ln x` for an exact positive dyadic.
fn ln_point(x: &Dyadic, prec: u32) -> DyInterval {
    let b = x.bits() as i64;
    let k = x.exp() + b;
    let kbits = 64 - (k.unsigned_abs()).leading_zeros();
    let w = prec + 24 + kbits;
    // x = f · 2^k with f ∈ [1/2, 1)
    let f = DyInterval::point(Dyadic::new(x.mant().clone(), -b), w);
    let one = DyInterval::one(w);
    let z = (&f - &one).div(&(&f + &one)).expect("positive denominator");
    let mut r = atanh_small(&z, w).shl(1);
    if k != 0 {
        r = &r + &(&ln2(w) * &DyInterval::from_i64(k, w));
    }
    r.with_prec(prec)
}

impl DyInterval {
    pub fn exp(&self) -> DyInterval {
        let lo = exp_point(self.lo(), self.prec());
        let hi = exp_point(self.hi(), self.prec());
        lo.hull(&hi)
    }

    pub fn ln(&self) -> Result<DyInterval> {
        if !self.is_positive() {
            return Err(Error::Domain("ln of an interval not bounded away from 0".into()));
        }
        let lo = ln_point(self.lo(), self.prec());
        let hi = ln_point(self.hi(), self.prec());
        Ok(lo.hull(&hi))
    }

    /// `x^q` for a rational exponent via `exp(q ln x)`; integer exponents use repeated products.
    pub fn pow_rational(&self, q: &BigRational) -> Result<DyInterval> {
        if q.is_integer() {
            let n = q.to_integer();
            let e: u32 = n
                .abs()
                .try_into()
                .map_err(|_| Error::Domain("integer exponent too large".into()))?;
            let p = self.powi(e);
            return if n.is_negative() { p.recip() } else { Ok(p) };
        }
        let prec = self.prec();
        let guard = prec + 32;
        let l = self.with_prec(guard).ln()?;
        let qi = DyInterval::from_rational(q, guard);
        Ok((&qi * &l).exp().with_prec(prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn exp_zero_and_one() {
        assert_eq!(DyInterval::zero(64).exp(), DyInterval::one(64));
        let e = DyInterval::one(128).exp();
        // e = 2.718281828459045235360287471352662497757...
        let lo = q(2718281828459045235, 1_000_000_000_000_000_000);
        let hi = q(2718281828459045236, 1_000_000_000_000_000_000);
        assert!(e.lo().to_rational() > lo && e.hi().to_rational() < hi);
    }

    #[test]
    fn ln_of_two() {
        let l = DyInterval::from_i64(2, 128).ln().unwrap();
        // ln 2 = 0.693147180559945309417232121458176568...
        assert!(l.lo().to_rational() > q(693147180559945309, 1_000_000_000_000_000_000));
        assert!(l.hi().to_rational() < q(693147180559945310, 1_000_000_000_000_000_000));
        assert!(l.width_f64() < 1e-35);
    }

    #[test]
    fn exp_ln_round_trip() {
        for (p, d) in [(7, 3), (1, 1000), (12345, 7)] {
            let x = DyInterval::from_ratio(p, d, 128);
            let y = x.ln().unwrap().exp();
            assert!(y.contains_rational(&q(p, d)));
        }
    }

    #[test]
    fn six_to_minus_three_halves() {
        let v = DyInterval::from_i64(6, 256).pow_rational(&q(-3, 2)).unwrap();
        assert!(v.lo().to_rational() > q(680, 10000));
        assert!(v.hi().to_rational() < q(681, 10000));
    }

    #[test]
    fn ln_rejects_nonpositive() {
        assert!(DyInterval::zero(64).ln().is_err());
    }
}
