//! Exact dyadic arithmetic for the alternating binomial series.
//!
//! Every finite `f64` is `m * 2^e` for integers `m`, `e`, so sums and
//! products of doubles stay exactly representable as a big-integer
//! mantissa with a binary exponent. Only the final conversion rounds.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub(crate) fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub(crate) fn from_int(v: impl Into<BigInt>) -> Self {
        Dyadic {
            mant: v.into(),
            exp: 0,
        }
    }

    /// Exact conversion; panics on non-finite input.
    pub(crate) fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value has no dyadic form");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mant = BigInt::from(m);
        Dyadic {
            mant: if negative { -mant } else { mant },
            exp: e,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            return Dyadic::zero();
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    #[cfg(test)]
    pub(crate) fn powi(&self, k: u32) -> Self {
        Dyadic {
            mant: self.mant.pow(k),
            exp: self.exp * k as i64,
        }
    }

    /// Nearest double (truncation below 64 significant bits, then one rounding).
    pub(crate) fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let negative = self.mant.sign() == Sign::Minus;
        let mut mag = self.mant.abs();
        let mut exp = self.exp;
        let bits = mag.bits() as i64;
        if bits > 64 {
            let shift = bits - 64;
            mag >>= shift as usize;
            exp += shift;
        }
        let head = mag.to_u64().expect("at most 64 bits after shift") as f64;
        let v = ldexp(head, exp);
        if negative {
            -v
        } else {
            v
        }
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 900;
    let up = 2f64.powi(STEP as i32);
    let down = 2f64.powi(-STEP as i32);
    while e > STEP {
        x *= up;
        e -= STEP;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -STEP {
        x *= down;
        e += STEP;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.mant.is_zero() {
            return rhs.clone();
        }
        if rhs.mant.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - exp) as usize;
        let b = &rhs.mant << (rhs.exp - exp) as usize;
        Dyadic { mant: a + b, exp }.normalized()
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs.clone())
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &rhs.mant,
            exp: self.exp + rhs.exp,
        }
        .normalized()
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}
