//! Scalar abstraction shared by every engine.
//!
//! All engines are written against [`Scalar`] so the same code runs with exact
//! rationals ([`BigRational`]) or with plain floats when only an approximation
//! is needed. Combinatorial coefficients (factorials, binomials) are always
//! formed exactly as big rationals and converted once.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Sum + Send + Sync {
    /// Converts an exact rational into this scalar (lossy for floats).
    fn from_big_ratio(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn from_count(n: u64) -> Self {
        Self::from_big_ratio(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Sums `count / denominator` over the given terms. Denominators are
    /// nonzero.
    fn unit_fraction_sum<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        terms.into_iter().map(|(c, d)| Self::from_count(c) / Self::from_count(d)).sum()
    }

    /// Sum of many values; exact types may batch the reductions.
    fn sum_many<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        Self: 'a,
    {
        values.into_iter().cloned().sum()
    }

    /// `x * k` for every `x`.
    fn scale_many(values: &[Self], k: &Self) -> Vec<Self> {
        values.iter().map(|x| x.clone() * k.clone()).collect()
    }
}

impl Scalar for BigRational {
    fn from_big_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    // Accumulate over a running common denominator in u128; only fall back to
    // reducing big rationals once that overflows.
    fn unit_fraction_sum<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        let mut iter = terms.into_iter();
        while let Some((c, d)) = iter.next() {
            let d = d as u128;
            let g = gcd_u128(den, d);
            let step = (|| {
                let scale = d / g;
                let new_den = den.checked_mul(scale)?;
                let lifted = num.checked_mul(scale)?;
                let add = (c as u128).checked_mul(new_den / d)?;
                Some((lifted.checked_add(add)?, new_den))
            })();
            match step {
                Some((n, dd)) => {
                    num = n;
                    den = dd;
                }
                None => {
                    let mut acc = BigRational::new(BigInt::from(num), BigInt::from(den));
                    acc += BigRational::new(BigInt::from(c), BigInt::from(d));
                    for (c, d) in iter {
                        acc += BigRational::new(BigInt::from(c), BigInt::from(d));
                    }
                    return acc;
                }
            }
        }
        let g = gcd_u128(num, den);
        BigRational::new_raw(BigInt::from(num / g), BigInt::from(den / g))
    }

    // Keep an unreduced common denominator; it stops growing once it is a
    // multiple of every denominator seen, so most steps skip the gcd.
    fn sum_many<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for x in values {
            let (a, b) = (x.numer(), x.denom());
            if (&den % b).is_zero() {
                num += a * (&den / b);
            } else {
                let g = den.gcd(b);
                let lift = b / &g;
                num = num * &lift + a * (&den / &g);
                den *= lift;
            }
        }
        BigRational::new(num, den)
    }

    fn scale_many(values: &[Self], k: &Self) -> Vec<Self> {
        if !k.is_integer() || k.is_zero() {
            return values.iter().map(|x| x * k).collect();
        }
        let k = k.numer();
        values
            .iter()
            .map(|x| {
                let g = x.denom().gcd(k);
                BigRational::new_raw(x.numer() * (k / &g), x.denom() / &g)
            })
            .collect()
    }
}

// binary gcd; u128 division is slow
fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 || b == 0 {
        return a | b;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Scalar for f64 {
    fn from_big_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_big_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn from_count(n: u64) -> Self {
        n as f32
    }
}

/// `0!, 1!, ..., max!` as big integers.
pub(crate) fn factorials(max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigUint::one());
    for k in 1..=max {
        let next = &out[k - 1] * BigUint::from(k);
        out.push(next);
    }
    out
}

pub(crate) fn ratio_of(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Rounds half away from zero to the nearest integer.
pub fn round_half_away(r: &BigRational) -> BigInt {
    r.round().to_integer()
}
