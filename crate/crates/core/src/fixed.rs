//! Decimal fixed-point arithmetic over `BigInt`.
//!
//! A [`Fixed`] stores `mant * 10^-scale` where every value participating in
//! one computation shares the same `scale` (decimal digits after the point).
//! Each arithmetic operation rounds to nearest, so its error is at most one
//! half ulp = 10^-scale / 2; callers budget for rounding by working a few
//! guard digits past the digits they report.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed {
    mant: BigInt,
    scale: u32,
}

pub fn pow10(n: u32) -> BigInt {
    BigInt::from(10u32).pow(n)
}

/// Rounded division n/d for d > 0, rounding to nearest (ties away from zero).
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    let two_abs: BigInt = n.abs() << 1u32;
    let q = (two_abs + d).div_floor(&(d << 1u32));
    if n.is_negative() {
        -q
    } else {
        q
    }
}

impl Fixed {
    pub fn new(mant: BigInt, scale: u32) -> Self {
        Fixed { mant, scale }
    }

    pub fn zero(scale: u32) -> Self {
        Fixed { mant: BigInt::zero(), scale }
    }

    pub fn from_integer<T: Into<BigInt>>(v: T, scale: u32) -> Self {
        Fixed { mant: v.into() * pow10(scale), scale }
    }

    pub fn from_ratio(r: &BigRational, scale: u32) -> Self {
        let mut den = r.denom().clone();
        let mut num = r.numer() * pow10(scale);
        if den.is_negative() {
            den = -den;
            num = -num;
        }
        Fixed { mant: round_div(&num, &den), scale }
    }

    /// One ulp at this scale: 10^-scale.
    pub fn ulp(scale: u32) -> Self {
        Fixed { mant: BigInt::one(), scale }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn abs(&self) -> Self {
        Fixed { mant: self.mant.abs(), scale: self.scale }
    }

    pub fn neg(&self) -> Self {
        Fixed { mant: -&self.mant, scale: self.scale }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.scale, other.scale, "mixed fixed-point scales");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Fixed { mant: &self.mant + &other.mant, scale: self.scale }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        Fixed { mant: &self.mant - &other.mant, scale: self.scale }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        Fixed {
            mant: round_div(&(&self.mant * &other.mant), &pow10(self.scale)),
            scale: self.scale,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.check(other);
        assert!(!other.is_zero(), "fixed-point division by zero");
        let mut num = &self.mant * pow10(self.scale);
        let mut den = other.mant.clone();
        if den.is_negative() {
            den = -den;
            num = -num;
        }
        Fixed { mant: round_div(&num, &den), scale: self.scale }
    }

    /// Multiply by an exact rational in one rounding step.
    pub fn mul_ratio(&self, r: &BigRational) -> Self {
        let mut num = &self.mant * r.numer();
        let mut den = r.denom().clone();
        if den.is_negative() {
            den = -den;
            num = -num;
        }
        Fixed { mant: round_div(&num, &den), scale: self.scale }
    }

    /// Divide by an exact (positive or negative) big integer.
    pub fn div_int(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        let (num, den) = if d.is_negative() {
            (-&self.mant, -d)
        } else {
            (self.mant.clone(), d.clone())
        };
        Fixed { mant: round_div(&num, &den), scale: self.scale }
    }

    pub fn mul_int(&self, m: &BigInt) -> Self {
        Fixed { mant: &self.mant * m, scale: self.scale }
    }

    /// Rescale, rounding to nearest when digits are dropped.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Fixed {
                mant: &self.mant * pow10(scale - self.scale),
                scale,
            },
            Ordering::Less => Fixed {
                mant: round_div(&self.mant, &pow10(self.scale - scale)),
                scale,
            },
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.mant.clone(), pow10(self.scale))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(f64::NAN)
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.check(other);
        self.mant.cmp(&other.mant)
    }

    /// Natural logarithm of a positive value.
    ///
    /// Writes x = 2^e * y with y in [2/3, 4/3], then ln x = e ln2 + 2 atanh t
    /// with t = (y-1)/(y+1), |t| <= 1/5. Worked at scale+10 internally.
    pub fn ln(&self) -> Self {
        assert!(self.is_positive(), "ln of non-positive value");
        let out_scale = self.scale;
        let ws = out_scale + 10;
        // Initial exponent guess from bit lengths: log2(mant) - scale*log2(10).
        let bits = self.mant.bits() as f64;
        let mut e = (bits - out_scale as f64 * std::f64::consts::LOG2_10).round() as i64;
        // y = mant / (10^scale * 2^e); normalize so 2/3 <= y <= 4/3.
        let base = pow10(out_scale);
        let denom_for = |e: i64| -> (BigInt, BigInt) {
            // returns (num, den) of y = mant * 2^-e / 10^scale with both positive
            if e >= 0 {
                (self.mant.clone(), &base << (e as usize))
            } else {
                (&self.mant << ((-e) as usize), base.clone())
            }
        };
        loop {
            let (num, den) = denom_for(e);
            if &num * 3u32 > &den * 4u32 {
                e += 1;
            } else if &num * 3u32 < &den * 2u32 {
                e -= 1;
            } else {
                break;
            }
        }
        let (num, den) = denom_for(e);
        // t = (y-1)/(y+1)
        let t = Fixed::from_ratio(&BigRational::new(&num - &den, num + den), ws);
        let t2 = t.mul(&t);
        let mut acc = t.clone();
        let mut term = t;
        let mut j = 1u32;
        let eps = BigInt::one();
        loop {
            term = term.mul(&t2);
            j += 2;
            let contrib = term.div_int(&BigInt::from(j));
            if contrib.mant.abs() <= eps {
                break;
            }
            acc = acc.add(&contrib);
        }
        let mut r = acc.mul_int(&BigInt::from(2));
        if e != 0 {
            r = r.add(&ln2(ws).mul_int(&BigInt::from(e)));
        }
        r.rescale(out_scale)
    }

    /// Decimal string with exactly `digits` digits after the point
    /// (digits <= scale), rounded to nearest.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let v = self.rescale(digits.min(self.scale));
        let digits = v.scale;
        let neg = v.mant.is_negative();
        let m = v.mant.abs();
        let (int, frac) = m.div_rem(&pow10(digits));
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int.to_string());
        if digits > 0 {
            let f = frac.to_string();
            s.push('.');
            for _ in f.len()..digits as usize {
                s.push('0');
            }
            s.push_str(&f);
        }
        s
    }
}

static LN2_CACHE: OnceLock<Mutex<HashMap<u32, BigInt>>> = OnceLock::new();

/// ln 2 = 2 atanh(1/3), cached per scale.
pub fn ln2(scale: u32) -> Fixed {
    let cache = LN2_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&scale) {
        return Fixed::new(m.clone(), scale);
    }
    let ws = scale + 10;
    let third = Fixed::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(3)), ws);
    let t2 = third.mul(&third);
    let mut acc = third.clone();
    let mut term = third;
    let mut j = 1u32;
    loop {
        term = term.mul(&t2);
        j += 2;
        let contrib = term.div_int(&BigInt::from(j));
        if contrib.mant().abs() <= BigInt::one() {
            break;
        }
        acc = acc.add(&contrib);
    }
    let r = acc.mul_int(&BigInt::from(2)).rescale(scale);
    cache.lock().unwrap().insert(scale, r.mant.clone());
    r
}

/// pi by Machin's formula, used by tests as an independent constant source.
pub fn pi(scale: u32) -> Fixed {
    let ws = scale + 10;
    let atan_inv = |q: u64| -> Fixed {
        // atan(1/q) = sum (-1)^j / ((2j+1) q^(2j+1))
        let qi = BigInt::from(q);
        let q2 = &qi * &qi;
        let mut pow = Fixed::from_integer(1, ws).div_int(&qi);
        let mut acc = pow.clone();
        let mut j = 1u32;
        loop {
            pow = pow.div_int(&q2);
            let contrib = pow.div_int(&BigInt::from(2 * j + 1));
            if contrib.mant().abs() <= BigInt::one() {
                break;
            }
            if j % 2 == 1 {
                acc = acc.sub(&contrib);
            } else {
                acc = acc.add(&contrib);
            }
            j += 1;
        }
        acc
    };
    let a = atan_inv(5).mul_int(&BigInt::from(16));
    let b = atan_inv(239).mul_int(&BigInt::from(4));
    a.sub(&b).rescale(scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn basic_ops_round_to_nearest() {
        let s = 10;
        let a = Fixed::from_ratio(&ratio(1, 3), s);
        let b = Fixed::from_ratio(&ratio(2, 3), s);
        let one = Fixed::from_integer(1, s);
        assert_eq!(a.add(&b), one);
        let p = a.mul(&b);
        let exact = Fixed::from_ratio(&ratio(2, 9), s);
        assert!(p.sub(&exact).mant().abs() <= BigInt::one());
        let q = one.div(&Fixed::from_integer(7, s));
        assert_eq!(q, Fixed::from_ratio(&ratio(1, 7), s));
    }

    #[test]
    fn ln_matches_known_values() {
        let s = 40;
        // ln 2 against its first 40 digits
        let l2 = ln2(s);
        let expect = "0.6931471805599453094172321214581765680755";
        assert_eq!(l2.to_decimal_string(40), expect);
        // ln(e^1) style check via ln(10) = ln2 + ln5 decomposition
        let ln10 = Fixed::from_integer(10, s).ln();
        let ln5 = Fixed::from_ratio(&ratio(5, 1), s).ln();
        let diff = ln10.sub(&ln5).sub(&l2);
        assert!(diff.mant().abs() <= BigInt::from(4));
        // ln of a tiny value
        let t = Fixed::from_ratio(&ratio(1, 1024), s).ln();
        let expect = l2.mul_int(&BigInt::from(-10));
        assert!(t.sub(&expect).mant().abs() <= BigInt::from(16));
    }

    #[test]
    fn pi_digits() {
        let p = pi(40);
        assert_eq!(
            p.to_decimal_string(39),
            "3.141592653589793238462643383279502884197"
        );
    }

    #[test]
    fn decimal_string_rounding() {
        let s = 8;
        let v = Fixed::from_ratio(&ratio(-1, 3), s);
        assert_eq!(v.to_decimal_string(4), "-0.3333");
        let w = Fixed::from_ratio(&ratio(2, 3), s);
        assert_eq!(w.to_decimal_string(4), "0.6667");
        let z = Fixed::from_integer(5, s);
        assert_eq!(z.to_decimal_string(2), "5.00");
    }
}
