//! Special values and functions to arbitrary decimal precision: integer
//! zeta values, Euler's constant, digamma and log-gamma shifts, and the
//! inverse-power tail sums that appear in the series evaluations.
//!
//! Everything is computed by direct summation plus an Euler-Maclaurin tail
//! whose remainder is bounded by twice the first omitted correction term.
//! Results carry an explicit `error_bound` at the output scale.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fixed::{pow10, Fixed};
use crate::series::{bernoulli, SeriesQ};

/// Decimal precision request: digits the caller wants correct, plus guard
/// digits every internal computation carries on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionCtx {
    pub target_digits: u32,
    pub guard_digits: u32,
}

impl PrecisionCtx {
    pub fn new(target_digits: u32) -> Self {
        PrecisionCtx { target_digits, guard_digits: 10 }
    }

    pub fn working_scale(&self) -> u32 {
        self.target_digits + self.guard_digits
    }
}

/// A computed value with a rigorous absolute error bound.
#[derive(Debug, Clone)]
pub struct SumResult {
    pub value: Fixed,
    pub error_bound: Fixed,
    pub terms_used: usize,
    pub method: &'static str,
}

fn rat_u(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Σ_{n>=start} (step n + off)^(-s), s >= 2, by direct summation plus an
/// Euler-Maclaurin tail.  Accumulates in fixed point at scale+4; each term
/// contributes at most half an ulp of rounding there, so the total rounding
/// stays well inside the caller's guard digits.  Returns the value, a bound
/// on the truncation error, and the number of terms summed.
fn power_tail(start: u64, step: u64, off: u64, s: u32, scale: u32) -> (Fixed, BigRational, usize) {
    debug_assert!(s >= 2);
    let ws = scale + 4;
    let eps = BigRational::new(BigInt::one(), pow10(ws));
    // direct terms until Euler-Maclaurin converges comfortably
    let n_direct = (scale as u64).max(24).max(s as u64 / step + 1);
    let mut acc = Fixed::zero(ws);
    for n in start..start + n_direct {
        let t = BigRational::new(BigInt::one(), BigInt::from(step * n + off).pow(s));
        acc = acc.add(&Fixed::from_ratio(&t, ws));
    }
    let edge = BigInt::from(step * (start + n_direct) + off);
    // integral: (step N + off)^(1-s) / (step (s-1))
    let inv = |p: u32| BigRational::new(BigInt::one(), edge.pow(p));
    acc = acc.add(&Fixed::from_ratio(&(inv(s - 1) / rat_u(step * (s as u64 - 1), 1)), ws));
    // half term
    acc = acc.add(&Fixed::from_ratio(&(inv(s) / rat_u(2, 1)), ws));
    // corrections: -B_2i/(2i)! f^(2i-1)(N) with f(n) = (step n + off)^(-s);
    // f^(2i-1)(N) = -s(s+1)..(s+2i-2) step^(2i-1) (step N + off)^(-s-2i+1)
    let bern = bernoulli(2 * (scale as usize + 8));
    let mut rising = BigRational::one();
    let mut fact = BigRational::one();
    let mut step_pow = BigRational::one();
    let bound;
    let mut used = n_direct as usize;
    let mut i = 0usize;
    loop {
        i += 1;
        // extend rising product s(s+1)...(s+2i-2) and (2i)!
        let lo = if i == 1 { 0 } else { 2 * i - 3 };
        for j in lo..(2 * i - 1) {
            rising *= rat_u(s as u64 + j as u64, 1);
        }
        fact *= rat_u((2 * i - 1) as u64 * (2 * i) as u64, 1);
        step_pow *= rat_u(step * step, 1);
        let term = &bern[2 * i] / &fact * &rising * &step_pow / rat_u(step, 1) * inv(s + 2 * i as u32 - 1);
        if term.abs() < eps || 2 * i + 6 >= bern.len() {
            bound = term.abs() * rat_u(2, 1);
            break;
        }
        acc = acc.add(&Fixed::from_ratio(&term, ws));
        used += 1;
    }
    (acc, bound, used)
}

static ZETA_CACHE: OnceLock<Mutex<HashMap<(u32, u32), BigInt>>> = OnceLock::new();

/// Riemann zeta at an integer s >= 2, correct to within a few ulp at `scale`.
pub fn zeta_int(s: u32, scale: u32) -> Result<Fixed> {
    if s < 2 {
        return Err(Error::Domain(format!("zeta_int needs s >= 2, got {s}")));
    }
    let cache = ZETA_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&(scale, s)) {
        return Ok(Fixed::new(m.clone(), scale));
    }
    let ws = scale + 8;
    let (acc, _bound, _) = power_tail(1, 1, 0, s, ws);
    let r = acc.rescale(scale);
    cache.lock().unwrap().insert((scale, s), r.mant().clone());
    Ok(r)
}

static GAMMA_CACHE: OnceLock<Mutex<HashMap<u32, BigInt>>> = OnceLock::new();

/// Euler's constant γ = lim (H_N - ln N).
pub fn euler_gamma(scale: u32) -> Fixed {
    let cache = GAMMA_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&scale) {
        return Fixed::new(m.clone(), scale);
    }
    let ws = scale + 10;
    let n = (ws as u64).max(24);
    // γ = H_N - ln N - 1/(2N) + Σ_i B_2i / (2i N^2i) + R
    let mut acc = BigRational::zero();
    for j in 1..=n {
        acc += rat_u(1, j);
    }
    acc -= rat_u(1, 2 * n);
    let bern = bernoulli(2 * (ws as usize + 8));
    let eps = BigRational::new(BigInt::one(), pow10(ws + 2));
    let n2 = BigInt::from(n) * BigInt::from(n);
    let mut npow = BigRational::one();
    let mut i = 0usize;
    loop {
        i += 1;
        npow /= BigRational::from_integer(n2.clone());
        let term = &bern[2 * i] / rat_u(2 * i as u64, 1) * &npow;
        if term.abs() < eps || 2 * i + 6 >= bern.len() {
            break;
        }
        acc += term;
    }
    let h = Fixed::from_ratio(&acc, ws);
    let ln_n = Fixed::from_integer(n as i64, ws).ln();
    let r = h.sub(&ln_n).rescale(scale);
    cache.lock().unwrap().insert(scale, r.mant().clone());
    r
}

/// ψ(1+x) - ψ(1) for rational x in [0, 1].
pub fn digamma_shift(x: &BigRational, scale: u32) -> Result<Fixed> {
    if x.is_negative() || x > &BigRational::one() {
        return Err(Error::Domain(format!("digamma_shift needs x in [0,1], got {x}")));
    }
    let ws = scale + 10;
    if x.is_zero() {
        return Ok(Fixed::zero(scale));
    }
    let n = (ws as u64).max(24);
    // Σ_{n<N} (1/n - 1/(n+x)) exactly, then the tail by Euler-Maclaurin:
    // ln(1 + x/N) + (1/N - 1/(N+x))/2 + Σ_i B_2i/(2i) (N^-2i - (N+x)^-2i)
    let mut acc = BigRational::zero();
    for j in 1..n {
        acc += rat_u(1, j) - (rat_u(j, 1) + x).recip();
    }
    let nx = rat_u(n, 1) + x;
    acc += (rat_u(1, n) - nx.recip()) / rat_u(2, 1);
    let bern = bernoulli(2 * (ws as usize + 8));
    let eps = BigRational::new(BigInt::one(), pow10(ws + 2));
    let inv_n2 = rat_u(1, n * n);
    let inv_nx2 = nx.recip() * nx.recip();
    let mut pn = BigRational::one();
    let mut px = BigRational::one();
    let mut i = 0usize;
    loop {
        i += 1;
        pn *= &inv_n2;
        px *= &inv_nx2;
        let term = &bern[2 * i] / rat_u(2 * i as u64, 1) * (&pn - &px);
        if term.abs() < eps || 2 * i + 6 >= bern.len() {
            break;
        }
        acc += term;
    }
    let head = Fixed::from_ratio(&acc, ws);
    let log_part = Fixed::from_ratio(&(BigRational::one() + x / rat_u(n, 1)), ws).ln();
    Ok(head.add(&log_part).rescale(scale))
}

/// ln Γ(1+x) for rational x in [0, 1]:
/// -ln(1+x) + (1-γ)x + Σ_{j>=2} (-1)^j (ζ(j)-1) x^j / j.
pub fn lgamma1p(x: &BigRational, scale: u32) -> Result<Fixed> {
    if x.is_negative() || x > &BigRational::one() {
        return Err(Error::Domain(format!("lgamma1p needs x in [0,1], got {x}")));
    }
    let ws = scale + 10;
    if x.is_zero() {
        return Ok(Fixed::zero(scale));
    }
    let xf = Fixed::from_ratio(x, ws);
    let one = Fixed::from_integer(1, ws);
    let mut acc = one.sub(&euler_gamma(ws)).mul(&xf);
    acc = acc.sub(&Fixed::from_ratio(&(BigRational::one() + x), ws).ln());
    // series terms: (ζ(j)-1) decays like 2^-j, x <= 1
    let mut xpow = xf.clone();
    let mut j = 1u32;
    loop {
        j += 1;
        xpow = xpow.mul(&xf);
        let z = zeta_int(j, ws)?.sub(&one);
        let term = z.mul(&xpow).div_int(&BigInt::from(j));
        if term.mant().abs() <= BigInt::one() {
            // remaining terms shrink at least geometrically by 1/2
            break;
        }
        if j % 2 == 0 {
            acc = acc.add(&term);
        } else {
            acc = acc.sub(&term);
        }
    }
    Ok(acc.rescale(scale))
}

/// b ln(Γ(1 + (d+1)/b) / Γ(1 + d/b)) -- the log-gamma ratio entering the
/// digamma-split evaluation, exact arguments, value at `scale`.
pub fn log_gamma_ratio(base: u64, digit: u64, scale: u32) -> Result<Fixed> {
    let hi = rat_u(digit + 1, base);
    let lo = rat_u(digit, base);
    let ws = scale + 6;
    let diff = lgamma1p(&hi, ws)?.sub(&lgamma1p(&lo, ws)?);
    Ok(diff.mul_int(&BigInt::from(base)).rescale(scale))
}

/// Σ_{n>=1} (b n + d)^-(m+1), with error bound.
pub fn tail_sum(base: u64, digit: u64, m: u32, scale: u32) -> Result<SumResult> {
    if m < 1 {
        return Err(Error::Domain("tail_sum needs m >= 1".into()));
    }
    let ws = scale + 6;
    let (acc, bound, used) = power_tail(1, base, digit, m + 1, ws);
    let value = acc.rescale(scale);
    let error_bound = Fixed::from_ratio(&bound, scale).add(&Fixed::ulp(scale));
    Ok(SumResult { value, error_bound, terms_used: used, method: "euler-maclaurin-tail" })
}

/// The finite digit sum s_m(b,d) = Σ_{0<=a<b, a!=d} c (d + c a)^-(m+1)
/// with c = 1/b, as an exact rational.
pub fn s_m_finite(base: u64, digit: u64, m: u32) -> Result<BigRational> {
    if digit == 0 {
        return Err(Error::Domain("s_m_finite needs digit >= 1".into()));
    }
    let bm = BigInt::from(base).pow(m);
    let mut acc = BigRational::zero();
    for a in 0..base {
        if a == digit {
            continue;
        }
        // c/(d + c a)^(m+1) = b^m / (b d + a)^(m+1)
        acc += BigRational::new(bm.clone(), BigInt::from(base * digit + a).pow(m + 1));
    }
    Ok(acc)
}

/// Asymptotic expansion of s_m(b,d) in powers of c = 1/b: the
/// Euler-Maclaurin expansion of the full Riemann sum of (d+x)^-(m+1) over
/// [0,1], minus the geometric series of the excluded a = d term.
pub fn s_m_series(digit: u64, m: u32, len: usize) -> Result<SeriesQ> {
    if digit == 0 {
        return Err(Error::Domain("s_m_series needs digit >= 1".into()));
    }
    let d = digit;
    let inv_d = |p: u32| BigRational::new(BigInt::one(), BigInt::from(d).pow(p));
    let inv_d1 = |p: u32| BigRational::new(BigInt::one(), BigInt::from(d + 1).pow(p));
    let mut coeffs = vec![BigRational::zero(); len];
    // c^0: integral of (d+x)^-(m+1) over [0,1]
    coeffs[0] = (inv_d(m) - inv_d1(m)) / rat_u(m as u64, 1);
    // c^1: -(f(1)-f(0))/2
    if len > 1 {
        coeffs[1] = -(inv_d1(m + 1) - inv_d(m + 1)) / rat_u(2, 1);
    }
    // c^2i: -B_2i/(2i)! (m+1)...(m+2i-1) (f at 1 minus f at 0 powers)
    let bern = bernoulli(len);
    let mut rising = BigRational::one();
    let mut fact = BigRational::one();
    for i in 1..=(len - 1) / 2 {
        let lo = if i == 1 { 1 } else { 2 * i - 2 };
        for j in lo..=(2 * i - 1) {
            rising *= rat_u(m as u64 + j as u64, 1);
        }
        fact *= rat_u((2 * i - 1) as u64 * (2 * i) as u64, 1);
        coeffs[2 * i] = -&bern[2 * i] / &fact * &rising * (inv_d1(m + 2 * i as u32) - inv_d(m + 2 * i as u32));
    }
    // minus the a=d term c d^-(m+1) (1+c)^-(m-...): c(d+cd)^-(m+1)
    //   = d^-(m+1) Σ_{i>=0} (-1)^i C(m+i, i) c^(i+1)
    for i in 0..len.saturating_sub(1) {
        let coef = binomial(BigInt::from(m as u64 + i as u64), BigInt::from(i as u64));
        let sgn = if i % 2 == 0 { 1 } else { -1 };
        coeffs[i + 1] -= BigRational::from_integer(coef * sgn) * inv_d(m + 1);
    }
    Ok(SeriesQ::from_coeffs(coeffs, len))
}
