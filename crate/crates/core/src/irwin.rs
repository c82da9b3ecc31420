//! The digit-restricted harmonic sums themselves.
//!
//! `irwin_sum` picks one of four convergent series depending on whether the
//! restricted digit is zero and whether the occurrence count is zero, each
//! with a truncation order planned in advance from a rigorous tail bound.
//! A scaled-integer enumeration provides independent lower/upper brackets
//! for cross-checking.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fixed::{pow10, Fixed};
use crate::moments::{MomentTable, MAX_ORDER};
use crate::spec::{DigitSpec, RegimeId};
use crate::specfun::{digamma_shift, tail_sum, zeta_int, SumResult};

/// How many series terms to keep, and what the dropped tail is worth.
#[derive(Debug, Clone)]
pub struct TruncationPlan {
    pub order: usize,
    pub bound: BigRational,
    pub formula: &'static str,
}

fn rat_u(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inv_pow(base: &BigInt, p: u32) -> BigRational {
    BigRational::new(BigInt::one(), base.pow(p))
}

/// Tail bound for the series of the given regime truncated after `order`
/// terms.  Uses ζ(m+1) <= ζ(2) < 2, the moment bounds 0 <= u_{k;m},
/// |u_{k;m}-u_{k-1;m}|, w_{0;m} <= b/(m+1), and geometric summation.
fn tail_bound(spec: &DigitSpec, order: usize) -> BigRational {
    let b = spec.base();
    let d = spec.digit();
    let m = order as u32;
    let bb = BigInt::from(b);
    // zeta-series part, common to all regimes:
    //   sum_{m>M} 2 b^-m = 2 b^-M / (b-1)
    let mut bound = rat_u(2, b - 1) * inv_pow(&bb, m);
    if d > 0 {
        // finite digit-sum part: terms <= b (bd)^-m / d,
        //   tail <= 2 d^-(M+2) b^-M
        let dd = BigInt::from(d);
        bound += rat_u(2, 1) * inv_pow(&dd, m + 2) * inv_pow(&bb, m);
        if spec.count() > 0 {
            // extra series over powers of (bd+d): coefficients <= b/2
            bound += rat_u(b, 1) * inv_pow(&BigInt::from(b * d + d), m + 2);
        }
    }
    bound
}

/// Chooses the least truncation order whose tail bound drops below
/// 10^-(digits+3), so the truncation error is negligible at the target.
pub fn truncation_order(spec: &DigitSpec, digits: u32) -> Result<TruncationPlan> {
    let eps = BigRational::new(BigInt::one(), pow10(digits + 3));
    let formula = RegimeId::of(spec).name();
    for order in 1..=MAX_ORDER {
        let bound = tail_bound(spec, order);
        if bound <= eps {
            return Ok(TruncationPlan { order, bound, formula });
        }
    }
    Err(Error::Capacity(format!(
        "series for base {} digit {} cannot reach {} digits within {} terms",
        spec.base(),
        spec.digit(),
        digits,
        MAX_ORDER
    )))
}

/// Guard digits on top of the target: enough to absorb per-operation
/// rounding and the magnitude ~ b log b of the result.
fn guard_digits(base: u64) -> u32 {
    12 + 2 * (base.ilog10() + 1)
}

/// Σ_{0<=a<b, a!=d} (bd+a)^-(m+1), accumulated in fixed point.
fn finite_digit_sum(base: u64, digit: u64, m: u32, scale: u32) -> Fixed {
    let mut acc = Fixed::zero(scale);
    for a in 0..base {
        if a == digit {
            continue;
        }
        let t = BigRational::new(BigInt::one(), BigInt::from(base * digit + a).pow(m + 1));
        acc = acc.add(&Fixed::from_ratio(&t, scale));
    }
    acc
}

/// I(b,d,k) to `digits` correct decimal places, with an error bound
/// combining the planned truncation tail and a rounding allowance.
pub fn irwin_sum(spec: &DigitSpec, digits: u32) -> Result<SumResult> {
    if spec.is_empty_sum() {
        // no positive integer avoids the binary digit 1
        return Ok(SumResult {
            value: Fixed::zero(digits),
            error_bound: Fixed::zero(digits),
            terms_used: 0,
            method: "empty-sum",
        });
    }
    let plan = truncation_order(spec, digits)?;
    let w = digits + guard_digits(spec.base());
    let regime = RegimeId::of(spec);
    let b = spec.base();
    let d = spec.digit();
    let k = spec.count();
    let m_max = plan.order;
    let bb = BigInt::from(b);

    let moments = MomentTable::plain(spec, k, m_max)?;
    let b_ln_b = Fixed::from_integer(b as i64, w).ln().mul_int(&bb);
    let mut value = b_ln_b;
    let mut terms = 0usize;

    match regime {
        RegimeId::D0K0 | RegimeId::D0Kpos => {
            // b log b + Σ (-1)^(m-1) ζ(m+1) (u_{k;m} - u_{k-1;m}) / b^(m+1),
            // reading u_{-1;m} = 0
            for m in 1..=m_max {
                let diff = if k == 0 {
                    moments.value(0, m).clone()
                } else {
                    moments.value(k, m) - moments.value(k - 1, m)
                };
                let term = zeta_int(m as u32 + 1, w)?
                    .mul_ratio(&(diff * inv_pow(&bb, m as u32 + 1)));
                value = if m % 2 == 1 { value.add(&term) } else { value.sub(&term) };
                terms += 1;
            }
        }
        RegimeId::DposK0 => {
            // b log b - b log(1+1/d) + (ψ(1+d/b) - ψ(1))
            //   + A: -1/d + b log(1+1/(bd+d))
            //        - Σ (-1)^(m-1) w_{0;m} Σ_{a!=d} (bd+a)^-(m+1)
            //   + B: Σ (-1)^(m-1) u_{0;m} Σ_{n>=1} (bn+d)^-(m+1)
            let log_d = Fixed::from_ratio(&rat_u(d + 1, d), w).ln().mul_int(&bb);
            value = value.sub(&log_d);
            value = value.add(&digamma_shift(&rat_u(d, b), w)?);
            value = value.sub(&Fixed::from_ratio(&rat_u(1, d), w));
            let log_inner = Fixed::from_ratio(&rat_u(b * d + d + 1, b * d + d), w)
                .ln()
                .mul_int(&bb);
            value = value.add(&log_inner);
            for m in 1..=m_max {
                let wm = moments.deviation(0, m);
                let a_term = finite_digit_sum(b, d, m as u32, w).mul_ratio(&wm);
                let u = moments.value(0, m);
                let b_term = tail_sum(b, d, m as u32, w)?.value.mul_ratio(u);
                let term = b_term.sub(&a_term);
                value = if m % 2 == 1 { value.add(&term) } else { value.sub(&term) };
                terms += 1;
            }
        }
        RegimeId::DposKpos => {
            // b log b
            //  + Σ (-1)^(m-1) (u_{k;m}-u_{k-1;m})
            //        (Σ_{n>=1} (bn+d)^-(m+1) + Σ_{a!=d} (bd+a)^-(m+1))
            //  + (k>1):  Σ (-1)^(m-1) (u_{k-1;m}-u_{k-2;m}) (bd+d)^-(m+1)
            //  + (k=1):  1/(bd+d) + Σ (-1)^(m-1) u_{0;m} (bd+d)^-(m+1)
            let edge = BigInt::from(b * d + d);
            for m in 1..=m_max {
                let mu = m as u32;
                let diff = moments.value(k, m) - moments.value(k - 1, m);
                let mut term = tail_sum(b, d, mu, w)?
                    .value
                    .add(&finite_digit_sum(b, d, mu, w))
                    .mul_ratio(&diff);
                let extra = if k > 1 {
                    (moments.value(k - 1, m) - moments.value(k - 2, m)) * inv_pow(&edge, mu + 1)
                } else {
                    moments.value(0, m) * inv_pow(&edge, mu + 1)
                };
                term = term.add(&Fixed::from_ratio(&extra, w));
                value = if m % 2 == 1 { value.add(&term) } else { value.sub(&term) };
                terms += 1;
            }
            if k == 1 {
                value = value.add(&Fixed::from_ratio(&rat_u(1, b * d + d), w));
            }
        }
    }

    let value = value.rescale(digits);
    // rounding allowance: every term contributed O(1) ulp at the working
    // scale, and the guard digits exceed the term count comfortably
    let error_bound = Fixed::from_ratio(&plan.bound, digits).add(&Fixed::ulp(digits));
    Ok(SumResult { value, error_bound, terms_used: terms, method: plan.formula })
}

/// Number of `length`-digit base-b integers (leading digit nonzero) whose
/// expansion contains exactly `count` occurrences of `digit`.
pub fn count_kdigit(base: u64, digit: u64, count: u32, length: u32) -> BigInt {
    if length == 0 {
        return BigInt::zero();
    }
    let free = |l: u32, j: u32| -> BigInt {
        // l unconstrained digits, exactly j equal to the restricted one
        if j > l {
            return BigInt::zero();
        }
        binomial(BigInt::from(l), BigInt::from(j)) * BigInt::from(base - 1).pow(l - j)
    };
    if digit == 0 {
        BigInt::from(base - 1) * free(length - 1, count)
    } else {
        let with_lead = if count > 0 { free(length - 1, count - 1) } else { BigInt::zero() };
        with_lead + BigInt::from(base - 2) * free(length - 1, count)
    }
}

/// Exact lower bound for Σ 1/n over integers with at least `level` digits
/// and exactly `count` occurrences: Σ_{l>=level} N(l,count) b^-l.  The
/// matching upper bound is b times this.
fn tail_bracket_low(base: u64, digit: u64, count: u32, level: u32) -> BigRational {
    let y = rat_u(base - 1, base);
    // Σ_{p>=P} C(p,j) y^p  =  y^j/(1-y)^(j+1) - Σ_{p<P} C(p,j) y^p
    let h = |j: u32, p_min: u32| -> BigRational {
        let full = y.pow(j as i32)
            / (BigRational::one() - &y).pow(j as i32 + 1);
        let mut partial = BigRational::zero();
        for p in 0..p_min {
            if p >= j {
                partial += BigRational::from_integer(binomial(
                    BigInt::from(p),
                    BigInt::from(j),
                )) * y.pow(p as i32);
            }
        }
        full - partial
    };
    let inv_b = rat_u(1, base);
    let bm1 = |e: i32| rat_u(base - 1, 1).pow(e);
    if digit == 0 {
        &inv_b * bm1(1 - count as i32) * h(count, level - 1)
    } else {
        let mut t = rat_u(base - 2, 1) * bm1(-(count as i32)) * h(count, level - 1);
        if count > 0 {
            t += bm1(1 - count as i32) * h(count - 1, level - 1);
        }
        inv_b * t
    }
}

/// Rigorous brackets on I(b,d,k) for every k = 0..=max_count at once, from
/// direct enumeration of all integers below b^level (scaled-integer floor
/// sums) plus exact geometric tail brackets.
#[derive(Debug, Clone)]
pub struct Bracket {
    pub lower: BigRational,
    pub upper: BigRational,
}

const ENUMERATION_BUDGET: u64 = 200_000_000;
const ENUM_SCALE_POW: u32 = 30;

fn enumerate_chunk(
    base: u64,
    digit: u64,
    max_count: u32,
    scale: u128,
    lo: u64,
    hi: u64,
) -> Vec<(u128, u64)> {
    let kmax = max_count as usize;
    let mut acc = vec![(0u128, 0u64); kmax + 1];
    for n in lo..hi {
        let mut occurrences = 0usize;
        let mut v = n;
        while v > 0 {
            if v % base == digit {
                occurrences += 1;
                if occurrences > kmax {
                    break;
                }
            }
            v /= base;
        }
        if v == 0 && occurrences <= kmax {
            acc[occurrences].0 += scale / n as u128;
            acc[occurrences].1 += 1;
        }
    }
    acc
}

fn enumeration_limit(base: u64, level: u32) -> Result<u64> {
    if level == 0 {
        return Err(Error::InvalidSpec("enumeration level must be >= 1".into()));
    }
    let limit = (base as u128).pow(level);
    if limit > ENUMERATION_BUDGET as u128 {
        return Err(Error::Budget(format!(
            "enumerating {limit} integers exceeds the budget of {ENUMERATION_BUDGET}"
        )));
    }
    Ok(limit as u64)
}

fn brackets_from_totals(
    base: u64,
    digit: u64,
    level: u32,
    totals: &[(u128, u64)],
) -> Vec<Bracket> {
    let scale_big = pow10(ENUM_SCALE_POW);
    let mut out = Vec::with_capacity(totals.len());
    for (k, (floor_sum, count)) in totals.iter().enumerate() {
        let fs = BigRational::new(BigInt::from(*floor_sum), scale_big.clone());
        let cnt = BigRational::new(BigInt::from(*count), scale_big.clone());
        // the enumeration covers every integer with at most `level` digits,
        // so the geometric tail bracket starts one level higher
        let tail_low = tail_bracket_low(base, digit, k as u32, level + 1);
        let tail_high = &tail_low * rat_u(base, 1);
        out.push(Bracket { lower: &fs + &tail_low, upper: fs + cnt + tail_high });
    }
    out
}

/// Single-threaded enumeration, independent of the `parallel` feature.
/// Serves as the baseline the benchmark suite compares against.
pub fn brute_force_brackets_sequential(
    base: u64,
    digit: u64,
    max_count: u32,
    level: u32,
) -> Result<Vec<Bracket>> {
    let limit = enumeration_limit(base, level)?;
    let scale = pow10(ENUM_SCALE_POW).to_u128().unwrap();
    let totals = enumerate_chunk(base, digit, max_count, scale, 1, limit);
    Ok(brackets_from_totals(base, digit, level, &totals))
}

pub fn brute_force_brackets(
    base: u64,
    digit: u64,
    max_count: u32,
    level: u32,
) -> Result<Vec<Bracket>> {
    let limit = enumeration_limit(base, level)?;
    let scale = pow10(ENUM_SCALE_POW).to_u128().unwrap();

    let totals: Vec<(u128, u64)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            const CHUNK: u64 = 1 << 16;
            let chunks: u64 = limit.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|i| {
                    let lo = (i * CHUNK).max(1);
                    let hi = ((i + 1) * CHUNK).min(limit);
                    enumerate_chunk(base, digit, max_count, scale, lo, hi)
                })
                .reduce(
                    || vec![(0u128, 0u64); max_count as usize + 1],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            x.0 += y.0;
                            x.1 += y.1;
                        }
                        a
                    },
                )
        }
        #[cfg(not(feature = "parallel"))]
        {
            enumerate_chunk(base, digit, max_count, scale, 1, limit)
        }
    };

    Ok(brackets_from_totals(base, digit, level, &totals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn spec(b: u64, d: u64, k: u32) -> DigitSpec {
        DigitSpec::new(b, d, k).unwrap()
    }

    #[test]
    fn empty_sum_is_zero() {
        let r = irwin_sum(&spec(2, 1, 0), 30).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(r.method, "empty-sum");
    }

    #[test]
    fn kempner_base_ten() {
        // the no-nines sum, first decimals 22.92067661926415034816...
        let r = irwin_sum(&spec(10, 9, 0), 20).unwrap();
        assert_eq!(&r.value.to_decimal_string(12), "22.920676619264");
        // the no-zeros sum
        let r = irwin_sum(&spec(10, 0, 0), 20).unwrap();
        assert!((r.value.to_f64() - 23.103447909420542).abs() < 1e-12);
    }

    #[test]
    fn counts_match_enumeration() {
        assert_eq!(count_kdigit(10, 9, 1, 2), BigInt::from(17));
        for (b, d) in [(3u64, 1u64), (5, 0), (10, 7)] {
            for length in 1..=4u32 {
                for k in 0..=3u32 {
                    let mut n = 0u64;
                    let lo = (b as u64).pow(length - 1).max(1);
                    let hi = (b as u64).pow(length);
                    for v in lo..hi {
                        let mut occ = 0;
                        let mut x = v;
                        while x > 0 {
                            if x % b == d {
                                occ += 1;
                            }
                            x /= b;
                        }
                        if occ == k {
                            n += 1;
                        }
                    }
                    assert_eq!(
                        count_kdigit(b, d, k, length),
                        BigInt::from(n),
                        "b={b} d={d} k={k} len={length}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_brackets_match_direct_sums() {
        // tail starting at level 1 is the whole sum: compare the geometric
        // closed form against a direct partial sum plus monotone bound
        let (b, d, k) = (4u64, 2u64, 1u32);
        let low = tail_bracket_low(b, d, k, 1);
        let mut direct = BigRational::zero();
        for l in 1..=40u32 {
            direct += BigRational::new(count_kdigit(b, d, k, l), BigInt::from(b).pow(l));
        }
        assert!(low > direct.clone());
        // the remainder past level 40 is tiny: N(l,k) b^-l ~ l (3/4)^l here
        let slack = rat_u(1, 100);
        assert!(low < direct + slack);
    }

    #[test]
    fn brackets_contain_series_values() {
        for (b, d) in [(5u64, 2u64), (7, 0), (10, 9)] {
            let br = brute_force_brackets(b, d, 2, 7).unwrap();
            for k in 0..=2u32 {
                let v = irwin_sum(&spec(b, d, k), 15).unwrap().value.to_ratio();
                assert!(
                    br[k as usize].lower < v && v < br[k as usize].upper,
                    "b={b} d={d} k={k}: {} not in [{}, {}]",
                    v.to_f64().unwrap(),
                    br[k as usize].lower.to_f64().unwrap(),
                    br[k as usize].upper.to_f64().unwrap()
                );
            }
        }
    }

    #[test]
    fn sequential_enumeration_matches_default() {
        for (b, d) in [(6u64, 3u64), (10, 0)] {
            let a = brute_force_brackets(b, d, 2, 5).unwrap();
            let s = brute_force_brackets_sequential(b, d, 2, 5).unwrap();
            for k in 0..=2usize {
                assert_eq!(a[k].lower, s[k].lower, "b={b} d={d} k={k}");
                assert_eq!(a[k].upper, s[k].upper, "b={b} d={d} k={k}");
            }
        }
    }

    #[test]
    fn precision_scaling_consistency() {
        for (b, d, k) in [(10u64, 0u64, 0u32), (10, 0, 2), (10, 3, 0), (10, 3, 2), (7, 6, 1)] {
            let lo = irwin_sum(&spec(b, d, k), 20).unwrap().value;
            let hi = irwin_sum(&spec(b, d, k), 35).unwrap().value.rescale(20);
            let diff = lo.sub(&hi);
            assert!(
                diff.mant().abs() <= BigInt::from(4),
                "b={b} d={d} k={k} differs: {}",
                diff.to_decimal_string(20)
            );
        }
    }

    #[test]
    fn count_one_alternate_route() {
        // independent k=1 evaluation folding the inhomogeneous part into
        // closed logarithm terms
        let digits = 25u32;
        for (b, d) in [(10u64, 3u64), (7, 2)] {
            let s = spec(b, d, 1);
            let main = irwin_sum(&s, digits).unwrap().value;
            let plan = truncation_order(&s, digits).unwrap();
            let w = digits + guard_digits(b);
            let bb = BigInt::from(b);
            let moments = MomentTable::plain(&s, 1, plan.order).unwrap();
            let mut alt = Fixed::from_integer(b as i64, w).ln().mul_int(&bb);
            let t = rat_u(1, d * (b + 1));
            alt = alt.add(&Fixed::from_ratio(&t, w));
            let log1pt = Fixed::from_ratio(&(BigRational::one() + &t), w).ln();
            alt = alt.add(&Fixed::from_ratio(&t, w).sub(&log1pt).mul_int(&bb));
            let edge = BigInt::from(d * (b + 1));
            for m in 1..=plan.order {
                let mu = m as u32;
                let dw = moments.deviation(0, m) - moments.deviation(1, m);
                let mut term = tail_sum(b, d, mu, w)
                    .unwrap()
                    .value
                    .add(&finite_digit_sum(b, d, mu, w))
                    .mul_ratio(&dw);
                term = term.sub(&Fixed::from_ratio(
                    &(moments.deviation(0, m) * inv_pow(&edge, mu + 1)),
                    w,
                ));
                alt = if m % 2 == 1 { alt.add(&term) } else { alt.sub(&term) };
            }
            let diff = main.sub(&alt.rescale(digits));
            assert!(
                diff.mant().abs() <= BigInt::from(100),
                "b={b} d={d}: routes differ by {}",
                diff.to_decimal_string(digits)
            );
        }
    }

    #[test]
    fn capacity_and_budget_errors() {
        // base 2 cannot reach high precision within the order limit
        assert!(matches!(
            irwin_sum(&spec(2, 0, 0), 40),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            brute_force_brackets(10, 3, 1, 12),
            Err(Error::Budget(_))
        ));
    }
}
