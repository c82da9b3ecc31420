//! Truncated formal power series over exact rationals, and the series form
//! of the moment deviations in the small parameter c = 1/b.
//!
//! A [`SeriesQ`] keeps coefficients of c^0 .. c^(n-1) for a fixed
//! truncation length n shared by every series in a computation, mirroring
//! how [`crate::fixed::Fixed`] shares one scale.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::moments::{MAX_COUNT, MAX_ORDER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesQ {
    coeffs: Vec<BigRational>,
}

fn rz() -> BigRational {
    BigRational::zero()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl SeriesQ {
    pub fn zero(len: usize) -> Self {
        SeriesQ { coeffs: vec![rz(); len] }
    }

    pub fn one(len: usize) -> Self {
        let mut s = Self::zero(len);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// Builds from explicit low-order coefficients, zero-padding to `len`.
    pub fn from_coeffs(coeffs: Vec<BigRational>, len: usize) -> Self {
        let mut c = coeffs;
        assert!(c.len() <= len, "more coefficients than the truncation length");
        c.resize(len, rz());
        SeriesQ { coeffs: c }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.len(), other.len(), "mixed series truncation lengths");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        SeriesQ {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        SeriesQ {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        SeriesQ { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let n = self.len();
        let mut out = vec![rz(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        SeriesQ { coeffs: out }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        SeriesQ { coeffs: self.coeffs.iter().map(|a| a * r).collect() }
    }

    /// Multiplies by c^s, dropping the coefficients pushed past the
    /// truncation length.
    pub fn shift(&self, s: usize) -> Self {
        let n = self.len();
        let mut out = vec![rz(); n];
        for i in 0..n.saturating_sub(s) {
            out[i + s] = self.coeffs[i].clone();
        }
        SeriesQ { coeffs: out }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let a0 = &self.coeffs[0];
        assert!(!a0.is_zero(), "series reciprocal needs a unit constant term");
        let n = self.len();
        let inv0 = a0.recip();
        let mut out = vec![rz(); n];
        out[0] = inv0.clone();
        for i in 1..n {
            let mut acc = rz();
            for j in 1..=i {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out[i - j];
                }
            }
            out[i] = -acc * &inv0;
        }
        SeriesQ { coeffs: out }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = SeriesQ::one(self.len());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact evaluation of the truncated polynomial at a rational point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = rz();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Bernoulli numbers B_0..=B_n (B_1 = -1/2), by the defining recurrence.
/// The computed prefix is cached process-wide since callers ask repeatedly.
pub fn bernoulli(n: usize) -> Vec<BigRational> {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut b = cache.lock().unwrap();
    for m in b.len()..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        let mut acc = rz();
        for (j, bj) in b.iter().enumerate() {
            let coef = binomial(BigInt::from(m as u64 + 1), BigInt::from(j as u64));
            acc += BigRational::from_integer(coef) * bj;
        }
        let next = -acc / BigRational::from_integer(BigInt::from(m as u64 + 1));
        b.push(next);
    }
    b[..=n].to_vec()
}

/// The polynomial (1 + t c)^j truncated to `len` coefficients.
fn binomial_poly(t: &BigRational, j: usize, len: usize) -> SeriesQ {
    let mut coeffs = Vec::with_capacity((j + 1).min(len));
    let mut p = BigRational::one();
    for i in 0..=j.min(len - 1) {
        let coef = binomial(BigInt::from(j as u64), BigInt::from(i as u64));
        coeffs.push(BigRational::from_integer(coef) * &p);
        p *= t;
    }
    SeriesQ::from_coeffs(coeffs, len)
}

/// The polynomial c^(j+1) * (sum of a^j over digits a != d), as a series:
/// sum_p C(j,p) B_p c^p / (j+1-p) minus d^j c^(j+1).
pub fn gamma_poly(digit: u64, j: usize, len: usize) -> SeriesQ {
    let bern = bernoulli(j);
    let mut coeffs = Vec::with_capacity(j + 2);
    for p in 0..=j {
        let coef = binomial(BigInt::from(j as u64), BigInt::from(p as u64));
        coeffs.push(
            BigRational::from_integer(coef) * &bern[p]
                / BigRational::from_integer(BigInt::from((j + 1 - p) as u64)),
        );
    }
    coeffs.push(-BigRational::from_integer(BigInt::from(digit).pow(j as u32)));
    coeffs.truncate(len);
    SeriesQ::from_coeffs(coeffs, len)
}

/// Same power sum but excluding the reflected digit b-1-d:
/// sum_p C(j,p) B_p c^p / (j+1-p) minus c (1-(d+1)c)^j.
pub fn gamma_poly_reflected(digit: u64, j: usize, len: usize) -> SeriesQ {
    let bern = bernoulli(j);
    let mut coeffs = Vec::with_capacity(j + 1);
    for p in 0..=j {
        let coef = binomial(BigInt::from(j as u64), BigInt::from(p as u64));
        coeffs.push(
            BigRational::from_integer(coef) * &bern[p]
                / BigRational::from_integer(BigInt::from((j + 1 - p) as u64)),
        );
    }
    coeffs.truncate(len);
    let head = SeriesQ::from_coeffs(coeffs, len);
    let tail = binomial_poly(&-rat(digit as i64 + 1, 1), j, len).shift(1);
    head.sub(&tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationKind {
    /// w_{k;m} = b/(m+1) - u_{k;m}, series in c = 1/b.
    Plain,
    /// z_{k;m} = v_{k;m} - b/(m+1), series in c = 1/b.
    Complementary,
}

/// Table of deviation series for k = 0..=max_count, m = 0..=max_order,
/// each truncated to `len` coefficients in c.
#[derive(Debug)]
pub struct DeviationSeriesTable {
    kind: DeviationKind,
    rows: Vec<Vec<SeriesQ>>,
}

impl DeviationSeriesTable {
    pub fn build(
        kind: DeviationKind,
        digit: u64,
        max_count: u32,
        max_order: usize,
        len: usize,
    ) -> Result<Self> {
        if max_order > MAX_ORDER {
            return Err(Error::Capacity(format!(
                "series order {max_order} exceeds limit {MAX_ORDER}"
            )));
        }
        if max_count > MAX_COUNT {
            return Err(Error::Capacity(format!(
                "occurrence count {max_count} exceeds limit {MAX_COUNT}"
            )));
        }
        let d = digit;
        // gamma polynomials for j = 1..max_order-1 (j = 0 never appears:
        // the j = m term of the first sum multiplies the zero series at m' = 0)
        let gpolys: Vec<SeriesQ> = (0..max_order.max(1))
            .map(|j| match kind {
                DeviationKind::Plain => gamma_poly(d, j, len),
                DeviationKind::Complementary => gamma_poly_reflected(d, j, len),
            })
            .collect();
        let mut rows: Vec<Vec<SeriesQ>> = Vec::with_capacity(max_count as usize + 1);
        for k in 0..=max_count {
            let mut row: Vec<SeriesQ> = Vec::with_capacity(max_order + 1);
            row.push(SeriesQ::zero(len));
            for m in 1..=max_order {
                // lhs divisor 1 - c^m + c^(m+1)
                let mut lhs = SeriesQ::one(len);
                if m < len {
                    lhs.coeffs[m] = -BigRational::one();
                }
                if m + 1 < len {
                    lhs.coeffs[m + 1] = BigRational::one();
                }
                let mut rhs = SeriesQ::zero(len);
                for j in 1..m {
                    let coef = BigRational::from_integer(binomial(
                        BigInt::from(m as u64),
                        BigInt::from(j as u64),
                    ));
                    rhs = rhs.add(&gpolys[j].mul(&row[m - j]).shift(m - j).scale(&coef));
                }
                if k >= 1 {
                    let prev = &rows[k as usize - 1];
                    for j in 0..m {
                        let coef = BigRational::from_integer(binomial(
                            BigInt::from(m as u64),
                            BigInt::from(j as u64),
                        ));
                        let term = match kind {
                            // c^(m+1) d^j  w_{k-1;m-j}
                            DeviationKind::Plain => prev[m - j]
                                .shift(m + 1)
                                .scale(&(coef * rat(d as i64, 1).pow(j as i32))),
                            // c^(m+1-j) (1-(d+1)c)^j  z_{k-1;m-j}
                            DeviationKind::Complementary => prev[m - j]
                                .mul(&binomial_poly(&-rat(d as i64 + 1, 1), j, len))
                                .shift(m + 1 - j)
                                .scale(&coef),
                        };
                        rhs = rhs.add(&term);
                    }
                } else {
                    let inho = match kind {
                        // ((d+1)^(m+1) - d^(m+1)) c^m / (m+1)
                        DeviationKind::Plain => {
                            let v = (rat(d as i64 + 1, 1).pow(m as i32 + 1)
                                - rat(d as i64, 1).pow(m as i32 + 1))
                                / rat(m as i64 + 1, 1);
                            SeriesQ::from_coeffs(vec![v], len).shift(m)
                        }
                        // ((m+1)c - (1-dc)^(m+1) + (1-(d+1)c)^(m+1)) / ((m+1)c)
                        DeviationKind::Complementary => {
                            let mut num = binomial_poly(&-rat(d as i64 + 1, 1), m + 1, len + 1)
                                .sub(&binomial_poly(&-rat(d as i64, 1), m + 1, len + 1));
                            num.coeffs[1] += rat(m as i64 + 1, 1);
                            debug_assert!(num.coeffs[0].is_zero());
                            num.coeffs.remove(0);
                            num.scale(&rat(1, m as i64 + 1))
                        }
                    };
                    rhs = rhs.add(&inho);
                }
                row.push(rhs.div(&lhs));
            }
            rows.push(row);
        }
        Ok(DeviationSeriesTable { kind, rows })
    }

    pub fn kind(&self) -> DeviationKind {
        self.kind
    }

    pub fn series(&self, k: u32, m: usize) -> &SeriesQ {
        &self.rows[k as usize][m]
    }
}

/// Convenience accessor for a single deviation series.
pub fn deviation_series(
    kind: DeviationKind,
    digit: u64,
    count: u32,
    order: usize,
    len: usize,
) -> Result<SeriesQ> {
    let t = DeviationSeriesTable::build(kind, digit, count, order, len)?;
    Ok(t.series(count, order).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentTable;
    use crate::spec::DigitSpec;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(8);
        assert_eq!(b[0], r(1, 1));
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[3], r(0, 1));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[6], r(1, 42));
        assert_eq!(b[8], r(-1, 30));
    }

    #[test]
    fn gamma_polys_low_degree() {
        let d = 7u64;
        let g0 = gamma_poly(d, 0, 4);
        assert_eq!(g0.coeffs(), &[r(1, 1), r(-1, 1), r(0, 1), r(0, 1)]);
        let g1 = gamma_poly(d, 1, 4);
        assert_eq!(g1.coeffs(), &[r(1, 2), r(-1, 2), r(-7, 1), r(0, 1)]);
        let g1p = gamma_poly_reflected(d, 1, 4);
        assert_eq!(g1p.coeffs(), &[r(1, 2), r(-3, 2), r(8, 1), r(0, 1)]);
    }

    #[test]
    fn gamma_polys_match_power_sums() {
        // c^(j+1) gamma_j evaluated at c = 1/b must equal gamma_j / b^(j+1)
        for b in [3u64, 7, 10] {
            let c = BigRational::new(BigInt::one(), BigInt::from(b));
            for d in [0u64, 1, b - 1] {
                let dr = b - 1 - d;
                for j in 0..6usize {
                    let exact = BigRational::new(
                        crate::moments::gamma_sum(b, d, j as u32),
                        BigInt::from(b).pow(j as u32 + 1),
                    );
                    assert_eq!(gamma_poly(d, j, 10).eval(&c), exact, "b={b} d={d} j={j}");
                    let exact_r = BigRational::new(
                        crate::moments::gamma_sum(b, dr, j as u32),
                        BigInt::from(b).pow(j as u32 + 1),
                    );
                    assert_eq!(
                        gamma_poly_reflected(d, j, 10).eval(&c),
                        exact_r,
                        "reflected b={b} d={d} j={j}"
                    );
                }
            }
        }
    }

    fn w(d: u64, k: u32, m: usize, len: usize) -> SeriesQ {
        deviation_series(DeviationKind::Plain, d, k, m, len).unwrap()
    }

    fn z(d: u64, k: u32, m: usize, len: usize) -> SeriesQ {
        deviation_series(DeviationKind::Complementary, d, k, m, len).unwrap()
    }

    #[test]
    fn first_order_deviation_closed_form() {
        // w_{k;1} = z_{k;1} = (d+1/2) c^(2k+1) / (1-c+c^2)^(k+1)
        for d in [0u64, 3, 9] {
            for k in 0..4u32 {
                let len = 2 * k as usize + 6;
                let denom = SeriesQ::from_coeffs(vec![r(1, 1), r(-1, 1), r(1, 1)], len)
                    .pow(k + 1);
                let expect = SeriesQ::one(len)
                    .div(&denom)
                    .shift(2 * k as usize + 1)
                    .scale(&(r(d as i64, 1) + r(1, 2)));
                assert_eq!(w(d, k, 1, len), expect, "w d={d} k={k}");
                assert_eq!(z(d, k, 1, len), expect, "z d={d} k={k}");
            }
        }
    }

    #[test]
    fn low_order_w_coefficients() {
        for d in [0i64, 2, 9] {
            let dd = d as u64;
            let dh = r(d, 1) + r(1, 2);
            // w_{0;2} = (d^2+2d+5/6)c^2 + 0 c^3
            let s = w(dd, 0, 2, 4);
            assert_eq!(s.coeff(2), &(r(d * d + 2 * d, 1) + r(5, 6)));
            assert!(s.coeff(3).is_zero());
            // w_{0;3} = (d+1/2)c^2 + (d+1/2)d(d+1)c^3
            let s = w(dd, 0, 3, 4);
            assert_eq!(s.coeff(2), &dh);
            assert_eq!(s.coeff(3), &(&dh * r(d * (d + 1), 1)));
            // w_{0;m} = (d+1/2)c^2 - (d+1/2)(m/2-1)c^3 for m >= 4
            for m in 4..=7usize {
                let s = w(dd, 0, m, 4);
                assert_eq!(s.coeff(2), &dh, "m={m}");
                assert_eq!(s.coeff(3), &(-&dh * (r(m as i64, 2) - r(1, 1))), "m={m}");
            }
            // w_{1;2} = 2(d+1/2)^2 c^4 + (3d^2+4d+4/3)c^5
            let s = w(dd, 1, 2, 6);
            assert!(s.coeff(2).is_zero() && s.coeff(3).is_zero());
            assert_eq!(s.coeff(4), &(&dh * &dh * r(2, 1)));
            assert_eq!(s.coeff(5), &(r(3 * d * d + 4 * d, 1) + r(4, 3)));
        }
    }

    #[test]
    fn higher_count_w_coefficients() {
        for d in [0i64, 2, 9] {
            let dd = d as u64;
            let dh = r(d, 1) + r(1, 2);
            for k in 2..4u32 {
                let lo = 2 * k as usize + 2;
                let len = lo + 2;
                // w_{k;2} = 2(d+1/2)^2 c^(2k+2) + (2k+2)(d+1/2)^2 c^(2k+3)
                let s = w(dd, k, 2, len);
                assert_eq!(s.valuation(), Some(lo));
                assert_eq!(s.coeff(lo), &(&dh * &dh * r(2, 1)));
                assert_eq!(s.coeff(lo + 1), &(&dh * &dh * r(2 * k as i64 + 2, 1)));
                // w_{k;3} = (d+1/2)c^(2k+2) + (d+1/2)(3d^2+(2k-1)/2)c^(2k+3)
                let s = w(dd, k, 3, len);
                assert_eq!(s.coeff(lo), &dh);
                assert_eq!(
                    s.coeff(lo + 1),
                    &(&dh * (r(3 * d * d, 1) + r(2 * k as i64 - 1, 2)))
                );
                // w_{k;m} = (d+1/2)c^(2k+2) - (d+1/2)(m/2-k-1)c^(2k+3), m >= 4
                for m in 4..=6usize {
                    let s = w(dd, k, m, len);
                    assert_eq!(s.coeff(lo), &dh, "k={k} m={m}");
                    assert_eq!(
                        s.coeff(lo + 1),
                        &(-&dh * (r(m as i64, 2) - r(k as i64 + 1, 1))),
                        "k={k} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn z_leading_coefficients() {
        for d in [0i64, 2, 9] {
            let dd = d as u64;
            let dh = r(d, 1) + r(1, 2);
            for m in 1..=5usize {
                let mi = m as i64;
                // z_{0;m} = (2d+1)m/2 c + (d+1/2 - (3d^2+3d+1)m(m-1)/6) c^2
                let s = z(dd, 0, m, 4);
                assert_eq!(s.coeff(0), &r(0, 1));
                assert_eq!(s.coeff(1), &(&dh * r(mi, 1)), "m={m}");
                let beta = &dh - r((3 * d * d + 3 * d + 1) * mi * (mi - 1), 6);
                assert_eq!(s.coeff(2), &beta, "m={m}");
                // z_{k;m} = m(d+1/2) c^(2k+1)
                //           + (d+1/2)(1 + mk - m(m-1)d) c^(2k+2),  k >= 1
                for k in 1..3u32 {
                    let lo = 2 * k as usize + 1;
                    let s = z(dd, k, m, lo + 2);
                    assert_eq!(s.valuation(), Some(lo), "k={k} m={m}");
                    assert_eq!(s.coeff(lo), &(&dh * r(mi, 1)), "k={k} m={m}");
                    let beta = &dh * (r(1, 1) + r(mi * k as i64, 1) - r(mi * (mi - 1) * d, 1));
                    assert_eq!(s.coeff(lo + 1), &beta, "k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn series_converges_to_exact_deviation() {
        // Evaluating the truncated series at c = 1/b approaches the exact
        // rational deviation; the defect shrinks by ~1/b per extra term.
        let b = 50u64;
        let c = BigRational::new(BigInt::one(), BigInt::from(b));
        for (d, k, m) in [(3u64, 0u32, 2usize), (3, 1, 3), (0, 2, 2), (9, 1, 4)] {
            let s = DigitSpec::new(b, d, k).unwrap();
            let exact_u = MomentTable::plain(&s, k, m).unwrap().deviation(k, m);
            let exact_v = MomentTable::complementary(&s, k, m).unwrap().deviation(k, m);
            for len in [8usize, 12] {
                // coefficients grow with d and the order, so leave several
                // powers of c of headroom in the bound
                let cw = c.pow(len as i32 - 4);
                let dw = (w(d, k, m, len).eval(&c) - &exact_u).abs();
                assert!(dw < cw, "w defect too large d={d} k={k} m={m} len={len}");
                let dz = (z(d, k, m, len).eval(&c) - &exact_v).abs();
                assert!(dz < cw, "z defect too large d={d} k={k} m={m} len={len}");
            }
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(
            a in prop::collection::vec(-20i64..20, 6),
            b in prop::collection::vec(-20i64..20, 6),
            cc in prop::collection::vec(-20i64..20, 6),
        ) {
            let mk = |v: &[i64]| SeriesQ::from_coeffs(
                v.iter().map(|&x| r(x, 1)).collect(), 6);
            let (a, b, c) = (mk(&a), mk(&b), mk(&cc));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&a.neg()), SeriesQ::zero(6));
        }

        #[test]
        fn recip_is_inverse(mut v in prop::collection::vec(-9i64..9, 5), c0 in 1i64..9) {
            v[0] = c0; // unit constant term
            let s = SeriesQ::from_coeffs(v.iter().map(|&x| r(x, 1)).collect(), 5);
            prop_assert_eq!(s.mul(&s.recip()), SeriesQ::one(5));
        }
    }
}

