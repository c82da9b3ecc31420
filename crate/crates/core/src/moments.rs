//! Exact rational moment tables.
//!
//! For the measure attached to a (base, digit, count) triple we compute the
//! moments u_{k;m} = ∫ x^m dμ_k and the complementary moments
//! v_{k;m} = ∫ (1-x)^m dμ_k over [0,1), as exact `BigRational` values via
//! the linear recurrences in (k, m).  The deviations
//! w_{k;m} = b/(m+1) - u_{k;m} and z_{k;m} = v_{k;m} - b/(m+1) are the
//! quantities that actually enter the series evaluations; they are tiny for
//! large bases, which is why everything here stays exact.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::spec::DigitSpec;

/// Largest moment order m the tables will build.  The series evaluators
/// never need more than ~60 terms even at 50-digit targets for base 2.
pub const MAX_ORDER: usize = 64;

/// Largest occurrence count k the tables will build.
pub const MAX_COUNT: u32 = 16;

/// Power sum over the digits that are not excluded: Σ a^j for 0 <= a < b,
/// a != d, with the convention 0^0 = 1.
pub fn gamma_sum(base: u64, excluded: u64, j: u32) -> BigInt {
    let mut s = BigInt::zero();
    for a in 0..base {
        if a == excluded {
            continue;
        }
        if j == 0 {
            s += 1u32;
        } else {
            s += BigInt::from(a).pow(j);
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentKind {
    /// u_{k;m}: moments of x^m.
    Plain,
    /// v_{k;m}: moments of (1-x)^m.
    Complementary,
}

/// Table of moments for k = 0..=max_count, m = 0..=max_order.
#[derive(Debug, Clone)]
pub struct MomentTable {
    base: u64,
    kind: MomentKind,
    rows: Vec<Vec<BigRational>>,
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn ratio_int(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

impl MomentTable {
    pub fn plain(spec: &DigitSpec, max_count: u32, max_order: usize) -> Result<Self> {
        Self::build(spec, MomentKind::Plain, max_count, max_order)
    }

    pub fn complementary(spec: &DigitSpec, max_count: u32, max_order: usize) -> Result<Self> {
        Self::build(spec, MomentKind::Complementary, max_count, max_order)
    }

    fn build(
        spec: &DigitSpec,
        kind: MomentKind,
        max_count: u32,
        max_order: usize,
    ) -> Result<Self> {
        if max_order > MAX_ORDER {
            return Err(Error::Capacity(format!(
                "moment order {max_order} exceeds limit {MAX_ORDER}"
            )));
        }
        if max_count > MAX_COUNT {
            return Err(Error::Capacity(format!(
                "occurrence count {max_count} exceeds limit {MAX_COUNT}"
            )));
        }
        let b = spec.base();
        // Plain moments recurse on the excluded digit d itself; complementary
        // moments recurse on its reflection d' = b-1-d.
        let d = match kind {
            MomentKind::Plain => spec.digit(),
            MomentKind::Complementary => spec.digit_complement(),
        };
        let gammas: Vec<BigInt> = (0..=max_order as u32).map(|j| gamma_sum(b, d, j)).collect();
        let d_pows: Vec<BigInt> = {
            let mut p = vec![BigInt::one()];
            for _ in 0..max_order {
                p.push(p.last().unwrap() * big(d));
            }
            p
        };

        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(max_count as usize + 1);
        for k in 0..=max_count {
            let mut row: Vec<BigRational> = Vec::with_capacity(max_order + 1);
            row.push(ratio_int(big(b)));
            for m in 1..=max_order {
                // lhs factor b^(m+1) - b + 1
                let lhs = big(b).pow(m as u32 + 1) - big(b) + 1;
                let mut rhs = BigRational::zero();
                for j in 1..=m {
                    let coef = binomial(big(m as u64), big(j as u64)) * &gammas[j];
                    rhs += ratio_int(coef) * &row[m - j];
                }
                if k >= 1 {
                    let prev = &rows[k as usize - 1];
                    for j in 0..=m {
                        let coef = binomial(big(m as u64), big(j as u64)) * &d_pows[j];
                        rhs += ratio_int(coef) * &prev[m - j];
                    }
                } else if kind == MomentKind::Complementary {
                    rhs += ratio_int(big(b).pow(m as u32 + 1));
                }
                row.push(rhs / ratio_int(lhs));
            }
            rows.push(row);
        }
        Ok(MomentTable { base: b, kind, rows })
    }

    pub fn kind(&self) -> MomentKind {
        self.kind
    }

    pub fn max_count(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    pub fn max_order(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// u_{k;m} (plain) or v_{k;m} (complementary).
    pub fn value(&self, k: u32, m: usize) -> &BigRational {
        &self.rows[k as usize][m]
    }

    /// The deviation from the flat-measure moment b/(m+1), signed so that it
    /// is nonnegative in both kinds: w_{k;m} = b/(m+1) - u_{k;m} for plain,
    /// z_{k;m} = v_{k;m} - b/(m+1) for complementary.
    pub fn deviation(&self, k: u32, m: usize) -> BigRational {
        let flat = BigRational::new(big(self.base), big(m as u64 + 1));
        match self.kind {
            MomentKind::Plain => flat - self.value(k, m),
            MomentKind::Complementary => self.value(k, m) - flat,
        }
    }
}

/// Closed form u_{k;1} = b/2 - b(2d+1) / (2 (b^2-b+1)^(k+1)).
pub fn u_k1_closed_form(base: u64, digit: u64, count: u32) -> BigRational {
    let b = big(base);
    let q = (&b * &b - &b + 1u32).pow(count + 1);
    BigRational::new(b.clone(), big(2)) - BigRational::new(&b * (2 * digit + 1), 2 * q)
}

/// Closed form v_{k;1} = b/2 + b(2d+1) / (2 (b^2-b+1)^(k+1)), i.e. the
/// reflection u_{k;1} + v_{k;1} = b.
pub fn v_k1_closed_form(base: u64, digit: u64, count: u32) -> BigRational {
    ratio_int(big(base)) - u_k1_closed_form(base, digit, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn spec(b: u64, d: u64, k: u32) -> DigitSpec {
        DigitSpec::new(b, d, k).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_moments_base_ten_digit_nine() {
        let s = spec(10, 9, 0);
        let u = MomentTable::plain(&s, 0, 4).unwrap();
        assert_eq!(u.value(0, 0), &rat(10, 1));
        // 91 u_{0;1} = gamma_1 * u_{0;0} = 36 * 10
        assert_eq!(u.value(0, 1), &rat(360, 91));
        let v = MomentTable::complementary(&s, 0, 4).unwrap();
        // 91 v_{0;1} = 100 + gamma'_1 * v_{0;0} = 100 + 45*10
        assert_eq!(v.value(0, 1), &rat(550, 91));
    }

    #[test]
    fn closed_forms_match_recurrence() {
        for (b, d) in [(10u64, 9u64), (10, 0), (10, 3), (3, 1), (2, 0), (7, 6)] {
            let s = spec(b, d, 0);
            let u = MomentTable::plain(&s, 5, 1).unwrap();
            let v = MomentTable::complementary(&s, 5, 1).unwrap();
            for k in 0..=5u32 {
                assert_eq!(u.value(k, 1), &u_k1_closed_form(b, d, k), "u b={b} d={d} k={k}");
                assert_eq!(v.value(k, 1), &v_k1_closed_form(b, d, k), "v b={b} d={d} k={k}");
            }
        }
    }

    #[test]
    fn closed_form_spot_value() {
        // u_{2;1} at b=10, d=0: 5 - 5/91^3
        let expect = rat(5, 1) - rat(5, 91 * 91 * 91);
        assert_eq!(u_k1_closed_form(10, 0, 2), expect);
    }

    #[test]
    fn monotonicity_and_bounds() {
        let s = spec(10, 3, 0);
        let u = MomentTable::plain(&s, 4, 8).unwrap();
        for k in 0..=4u32 {
            for m in 1..=8usize {
                // decreasing in m, below the flat moment b/(m+1)
                assert!(u.value(k, m) < u.value(k, m - 1));
                assert!(u.value(k, m) < &BigRational::new(BigInt::from(10), BigInt::from(m as u64 + 1)));
                // strictly increasing in k
                if k > 0 {
                    assert!(u.value(k, m) > u.value(k - 1, m));
                }
                assert!(u.deviation(k, m).is_positive());
            }
        }
        let v = MomentTable::complementary(&s, 4, 8).unwrap();
        for k in 0..=4u32 {
            for m in 1..=8usize {
                assert!(v.deviation(k, m).is_positive());
            }
        }
    }

    #[test]
    fn degenerate_binary_no_ones() {
        let s = spec(2, 1, 0);
        let u = MomentTable::plain(&s, 1, 6).unwrap();
        assert_eq!(u.value(0, 0), &rat(2, 1));
        for m in 1..=6 {
            assert!(u.value(0, m).is_zero(), "u_(0;{m}) should vanish");
        }
        // k=1 moments (exactly one binary digit 1) are not degenerate
        assert!(!u.value(1, 1).is_zero());
    }

    #[test]
    fn reflection_identity_first_order() {
        // u_{k;1} + v_{k;1} = b for every k since x + (1-x) = 1
        for (b, d) in [(10u64, 5u64), (4, 2), (16, 15)] {
            let s = spec(b, d, 0);
            let u = MomentTable::plain(&s, 3, 1).unwrap();
            let v = MomentTable::complementary(&s, 3, 1).unwrap();
            for k in 0..=3u32 {
                assert_eq!(u.value(k, 1) + v.value(k, 1), rat(b as i64, 1));
            }
        }
    }

    #[test]
    fn capacity_limits() {
        let s = spec(10, 3, 0);
        assert!(MomentTable::plain(&s, 0, MAX_ORDER + 1).is_err());
        assert!(MomentTable::plain(&s, MAX_COUNT + 1, 2).is_err());
    }
}
