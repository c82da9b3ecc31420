//! Self-verification suite: thirteen numbered checks that exercise the
//! whole stack against independently known reference values, exact
//! coefficient tables, enumeration brackets, and symbolic identities.
//! Each check returns a pass/fail report with the measured quantities,
//! and every tolerance is pinned here next to its reference value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::asymptotics::{absent_digit_zeta_parts, Expansion};
use crate::fixed::Fixed;
use crate::irwin::{brute_force_brackets, irwin_sum};
use crate::moments::{u_k1_closed_form, MomentTable};
use crate::series::{deviation_series, DeviationKind};
use crate::spec::DigitSpec;
use crate::specfun::s_m_series;

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub const CRITERION_COUNT: u32 = 13;

const NAMES: [&str; 13] = [
    "no-zeros sum, base 10",
    "no-zeros sum, base 1000",
    "no-nines sum, base 1000, high precision",
    "zero-digit expansion value at base 10",
    "absent-digit-one expansion coefficients",
    "zero-digit deviation tables",
    "single-occurrence normalized residuals",
    "higher-count deviation spot checks",
    "deviation-series coefficient suite",
    "finite-digit-sum expansion suite",
    "enumeration bracketing of all small cases",
    "moment table property suite",
    "zeta-factor specialization identity",
];

/// Name of the check with the given 1-based id.
pub fn criterion_name(id: u32) -> &'static str {
    NAMES[(id - 1) as usize]
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a plain decimal literal into an exact rational.
fn dec(s: &str) -> BigRational {
    let neg = s.starts_with('-');
    let body = s.trim_start_matches('-');
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{frac}");
    let num = BigInt::parse_bytes(digits.as_bytes(), 10).unwrap();
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(num, den);
    if neg {
        -r
    } else {
        r
    }
}

fn report(id: u32, passed: bool, detail: String) -> CriterionReport {
    CriterionReport { id, name: criterion_name(id), passed, detail }
}

/// |value - expected| <= tol, all exact rationals.
fn close(value: &BigRational, expected: &BigRational, tol: &BigRational) -> bool {
    (value - expected).abs() <= *tol
}

fn sum_matches(
    id: u32,
    base: u64,
    digit: u64,
    count: u32,
    digits: u32,
    expected: &str,
    tol_pow: i32,
) -> CriterionReport {
    let spec = match DigitSpec::new(base, digit, count) {
        Ok(s) => s,
        Err(e) => return report(id, false, format!("invalid spec: {e}")),
    };
    let r = match irwin_sum(&spec, digits) {
        Ok(r) => r,
        Err(e) => return report(id, false, format!("evaluation failed: {e}")),
    };
    let want = dec(expected);
    let tol = BigRational::new(BigInt::from(1), BigInt::from(10u32).pow(-tol_pow as u32));
    let got = r.value.to_ratio();
    let pass = close(&got, &want, &tol);
    report(
        id,
        pass,
        format!(
            "I({base},{digit},{count}) = {} vs {expected} (tol 1e{tol_pow})",
            r.value.to_decimal_string(digits.min(34))
        ),
    )
}

fn crit_1() -> CriterionReport {
    sum_matches(1, 10, 0, 0, 20, "23.103447909420542", -15)
}

fn crit_2() -> CriterionReport {
    sum_matches(2, 1000, 0, 0, 28, "6907.7561010479319268744907724", -21)
}

fn crit_3() -> CriterionReport {
    // the reference source labels this value with digit 1, but it is the
    // digit-9 sum: its leading term matches b log b - b log(1+1/9), and an
    // independent evaluation of the digit-1 sum gives 6214.609...
    sum_matches(3, 1000, 9, 0, 36, "6802.410165253090787463765128313543", -27)
}

fn crit_4() -> CriterionReport {
    // the reference value is itself rounded at its 15th decimal (the true
    // expansion value is 23.10344761816819088), so the tolerance allows
    // half an ulp of that rounding
    let e = match Expansion::for_spec(0, 0) {
        Ok(e) => e,
        Err(e) => return report(4, false, format!("{e}")),
    };
    let v = match e.eval(10, 25) {
        Ok(v) => v,
        Err(e) => return report(4, false, format!("{e}")),
    };
    let want = dec("23.103447618168193");
    let tol = dec("0.000000000000005");
    let pass = close(&v.to_ratio(), &want, &tol);
    report(4, pass, format!("expansion(10) = {} vs 23.103447618168193", v.to_decimal_string(17)))
}

fn crit_5() -> CriterionReport {
    let refs = [
        "0.967401100272339654708622749969038",
        "-1.221466107372386665932722376860050",
        "-1.971188973855571436523608887939658",
        "0.066067527317549658236125718531700",
        "2.963203104060488388745299065364318",
    ];
    let e = match Expansion::for_spec(1, 0) {
        Ok(e) => e,
        Err(e) => return report(5, false, format!("{e}")),
    };
    let tol = BigRational::new(BigInt::from(1), BigInt::from(10u32).pow(30));
    let mut detail = String::new();
    let mut pass = true;
    for (i, s) in refs.iter().enumerate() {
        let v = match e.terms()[i].1.eval(40) {
            Ok(v) => v,
            Err(e) => return report(5, false, format!("{e}")),
        };
        let ok = close(&v.to_ratio(), &dec(s), &tol);
        pass &= ok;
        if !ok {
            detail.push_str(&format!("coefficient {} = {}; ", i + 1, v.to_decimal_string(33)));
        }
    }
    if pass {
        detail = "all five coefficients match to 1e-30 at 40-digit zeta values".into();
    }
    report(5, pass, detail)
}

fn crit_6() -> CriterionReport {
    let table10 = [-0.134, -0.497, -1.369, -2.446];
    let table1000 = [-0.00195, -0.00540, -0.01365, -0.02275];
    let mut pass = true;
    let mut detail = String::new();
    for k in 1..=4u32 {
        let e = match Expansion::for_spec(0, k) {
            Ok(e) => e,
            Err(e) => return report(6, false, format!("{e}")),
        };
        for (base, want, tol) in
            [(10u64, table10[k as usize - 1], 0.002), (1000, table1000[k as usize - 1], 0.0001)]
        {
            let v = match e.delta(base, 7) {
                Ok(v) => v.to_f64(),
                Err(e) => return report(6, false, format!("{e}")),
            };
            let ok = (v - want).abs() <= tol;
            pass &= ok;
            detail.push_str(&format!("k={k},b={base}: {v:.5} vs {want}; "));
        }
    }
    report(6, pass, detail)
}

fn crit_7() -> CriterionReport {
    let cases = [(100u64, 1u64, 0.9897), (10, 5, 1.2217)];
    let tol = 0.0005;
    let mut pass = true;
    let mut detail = String::new();
    for (b, d, want) in cases {
        let spec = DigitSpec::new(b, d, 1).unwrap();
        let digits = 20;
        let value = match irwin_sum(&spec, digits) {
            Ok(r) => r.value,
            Err(e) => return report(7, false, format!("{e}")),
        };
        let b_ln_b = Fixed::from_integer(b as i64, digits).ln().mul_int(&BigInt::from(b));
        let scaled = value
            .sub(&b_ln_b)
            .mul_ratio(&(rat((b * d * d) as i64, 1) / (rat(d as i64, 1) + rat(1, 2))));
        let v = scaled.to_f64();
        let ok = (v - want).abs() <= tol;
        pass &= ok;
        detail.push_str(&format!("(b={b},d={d}): {v:.4} vs {want}; "));
    }
    report(7, pass, detail)
}

fn crit_8() -> CriterionReport {
    let cases = [
        (1u64, 2u32, 41.60, 0.02),
        (9, 3, 1678.58, 0.05),
        (9, 5, 1378.91, 0.05),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (d, k, want, tol) in cases {
        let e = match Expansion::for_spec(d, k) {
            Ok(e) => e,
            Err(e) => return report(8, false, format!("{e}")),
        };
        let v = match e.delta(1000, 4) {
            Ok(v) => v.to_f64(),
            Err(e) => return report(8, false, format!("{e}")),
        };
        let ok = (v - want).abs() <= tol;
        pass &= ok;
        detail.push_str(&format!("(d={d},k={k}): {v:.3} vs {want}; "));
    }
    report(8, pass, detail)
}

fn crit_9() -> CriterionReport {
    let mut failures = Vec::new();
    let w = |d: u64, k: u32, m: usize, len: usize| {
        deviation_series(DeviationKind::Plain, d, k, m, len).unwrap()
    };
    let z = |d: u64, k: u32, m: usize, len: usize| {
        deviation_series(DeviationKind::Complementary, d, k, m, len).unwrap()
    };
    for d in [1i64, 2, 3, 9] {
        let dd = d as u64;
        let dh = rat(d, 1) + rat(1, 2);
        // w_{0;2} = (d^2+2d+5/6)c^2 + 0 c^3 - (d^2-1/3)c^4
        let s = w(dd, 0, 2, 5);
        if s.coeff(2) != &(rat(d * d + 2 * d, 1) + rat(5, 6))
            || !num_traits::Zero::is_zero(s.coeff(3))
            || s.coeff(4) != &(-(rat(d * d, 1) - rat(1, 3)))
        {
            failures.push(format!("w(0;2) d={d}"));
        }
        // w_{0;3} = (d+1/2)c^2 + (d+1/2)d(d+1)c^3
        let s = w(dd, 0, 3, 4);
        if s.coeff(2) != &dh || s.coeff(3) != &(&dh * rat(d * (d + 1), 1)) {
            failures.push(format!("w(0;3) d={d}"));
        }
        // w_{0;m} = (d+1/2)c^2 - (d+1/2)(m/2-1)c^3, m >= 4
        for m in 4..=6usize {
            let s = w(dd, 0, m, 4);
            if s.coeff(2) != &dh || s.coeff(3) != &(-&dh * (rat(m as i64, 2) - rat(1, 1))) {
                failures.push(format!("w(0;{m}) d={d}"));
            }
        }
        // w_{1;2} = 2(d+1/2)^2 c^4 + (3d^2+4d+4/3)c^5 + 0 c^6
        let s = w(dd, 1, 2, 7);
        if s.coeff(4) != &(&dh * &dh * rat(2, 1))
            || s.coeff(5) != &(rat(3 * d * d + 4 * d, 1) + rat(4, 3))
            || !num_traits::Zero::is_zero(s.coeff(6))
        {
            failures.push(format!("w(1;2) d={d}"));
        }
        // w_{2;2} third term (5d^2+6d+11/6)c^8
        let s = w(dd, 2, 2, 9);
        if s.coeff(8) != &(rat(5 * d * d + 6 * d, 1) + rat(11, 6)) {
            failures.push(format!("w(2;2) d={d}"));
        }
        // w_{j;2} = (2d+1)^2/2 c^(2j+2) (1 + (j+1)c + j(j+1)/2 c^2), j >= 3
        for j in 3..=4u32 {
            let lo = 2 * j as usize + 2;
            let s = w(dd, j, 2, lo + 3);
            let lead = rat((2 * d + 1) * (2 * d + 1), 2);
            if s.coeff(lo) != &lead
                || s.coeff(lo + 1) != &(&lead * rat(j as i64 + 1, 1))
                || s.coeff(lo + 2) != &(&lead * rat((j * (j + 1)) as i64, 2))
            {
                failures.push(format!("w({j};2) d={d}"));
            }
        }
        // w_{k;3} and w_{k;m>=4} second coefficients for k >= 1
        for k in 1..=3u32 {
            let lo = 2 * k as usize + 2;
            let s = w(dd, k, 3, lo + 2);
            if s.coeff(lo) != &dh
                || s.coeff(lo + 1) != &(&dh * (rat(3 * d * d, 1) + rat(2 * k as i64 - 1, 2)))
            {
                failures.push(format!("w({k};3) d={d}"));
            }
            for m in 4..=5usize {
                let s = w(dd, k, m, lo + 2);
                if s.coeff(lo) != &dh
                    || s.coeff(lo + 1) != &(-&dh * (rat(m as i64, 2) - rat(k as i64 + 1, 1)))
                {
                    failures.push(format!("w({k};{m}) d={d}"));
                }
            }
        }
        // complementary leading pairs:
        // z_{0;m}: alpha = (2d+1)m/2, beta = d+1/2 - (3d^2+3d+1)m(m-1)/6
        // z_{k;m}, k>=1: alpha = m(d+1/2), beta = (d+1/2)(1+mk-m(m-1)d)
        for m in 1..=4usize {
            let mi = m as i64;
            let s = z(dd, 0, m, 3);
            if s.coeff(1) != &(&dh * rat(mi, 1))
                || s.coeff(2) != &(&dh - rat((3 * d * d + 3 * d + 1) * mi * (mi - 1), 6))
            {
                failures.push(format!("z(0;{m}) d={d}"));
            }
            for k in 1..=2u32 {
                let lo = 2 * k as usize + 1;
                let s = z(dd, k, m, lo + 2);
                let beta = &dh * (rat(1 + mi * k as i64, 1) - rat(mi * (mi - 1) * d, 1));
                if s.coeff(lo) != &(&dh * rat(mi, 1)) || s.coeff(lo + 1) != &beta {
                    failures.push(format!("z({k};{m}) d={d}"));
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "all printed deviation-series coefficients match the exact engine".into()
    } else {
        failures.join(", ")
    };
    report(9, pass, detail)
}

fn crit_10() -> CriterionReport {
    let mut failures = Vec::new();
    for d in [1i64, 2, 9] {
        let dd = d as u64;
        let id = |p: u32| rat(1, d.pow(p));
        let id1 = |p: u32| rat(1, (d + 1).pow(p));
        let s1 = s_m_series(dd, 1, 4).unwrap();
        if s1.coeff(0) != &rat(1, d * (d + 1))
            || s1.coeff(1) != &(-(id(2) + id1(2)) / rat(2, 1))
            || s1.coeff(2) != &((id(3) - id1(3) + rat(12, 1) * id(2)) / rat(6, 1))
            || s1.coeff(3) != &(rat(-3, 1) * id(2))
        {
            failures.push(format!("s_1 d={d}"));
        }
        let s2 = s_m_series(dd, 2, 2).unwrap();
        if s2.coeff(0) != &((id(2) - id1(2)) / rat(2, 1))
            || s2.coeff(1) != &(-(id(3) + id1(3)) / rat(2, 1))
        {
            failures.push(format!("s_2 d={d}"));
        }
        let s3 = s_m_series(dd, 3, 1).unwrap();
        if s3.coeff(0) != &((id(3) - id1(3)) / rat(3, 1)) {
            failures.push(format!("s_3 d={d}"));
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "finite-digit-sum expansions match exactly for d in {1,2,9}".into()
    } else {
        failures.join(", ")
    };
    report(10, pass, detail)
}

fn crit_11() -> CriterionReport {
    let mut checked = 0u32;
    let mut failures = Vec::new();
    for b in 3..=10u64 {
        for d in 0..b {
            let brackets = match brute_force_brackets(b, d, 2, 7) {
                Ok(v) => v,
                Err(e) => return report(11, false, format!("enumeration failed: {e}")),
            };
            for k in 0..=2u32 {
                let spec = DigitSpec::new(b, d, k).unwrap();
                let v = match irwin_sum(&spec, 15) {
                    Ok(r) => r.value.to_ratio(),
                    Err(e) => return report(11, false, format!("{e}")),
                };
                let br = &brackets[k as usize];
                checked += 1;
                if !(br.lower < v && v < br.upper) {
                    failures.push(format!("(b={b},d={d},k={k})"));
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{checked} series values all inside their enumeration brackets")
    } else {
        failures.join(", ")
    };
    report(11, pass, detail)
}

fn crit_12() -> CriterionReport {
    let mut failures = Vec::new();
    let mut checked = 0u64;
    for b in 2..=50u64 {
        for d in 0..b {
            let spec = DigitSpec::new(b, d, 0).unwrap();
            let plain = match MomentTable::plain(&spec, 6, 8) {
                Ok(t) => t,
                Err(e) => return report(12, false, format!("{e}")),
            };
            let compl = match MomentTable::complementary(&spec, 6, 1) {
                Ok(t) => t,
                Err(e) => return report(12, false, format!("{e}")),
            };
            for k in 0..=6u32 {
                // closed form at m = 1 and the reflection identity
                let u1 = plain.value(k, 1);
                if u1 != &u_k1_closed_form(b, d, k) {
                    failures.push(format!("closed form (b={b},d={d},k={k})"));
                }
                if u1 + compl.value(k, 1) != rat(b as i64, 1) {
                    failures.push(format!("reflection (b={b},d={d},k={k})"));
                }
                for m in 0..=8usize {
                    checked += 1;
                    let u = plain.value(k, m);
                    // bounds 0 <= u_{k;m} <= b/(m+1)
                    if u.is_negative() || u > &rat(b as i64, m as i64 + 1) {
                        failures.push(format!("bounds (b={b},d={d},k={k},m={m})"));
                    }
                    // nondecreasing in k, nonincreasing in m
                    if k > 0 && u < plain.value(k - 1, m) {
                        failures.push(format!("k-monotonic (b={b},d={d},k={k},m={m})"));
                    }
                    if m > 0 && u > plain.value(k, m - 1) {
                        failures.push(format!("m-monotonic (b={b},d={d},k={k},m={m})"));
                    }
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{checked} moment entries satisfy bounds, monotonicity, closed forms")
    } else {
        failures.truncate(8);
        failures.join(", ")
    };
    report(12, pass, detail)
}

fn crit_13() -> CriterionReport {
    let zero = match Expansion::for_spec(0, 0) {
        Ok(e) => e,
        Err(e) => return report(13, false, format!("{e}")),
    };
    let specialized = absent_digit_zeta_parts(0);
    let mut pass = true;
    for (i, (_, coef)) in zero.terms().iter().enumerate() {
        if coef != &specialized[i] {
            pass = false;
        }
    }
    report(
        13,
        pass,
        "zeta factors of the absent-digit ladder at d=0 equal the zero-digit ladder".into(),
    )
}

/// Runs the check with the given 1-based id.
pub fn run_criterion(id: u32) -> CriterionReport {
    match id {
        1 => crit_1(),
        2 => crit_2(),
        3 => crit_3(),
        4 => crit_4(),
        5 => crit_5(),
        6 => crit_6(),
        7 => crit_7(),
        8 => crit_8(),
        9 => crit_9(),
        10 => crit_10(),
        11 => crit_11(),
        12 => crit_12(),
        13 => crit_13(),
        _ => report(id.max(1).min(CRITERION_COUNT), false, format!("unknown criterion {id}")),
    }
}

/// Runs every check in order.
pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERION_COUNT).map(run_criterion).collect()
}
