//! The problem triple (base, digit, occurrence count) and its derived data.

use crate::error::{Error, Result};

/// A digit-restriction problem: sum 1/m over positive integers whose base-b
/// representation contains exactly `count` occurrences of `digit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitSpec {
    base: u64,
    digit: u64,
    count: u32,
}

impl DigitSpec {
    /// Validates `b >= 2`, `0 <= d < b`. The count is unrestricted here;
    /// table builders enforce their own capacity limits.
    pub fn new(base: u64, digit: u64, count: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSpec(format!("base {base} must be >= 2")));
        }
        if digit >= base {
            return Err(Error::InvalidSpec(format!(
                "digit {digit} must satisfy 0 <= d < b = {base}"
            )));
        }
        Ok(DigitSpec { base, digit, count })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digit(&self) -> u64 {
        self.digit
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    /// The complement digit d' = b - 1 - d used by the complementary moments.
    pub fn digit_complement(&self) -> u64 {
        self.base - 1 - self.digit
    }

    /// d1 = d for d > 0, and b for d = 0 (the digamma-argument shift).
    pub fn digit_or_base(&self) -> u64 {
        if self.digit > 0 {
            self.digit
        } else {
            self.base
        }
    }

    pub fn with_count(&self, count: u32) -> Self {
        DigitSpec { count, ..*self }
    }

    /// The degenerate spec b=2, d=1, k=0: no positive integer avoids the
    /// binary digit 1, so the sum is empty and all higher moments vanish.
    pub fn is_empty_sum(&self) -> bool {
        self.base == 2 && self.digit == 1 && self.count == 0
    }
}

/// The four series regimes, each with its own convergent formula and
/// truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeId {
    D0K0,
    D0Kpos,
    DposK0,
    DposKpos,
}

impl RegimeId {
    pub fn of(spec: &DigitSpec) -> Self {
        match (spec.digit() == 0, spec.count() == 0) {
            (true, true) => RegimeId::D0K0,
            (true, false) => RegimeId::D0Kpos,
            (false, true) => RegimeId::DposK0,
            (false, false) => RegimeId::DposKpos,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegimeId::D0K0 => "d0k0-zeta-series",
            RegimeId::D0Kpos => "d0kpos-zeta-series",
            RegimeId::DposK0 => "dposk0-digamma-split",
            RegimeId::DposKpos => "dposkpos-geometric-series",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_triples() {
        assert!(DigitSpec::new(1, 0, 0).is_err());
        assert!(DigitSpec::new(10, 10, 0).is_err());
        assert!(DigitSpec::new(10, 11, 3).is_err());
        assert!(DigitSpec::new(2, 1, 0).is_ok());
    }

    #[test]
    fn derived_digits() {
        let s = DigitSpec::new(10, 3, 2).unwrap();
        assert_eq!(s.digit_complement(), 6);
        assert_eq!(s.digit_or_base(), 3);
        let z = DigitSpec::new(10, 0, 0).unwrap();
        assert_eq!(z.digit_complement(), 9);
        assert_eq!(z.digit_or_base(), 10);
    }

    #[test]
    fn regime_dispatch() {
        let r = |b, d, k| RegimeId::of(&DigitSpec::new(b, d, k).unwrap());
        assert_eq!(r(10, 0, 0), RegimeId::D0K0);
        assert_eq!(r(10, 0, 2), RegimeId::D0Kpos);
        assert_eq!(r(10, 9, 0), RegimeId::DposK0);
        assert_eq!(r(10, 9, 1), RegimeId::DposKpos);
    }
}
