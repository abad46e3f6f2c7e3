//! Leading-order asymptotics `coef * r^power * (ln r)^logpower * base^r`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Exponents closer than this are treated as equal.
pub const POWER_TOL: f64 = 1e-9;
/// Bases with `|ln base|` below this are treated as 1.
pub const BASE_TOL: f64 = 1e-12;

/// Dominant term of a sequence as `r -> infinity`.
///
/// A zero coefficient marks a sequence that is eventually zero. `logpower`
/// may be negative after taking reciprocals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    pub coef: f64,
    pub power: f64,
    pub logpower: i32,
    pub base: f64,
}

fn same_power(a: f64, b: f64) -> bool {
    (a - b).abs() <= POWER_TOL
}

impl AsymptoticTerm {
    pub fn new(coef: f64, power: f64, logpower: i32, base: f64) -> Self {
        Self {
            coef,
            power,
            logpower,
            base,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0, 1.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coef == 0.0
    }

    fn base_cmp_one(&self) -> Ordering {
        let l = self.base.ln();
        if l.abs() <= BASE_TOL {
            Ordering::Equal
        } else if l > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    /// Growth comparison ignoring coefficients.
    pub fn cmp_growth(&self, other: &Self) -> Ordering {
        let lb = (self.base / other.base).ln();
        if lb.abs() > BASE_TOL {
            return if lb > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        if !same_power(self.power, other.power) {
            return if self.power > other.power {
                Ordering::Greater
            } else {
                Ordering::Less
            };
        }
        self.logpower.cmp(&other.logpower)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::new(
            self.coef * other.coef,
            self.power + other.power,
            self.logpower + other.logpower,
            self.base * other.base,
        )
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::new(1.0 / self.coef, -self.power, -self.logpower, 1.0 / self.base))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        Some(self.mul(&other.recip()?))
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zero();
        }
        Self {
            coef: self.coef * factor,
            ..*self
        }
    }

    /// Real power of a positive term; `None` if the log exponent stops being integral.
    pub fn powf(&self, e: f64) -> Option<Self> {
        if self.is_zero() {
            return (e > 0.0).then(Self::zero);
        }
        if self.coef < 0.0 && e.fract() != 0.0 {
            return None;
        }
        let lp = self.logpower as f64 * e;
        if (lp - lp.round()).abs() > 1e-12 {
            return None;
        }
        Some(Self::new(
            self.coef.powf(e),
            self.power * e,
            lp.round() as i32,
            self.base.powf(e),
        ))
    }

    /// Behaviour of `t(r + offset)`.
    pub fn shift(&self, offset: i64) -> Self {
        Self {
            coef: self.coef * self.base.powi(offset as i32),
            ..*self
        }
    }

    /// Leading term of a sum. `None` when leading coefficients cancel.
    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(*other);
        }
        if other.is_zero() {
            return Some(*self);
        }
        match self.cmp_growth(other) {
            Ordering::Greater => Some(*self),
            Ordering::Less => Some(*other),
            Ordering::Equal => {
                let c = self.coef + other.coef;
                if c.abs() <= 1e-12 * self.coef.abs().max(other.coef.abs()) {
                    None
                } else {
                    Some(Self { coef: c, ..*self })
                }
            }
        }
    }

    /// Leading term of the pointwise minimum of two positive sequences.
    pub fn min(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        match self.cmp_growth(other) {
            Ordering::Greater => *other,
            Ordering::Less => *self,
            Ordering::Equal => Self {
                coef: self.coef.min(other.coef),
                ..*self
            },
        }
    }

    /// Whether `sum_r t(r)` converges.
    pub fn summable(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        match self.base_cmp_one() {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                if same_power(self.power, -1.0) {
                    self.logpower < -1
                } else {
                    self.power < -1.0
                }
            }
        }
    }

    pub fn bounded(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        match self.base_cmp_one() {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                if same_power(self.power, 0.0) {
                    self.logpower <= 0
                } else {
                    self.power < 0.0
                }
            }
        }
    }

    pub fn tends_to_zero(&self) -> bool {
        self.is_zero()
            || (self.bounded()
                && !(self.base_cmp_one() == Ordering::Equal && same_power(self.power, 0.0) && self.logpower == 0))
    }

    /// Leading term of the partial sums of a divergent series.
    pub fn partial_sum(&self) -> Option<Self> {
        if self.summable() {
            return None;
        }
        match self.base_cmp_one() {
            Ordering::Greater => Some(Self {
                coef: self.coef * self.base / (self.base - 1.0),
                ..*self
            }),
            Ordering::Less => None,
            Ordering::Equal => {
                if same_power(self.power, -1.0) {
                    if self.logpower == -1 {
                        return None;
                    }
                    let l = self.logpower + 1;
                    Some(Self::new(self.coef / l as f64, 0.0, l, 1.0))
                } else {
                    let p = self.power + 1.0;
                    Some(Self::new(self.coef / p, p, self.logpower, 1.0))
                }
            }
        }
    }

    /// Leading term of `sum_{k >= r} t(k)` for a summable series.
    pub fn tail_sum(&self) -> Option<Self> {
        if !self.summable() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        match self.base_cmp_one() {
            Ordering::Less => Some(Self {
                coef: self.coef / (1.0 - self.base),
                ..*self
            }),
            Ordering::Greater => None,
            Ordering::Equal => {
                if same_power(self.power, -1.0) {
                    let l = self.logpower + 1;
                    Some(Self::new(self.coef / (-l) as f64, 0.0, l, 1.0))
                } else {
                    let p = self.power + 1.0;
                    Some(Self::new(self.coef / (-p), p, self.logpower, 1.0))
                }
            }
        }
    }

    /// Evaluate the leading term at index `r >= 2`.
    pub fn eval(&self, r: f64) -> f64 {
        self.coef * r.powf(self.power) * r.ln().powi(self.logpower) * self.base.powf(r)
    }

    /// Human-readable form such as `2 r^-1.5 (ln r)^2 3^r`.
    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = format!("{}", self.coef);
        if !same_power(self.power, 0.0) {
            s.push_str(&format!(" r^{}", self.power));
        }
        if self.logpower != 0 {
            s.push_str(&format!(" (ln r)^{}", self.logpower));
        }
        if self.base_cmp_one() != Ordering::Equal {
            s.push_str(&format!(" {}^r", self.base));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pow(c: f64, p: f64) -> AsymptoticTerm {
        AsymptoticTerm::new(c, p, 0, 1.0)
    }

    #[test]
    fn power_partial_sums() {
        assert_eq!(pow(1.0, 0.0).partial_sum().unwrap(), pow(1.0, 1.0));
        let log = pow(2.0, -1.0).partial_sum().unwrap();
        assert_eq!((log.power, log.logpower, log.coef), (0.0, 1, 2.0));
        assert!(pow(1.0, -2.0).partial_sum().is_none());
    }

    #[test]
    fn geometric_partial_sum_and_tail() {
        let g = AsymptoticTerm::new(1.0, 0.0, 0, 2.0);
        assert_eq!(g.partial_sum().unwrap().coef, 2.0);
        let h = AsymptoticTerm::new(1.0, 0.0, 0, 0.5);
        assert_eq!(h.tail_sum().unwrap().coef, 2.0);
    }

    #[test]
    fn summability_boundaries() {
        assert!(!pow(1.0, -1.0).summable());
        assert!(AsymptoticTerm::new(1.0, -1.0, -2, 1.0).summable());
        assert!(!AsymptoticTerm::new(1.0, -1.0, -1, 1.0).summable());
        assert!(pow(1.0, -1.0 - 1e-6).summable());
        assert!(!AsymptoticTerm::new(1.0, -50.0, 0, 1.0 + 1e-9).summable());
    }

    #[test]
    fn hamburger_term_for_unit_edges() {
        // (sum_{k<=r} 1)^2 * r^-alpha behaves like r^{2-alpha}
        let s = AsymptoticTerm::constant(1.0).partial_sum().unwrap();
        let t = s.powf(2.0).unwrap().mul(&pow(1.0, -3.0));
        assert!(same_power(t.power, -1.0));
        assert!(!t.summable());
        let t = s.powf(2.0).unwrap().mul(&pow(1.0, -3.5));
        assert!(t.summable());
    }

    #[test]
    fn cancelling_sum_is_unknown() {
        assert!(pow(1.0, 2.0).add(&pow(-1.0, 2.0)).is_none());
        assert_eq!(pow(1.0, 2.0).add(&pow(-5.0, 1.0)).unwrap(), pow(1.0, 2.0));
    }

    proptest! {
        #[test]
        fn partial_sum_matches_numeric_growth(p in -0.9f64..2.0) {
            // growth of the partial sums between n and 2n matches the leading term
            let t = pow(1.0, p);
            let s = t.partial_sum().unwrap();
            let n = 200_000usize;
            let grown: f64 = (n + 1..=2 * n).map(|r| (r as f64).powf(p)).sum();
            let predicted = s.eval(2.0 * n as f64) - s.eval(n as f64);
            prop_assert!((grown / predicted - 1.0).abs() < 1e-3);
        }

        #[test]
        fn mul_then_recip_is_identity(c in 0.1f64..10.0, p in -5.0f64..5.0, l in -3i32..3, b in 0.2f64..5.0) {
            let t = AsymptoticTerm::new(c, p, l, b);
            let one = t.mul(&t.recip().unwrap());
            prop_assert!((one.coef - 1.0).abs() < 1e-12);
            prop_assert!(one.power.abs() < 1e-12 && one.logpower == 0 && (one.base - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tail_sum_reciprocates_partial_sum_growth(p in -4.0f64..-1.1) {
            let t = pow(1.0, p).tail_sum().unwrap();
            prop_assert!(same_power(t.power, p + 1.0));
            prop_assert!(t.coef > 0.0);
        }
    }
}
