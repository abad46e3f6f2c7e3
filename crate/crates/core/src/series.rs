//! Convergence decisions for positive series.
//!
//! Each series is decided from its leading asymptotic term when one can be
//! derived; otherwise partial sums are inspected numerically.

use serde::{Deserialize, Serialize};

use crate::asym::AsymptoticTerm;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::CompensatedSum;
use crate::sequence::SequenceSpec;

pub const DEFAULT_BUDGET: usize = 100_000;
pub const MIN_BUDGET: usize = 64;
pub const DEFAULT_BLOW_THRESHOLD: f64 = 1e12;

/// Margin applied to the numeric ratio and Raabe tests.
const RATIO_MARGIN: f64 = 0.05;
const RAABE_MARGIN: f64 = 0.2;
/// Safety factor on symbolic tail bounds.
const TAIL_SAFETY: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub budget: usize,
    pub blow_threshold: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            blow_threshold: DEFAULT_BLOW_THRESHOLD,
        }
    }
}

impl SeriesOptions {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Leading term of the summand.
    Asymptotic,
    /// Partial sums passed the blow-up threshold.
    BlowUp,
    /// Ratio of consecutive terms stays below one.
    RatioTest,
    /// Raabe's test on consecutive terms.
    RaabeTest,
    /// No test was decisive.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub terms_used: usize,
    /// `(index, partial sum through index)` at geometrically spaced indices.
    #[serde(with = "crate::numeric::json_float::pairs")]
    pub partial_sums: Vec<(usize, f64)>,
    pub dominant_term: Option<AsymptoticTerm>,
    pub method: Method,
    /// Bound on the remainder past `terms_used` (convergent series only).
    #[serde(with = "crate::numeric::json_float::option")]
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub outcome: Outcome,
    /// Sum estimate for convergent series: partial sum plus tail bound.
    #[serde(with = "crate::numeric::json_float::option")]
    pub estimate: Option<f64>,
    pub evidence: Evidence,
}

impl SeriesVerdict {
    pub fn diverges(&self) -> bool {
        self.outcome == Outcome::Diverges
    }

    pub fn converges(&self) -> bool {
        self.outcome == Outcome::Converges
    }

    pub fn last_partial_sum(&self) -> f64 {
        self.evidence.partial_sums.last().map_or(0.0, |p| p.1)
    }
}

/// Named series built from an edge sequence `b` and a measure `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesShape {
    /// `(sum_{k<=r} 1/b(k))^2 m(r+1)`.
    Hamburger,
    /// `1/b(r)`.
    Recurrence,
    /// `(sum_{k<=r} 1/b(k)) m(r+1)`.
    Feller,
    /// `m(r)`.
    Measure,
    /// `(sum_{k>=r} 1/b(k))^2 m(r)`.
    GreenTail,
    /// `h(r)^2 m(r)` with `h(r) = sum_{j<r} 1/b(j)`.
    CapacityConstant,
    /// `(D/(D+1))^2 m` with `D = b/m`; `b` and `m` are pendant edge and mass.
    Pendant,
}

impl SeriesShape {
    pub fn expr(self, edge: &SequenceSpec, measure: &SequenceSpec) -> Expr {
        let inv = || Expr::Seq(edge.reciprocal());
        let m = || Expr::seq(measure);
        match self {
            SeriesShape::Hamburger => inv().partial_sum().square().mul(m().shift(1)),
            SeriesShape::Recurrence => inv(),
            SeriesShape::Feller => inv().partial_sum().mul(m().shift(1)),
            SeriesShape::Measure => m(),
            SeriesShape::GreenTail => Expr::TailSum(edge.reciprocal()).square().mul(m()),
            SeriesShape::CapacityConstant => {
                // h(0) = 0 drops out, so the sum starts at r = 1.
                inv().partial_sum().square().mul(m().shift(1))
            }
            SeriesShape::Pendant => pendant_expr(edge, measure, -1.0),
        }
    }
}

/// `(D/(D - lambda))^2 m` with `D = b/m`.
pub fn pendant_expr(edge: &SequenceSpec, measure: &SequenceSpec, lambda: f64) -> Expr {
    let deg = Expr::seq(edge).div(Expr::seq(measure));
    deg.clone()
        .div(deg.add(Expr::Const(-lambda)))
        .square()
        .mul(Expr::seq(measure))
}

/// Leading term of the summand for one of the named shapes.
pub fn term_asymptotics(edge: &SequenceSpec, measure: &SequenceSpec, shape: SeriesShape) -> Option<AsymptoticTerm> {
    shape.expr(edge, measure).asymptotic()
}

/// Decide a named series.
pub fn decide_series(
    edge: &SequenceSpec,
    measure: &SequenceSpec,
    shape: SeriesShape,
    opts: &SeriesOptions,
) -> Result<SeriesVerdict> {
    decide(&shape.expr(edge, measure), opts)
}

fn sample_indices(n: usize) -> Vec<usize> {
    let mut idx = Vec::new();
    let mut k = 1usize;
    while k < n {
        idx.push(k - 1);
        k *= 2;
    }
    idx.push(n - 1);
    idx.dedup();
    idx
}

/// Decide convergence of `sum_r t(r)` for the terms described by `expr`.
///
/// Table-backed expressions are examined over at most their available
/// length; at least [`MIN_BUDGET`] terms are required.
pub fn decide(expr: &Expr, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    if opts.budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall(opts.budget));
    }
    let n = match expr.len_limit() {
        Some(l) if l < MIN_BUDGET => {
            return Err(Error::IndexBeyondTable {
                index: MIN_BUDGET - 1,
                len: l,
            })
        }
        Some(l) => l.min(opts.budget),
        None => opts.budget,
    };
    let mut terms = expr.eval(n)?;
    // NaN comes from inf/inf or 0*inf once a factor leaves the float range;
    // only the prefix before it carries information.
    if let Some(bad) = terms.iter().position(|t| t.is_nan()) {
        terms.truncate(bad);
    }
    let n = terms.len();
    if n < MIN_BUDGET {
        let mut acc = CompensatedSum::new();
        let mut partial_sums: Vec<(usize, f64)> = terms
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                acc.add(t);
                (i, acc.value())
            })
            .collect();
        if partial_sums.is_empty() {
            partial_sums.push((0, f64::NAN));
        }
        let evidence = Evidence {
            terms_used: n,
            partial_sums,
            dominant_term: None,
            method: Method::None,
            tail_bound: None,
        };
        return Ok(SeriesVerdict {
            outcome: Outcome::Inconclusive,
            estimate: None,
            evidence,
        });
    }
    let mut acc = CompensatedSum::new();
    let mut sums = Vec::with_capacity(n);
    for &t in &terms {
        acc.add(t);
        sums.push(acc.value());
    }
    let partial_sums: Vec<(usize, f64)> = sample_indices(n).into_iter().map(|i| (i, sums[i])).collect();
    let total = sums[n - 1];
    let dominant = expr.asymptotic().filter(|a| a.coef >= 0.0);

    let mut evidence = Evidence {
        terms_used: n,
        partial_sums,
        dominant_term: dominant,
        method: Method::None,
        tail_bound: None,
    };

    if let Some(term) = dominant {
        evidence.method = Method::Asymptotic;
        if term.summable() {
            let bound = symbolic_tail_bound(&term, &terms);
            evidence.tail_bound = Some(bound);
            return Ok(SeriesVerdict {
                outcome: Outcome::Converges,
                estimate: Some(total + bound),
                evidence,
            });
        }
        return Ok(SeriesVerdict {
            outcome: Outcome::Diverges,
            estimate: None,
            evidence,
        });
    }
    Ok(numeric_decision(&terms, total, opts, evidence))
}

fn symbolic_tail_bound(term: &AsymptoticTerm, terms: &[f64]) -> f64 {
    if term.is_zero() {
        return 0.0;
    }
    let n = terms.len() as f64;
    let last = *terms.last().unwrap_or(&0.0);
    let logn = n.ln();
    if term.base.ln() < -crate::asym::BASE_TOL {
        let poly = (1.0 + 1.0 / n).powf(term.power.max(0.0)) * (1.0 + 1.0 / (n * logn)).powi(term.logpower.max(0));
        let ratio = (term.base * poly * 1.01).min(1.0 - 1e-12);
        return TAIL_SAFETY * last * ratio / (1.0 - ratio);
    }
    let decay = -term.power - 1.0;
    if (term.power + 1.0).abs() <= crate::asym::POWER_TOL {
        // t ~ K r^-1 (ln r)^l with l < -1
        let l = -(term.logpower as f64) - 1.0;
        return TAIL_SAFETY * last * n * logn / l;
    }
    let log_drag = if term.logpower > 0 {
        term.logpower as f64 / logn
    } else {
        0.0
    };
    let rate = (decay - log_drag).max(decay / 2.0);
    TAIL_SAFETY * last * n / rate
}

fn numeric_decision(terms: &[f64], total: f64, opts: &SeriesOptions, mut evidence: Evidence) -> SeriesVerdict {
    if !total.is_finite() || total > opts.blow_threshold {
        evidence.method = Method::BlowUp;
        return SeriesVerdict {
            outcome: Outcome::Diverges,
            estimate: None,
            evidence,
        };
    }
    let n = terms.len();
    let window = &terms[n - n / 4..];
    let last = *terms.last().unwrap();
    if window.iter().all(|&t| t == 0.0) {
        evidence.method = Method::RatioTest;
        evidence.tail_bound = Some(0.0);
        return SeriesVerdict {
            outcome: Outcome::Converges,
            estimate: Some(total),
            evidence,
        };
    }
    if window.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
        return SeriesVerdict {
            outcome: Outcome::Inconclusive,
            estimate: None,
            evidence,
        };
    }
    let max_ratio = window.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    if max_ratio <= 1.0 - RATIO_MARGIN {
        let bound = last * max_ratio / (1.0 - max_ratio);
        evidence.method = Method::RatioTest;
        evidence.tail_bound = Some(bound);
        return SeriesVerdict {
            outcome: Outcome::Converges,
            estimate: Some(total + bound),
            evidence,
        };
    }
    // Raabe statistic r (t_r / t_{r+1} - 1) at a few spread-out points of the
    // window, using increments over blocks to smooth out noise.
    let start = n - n / 4;
    let block = (n / 64).max(1);
    let raabe: Vec<f64> = (start..n - block)
        .step_by(block)
        .map(|r| {
            let ratio = terms[r] / terms[r + block];
            (r as f64) * (ratio.powf(1.0 / block as f64) - 1.0)
        })
        .collect();
    if raabe.is_empty() {
        return SeriesVerdict {
            outcome: Outcome::Inconclusive,
            estimate: None,
            evidence,
        };
    }
    let lo = raabe.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raabe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    evidence.method = Method::RaabeTest;
    if lo >= 1.0 + RAABE_MARGIN {
        let bound = TAIL_SAFETY * last * n as f64 / (lo - 1.0);
        evidence.tail_bound = Some(bound);
        return SeriesVerdict {
            outcome: Outcome::Converges,
            estimate: Some(total + bound),
            evidence,
        };
    }
    if hi <= 1.0 - RAABE_MARGIN {
        return SeriesVerdict {
            outcome: Outcome::Diverges,
            estimate: None,
            evidence,
        };
    }
    evidence.method = Method::None;
    SeriesVerdict {
        outcome: Outcome::Inconclusive,
        estimate: None,
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Tail;
    use proptest::prelude::*;

    fn unit_power(alpha: f64) -> (SequenceSpec, SequenceSpec) {
        (SequenceSpec::constant(1.0), SequenceSpec::power(1.0, -alpha))
    }

    #[test]
    fn hamburger_threshold_at_three() {
        for (alpha, diverges) in [(2.0, true), (3.0, true), (3.5, false), (4.0, false)] {
            let (b, m) = unit_power(alpha);
            let v = decide_series(&b, &m, SeriesShape::Hamburger, &SeriesOptions::default()).unwrap();
            assert_eq!(v.diverges(), diverges, "alpha = {alpha}");
        }
    }

    #[test]
    fn geometric_edges_are_transient() {
        let b = SequenceSpec::exponential(1.0, 2.0);
        let m = SequenceSpec::constant(1.0);
        let v = decide_series(&b, &m, SeriesShape::Recurrence, &SeriesOptions::default()).unwrap();
        assert!(v.converges());
        assert!((v.estimate.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_floor() {
        let (b, m) = unit_power(2.0);
        assert_eq!(
            decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(10)),
            Err(Error::BudgetTooSmall(10))
        );
    }

    #[test]
    fn measure_sum_estimate_brackets_exact_value() {
        // sum (r+1)^-2 = pi^2/6
        let (b, m) = unit_power(2.0);
        let v = decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(1000)).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!(v.last_partial_sum() < exact);
        assert!(v.estimate.unwrap() >= exact);
        assert!(v.estimate.unwrap() - exact < 2e-3);
    }

    #[test]
    fn numeric_path_on_tables() {
        let geometric: Vec<f64> = (0..200).map(|k| 0.5f64.powi(k)).collect();
        let v = decide(&Expr::table(geometric), &SeriesOptions::default()).unwrap();
        assert_eq!((v.outcome, v.evidence.method), (Outcome::Converges, Method::RatioTest));

        let harmonic: Vec<f64> = (0..5000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let v = decide(&Expr::table(harmonic), &SeriesOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Inconclusive);

        let flat = vec![1.0; 5000];
        let v = decide(&Expr::table(flat), &SeriesOptions::default()).unwrap();
        assert_eq!((v.outcome, v.evidence.method), (Outcome::Diverges, Method::RaabeTest));

        let cubic: Vec<f64> = (0..5000).map(|k| (k as f64 + 1.0).powi(-3)).collect();
        let v = decide(&Expr::table(cubic), &SeriesOptions::default()).unwrap();
        assert_eq!((v.outcome, v.evidence.method), (Outcome::Converges, Method::RaabeTest));

        let huge: Vec<f64> = (0..100).map(|k| 10f64.powi(k)).collect();
        let v = decide(&Expr::table(huge), &SeriesOptions::default()).unwrap();
        assert_eq!((v.outcome, v.evidence.method), (Outcome::Diverges, Method::BlowUp));
    }

    #[test]
    fn short_tables_are_rejected() {
        let s = SequenceSpec::new(vec![1.0; 10], Tail::None).unwrap();
        assert!(matches!(
            decide_series(&s, &s, SeriesShape::Measure, &SeriesOptions::default()),
            Err(Error::IndexBeyondTable { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn tail_bound_covers_later_partial_sums(p in -4.0f64..-1.3, c in 0.2f64..3.0) {
            let m = SequenceSpec::power(c, p);
            let b = SequenceSpec::constant(1.0);
            let small = decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(1000)).unwrap();
            let big = decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(200_000)).unwrap();
            prop_assert!(small.converges() && big.converges());
            let gap = big.last_partial_sum() - small.last_partial_sum();
            prop_assert!(small.evidence.tail_bound.unwrap() >= gap);
            prop_assert!(small.estimate.unwrap() >= big.last_partial_sum());
        }

        #[test]
        fn geometric_tail_bound_covers_later_sums(q in 0.5f64..0.999, p in -2.0f64..3.0) {
            // c r^p q^r terms through a product of two analytic sequences
            let e = Expr::Seq(SequenceSpec::power(1.0, p)).mul(Expr::Seq(SequenceSpec::exponential(1.0, q)));
            let small = decide(&e, &SeriesOptions::with_budget(2000)).unwrap();
            let big = decide(&e, &SeriesOptions::with_budget(100_000)).unwrap();
            prop_assert!(small.converges());
            let gap = big.last_partial_sum() - small.last_partial_sum();
            prop_assert!(small.evidence.tail_bound.unwrap() >= gap * (1.0 - 1e-12));
        }

        #[test]
        fn polynomial_divergence_grows(p in -0.6f64..2.0) {
            let m = SequenceSpec::power(1.0, p);
            let b = SequenceSpec::constant(1.0);
            let small = decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(1000)).unwrap();
            let big = decide_series(&b, &m, SeriesShape::Measure, &SeriesOptions::with_budget(1_000_000)).unwrap();
            prop_assert!(small.diverges() && big.diverges());
            prop_assert!(big.last_partial_sum() >= 10.0 * small.last_partial_sum());
        }
    }
}
