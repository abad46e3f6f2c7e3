//! (2,2)-capacity at infinity of a birth-death chain by exact quadratic
//! minimisation over truncated test functions.

use serde::{Deserialize, Serialize};

use crate::criteria::{hamburger_esa, measure_finite, Verdict};
use crate::error::{Error, Result};
use crate::graph::BirthDeath;
use crate::linalg::SymBanded;
use crate::numeric::CompensatedSum;
use crate::series::{decide_series, Outcome, SeriesOptions, SeriesShape, SeriesVerdict};

pub const DEFAULT_SCHEDULE: [usize; 5] = [25, 50, 100, 200, 400];
pub const DEFAULT_ZERO_TOL: f64 = 1e-6;
/// Relative slack for monotonicity of the minima in `n`.
const MONOTONE_SLACK: f64 = 1e-12;
/// Relative slack for the sandwich and duality checks.
const SANDWICH_SLACK: f64 = 1e-10;

/// The three pieces of the H^2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2Parts {
    pub mass: f64,
    pub laplacian: f64,
    pub energy: f64,
}

impl H2Parts {
    pub fn total(&self) -> f64 {
        self.mass + self.laplacian + self.energy
    }
}

fn measure_tail(chain: &BirthDeath, n: usize) -> Result<f64> {
    Ok(chain.measure.tail_sum(n)?.ok_or(Error::MeasureTailInfinite)?.value)
}

/// H^2 pieces of the function equal to `f` on `0..n` and to 1 from `n` on.
pub fn h2_parts(chain: &BirthDeath, f: &[f64]) -> Result<H2Parts> {
    let u: Vec<f64> = f.iter().map(|v| 1.0 - v).collect();
    h2_parts_complement(chain, &u)
}

/// H^2 pieces of `f = 1 - u`, with `u` vanishing from `u.len()` on.
///
/// Differences are taken on `u`, so values of `f` within rounding of 1
/// keep their contribution to the derivative terms.
pub fn h2_parts_complement(chain: &BirthDeath, u: &[f64]) -> Result<H2Parts> {
    let n = u.len();
    let at = |r: usize| if r < n { u[r] } else { 0.0 };
    let mut mass = CompensatedSum::new();
    for (r, &v) in u.iter().enumerate() {
        let f = 1.0 - v;
        mass.add(f * f * chain.m(r)?);
    }
    mass.add(measure_tail(chain, n)?);
    let mut lap = CompensatedSum::new();
    let mut energy = CompensatedSum::new();
    for r in 0..=n {
        let mut flux = chain.b(r)? * (at(r) - at(r + 1));
        if r > 0 {
            flux += chain.b(r - 1)? * (at(r) - at(r - 1));
        }
        lap.add(flux * flux / chain.m(r)?);
        if r < n {
            let d = at(r) - at(r + 1);
            energy.add(chain.b(r)? * d * d);
        }
    }
    Ok(H2Parts {
        mass: mass.value(),
        laplacian: lap.value(),
        energy: energy.value(),
    })
}

/// `||f||^2 + ||Delta f||^2 + Q(f)` for `f` extended by 1 beyond `f.len()`.
pub fn h2_norm_sq(chain: &BirthDeath, f: &[f64]) -> Result<f64> {
    Ok(h2_parts(chain, f)?.total())
}

/// Quadratic `x^T A x + 2 g^T x + c` in the free values `u(lo..n)`, where
/// `u = 1 - f` is pinned to 1 below `lo` and to 0 from `n` on.
struct Quadratic {
    lo: usize,
    n: usize,
    a: SymBanded,
    g: Vec<f64>,
}

impl Quadratic {
    fn new(lo: usize, n: usize) -> Self {
        let free = n - lo;
        Self {
            lo,
            n,
            a: SymBanded::zeros(free, 2),
            g: vec![0.0; free],
        }
    }

    /// Add `weight * (offset + sum c_i u(r_i))^2`.
    fn add_square(&mut self, weight: f64, offset: f64, terms: &[(usize, f64)]) {
        let mut fixed = offset;
        let mut vars: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(r, c) in terms {
            if r < self.lo {
                fixed += c;
            } else if r < self.n {
                vars.push((r - self.lo, c));
            }
        }
        for &(i, ci) in &vars {
            self.g[i] += weight * ci * fixed;
            // add() fills both A[i][j] and A[j][i], so visit each pair once
            for &(j, cj) in vars.iter().filter(|&&(j, _)| j <= i) {
                self.a.add(i, j, weight * ci * cj);
            }
        }
    }
}

/// Minimiser of the H^2 norm over `C_n` (or `C_{k,n}` when `k` is given).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityMinimum {
    pub n: usize,
    pub k: Option<usize>,
    pub value: f64,
    pub parts: H2Parts,
    /// Minimising values `f(0..n)`; `f = 1` beyond.
    pub minimizer: Vec<f64>,
}

pub fn capacity_minimum(chain: &BirthDeath, n: usize, k: Option<usize>) -> Result<CapacityMinimum> {
    let lo = match k {
        Some(k) if k >= n => return Err(Error::InvalidSequence(format!("k = {k} must be below n = {n}"))),
        Some(k) => k + 1,
        None => 0,
    };
    measure_tail(chain, n)?;
    let mut q = Quadratic::new(lo, n);
    for r in 0..n {
        q.add_square(chain.m(r)?, -1.0, &[(r, 1.0)]);
    }
    for r in 0..=n {
        let b_right = chain.b(r)?;
        let inv_m = 1.0 / chain.m(r)?;
        if r > 0 {
            let b_left = chain.b(r - 1)?;
            q.add_square(
                inv_m,
                0.0,
                &[(r - 1, -b_left), (r, b_left + b_right), (r + 1, -b_right)],
            );
        } else {
            q.add_square(inv_m, 0.0, &[(r, b_right), (r + 1, -b_right)]);
        }
        if r < n {
            q.add_square(b_right, 0.0, &[(r, 1.0), (r + 1, -1.0)]);
        }
    }
    let rhs: Vec<f64> = q.g.iter().map(|v| -v).collect();
    let free = if rhs.is_empty() {
        Vec::new()
    } else {
        q.a.solve(&rhs).map_err(|e| match e {
            Error::SingularSystem { row, pivot } => Error::SolverFailure(format!(
                "capacity Hessian not positive definite at row {row} (pivot {pivot:e})"
            )),
            other => other,
        })?
    };
    let mut complement = vec![1.0; n];
    complement[lo..].copy_from_slice(&free);
    let parts = h2_parts_complement(chain, &complement)?;
    let minimizer = complement.iter().map(|u| 1.0 - u).collect();
    Ok(CapacityMinimum {
        n,
        k,
        value: parts.total(),
        parts,
        minimizer,
    })
}

/// Constant `C(k) = max{C1, C2}` from the truncation `f -> f 1_{r > k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyConstant {
    pub k: usize,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
}

pub fn key_constant(chain: &BirthDeath, k: usize) -> Result<KeyConstant> {
    let (bk, bk1) = (chain.b(k)?, chain.b(k + 1)?);
    let (mk, mk1) = (chain.m(k)?, chain.m(k + 1)?);
    let c1 = 1f64.max(bk / mk1);
    let c2 = 1f64
        .max(2.0 * bk1 / mk1)
        .max(bk * bk / (mk * mk1) + 2.0 * bk * bk / (mk1 * mk1));
    Ok(KeyConstant {
        k,
        c1,
        c2,
        c: c1.max(c2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    Zero,
    PositiveFinite,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapacityKind {
    Infinite { reason: String },
    Sequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub schedule: Vec<usize>,
    /// Minimise over `C_{k,n}` instead of `C_n`.
    pub k: Option<usize>,
    /// `k` used for the constant in the lower bound.
    pub bound_k: usize,
    pub zero_tol: f64,
    pub series: SeriesOptions,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            schedule: DEFAULT_SCHEDULE.to_vec(),
            k: None,
            bound_k: 1,
            zero_tol: DEFAULT_ZERO_TOL,
            series: SeriesOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub kind: CapacityKind,
    pub minima: Vec<(usize, f64)>,
    pub k: Option<usize>,
    pub extrapolated: Option<f64>,
    pub dichotomy: Dichotomy,
    /// `1 / (C(k) C^2)`, available when the Hamburger series converges.
    pub lower_bound: Option<f64>,
    pub key_constant: Option<KeyConstant>,
    /// Upper estimate of `C^2 = sum h(r)^2 m(r)`.
    pub c_squared: Option<f64>,
    pub zero_tol: f64,
    pub hamburger: SeriesVerdict,
}

/// Aitken extrapolation of the last three minima, clamped to `[0, last]`.
pub fn extrapolate(values: &[f64]) -> Option<f64> {
    let last = *values.last()?;
    if values.len() < 3 {
        return Some(last);
    }
    let [a, b, c] = [values[values.len() - 3], values[values.len() - 2], last];
    let (d1, d2) = (b - a, c - b);
    let curvature = d2 - d1;
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() || curvature == 0.0 {
        return Some(last);
    }
    Some((c - d2 * d2 / curvature).clamp(0.0, last))
}

/// Upper estimate of `C^2`, `None` when the series does not converge.
pub fn duality_constant(chain: &BirthDeath, opts: &SeriesOptions) -> Result<Option<f64>> {
    let v = decide_series(&chain.edge, &chain.measure, SeriesShape::CapacityConstant, opts)?;
    Ok(match v.outcome {
        Outcome::Converges => v.estimate,
        _ => None,
    })
}

pub fn capacity(chain: &BirthDeath, opts: &CapacityOptions) -> Result<CapacityRecord> {
    let hamburger = hamburger_esa(chain, &opts.series)?;
    let (finite, measure) = measure_finite(chain, &opts.series)?;
    let mut record = CapacityRecord {
        kind: CapacityKind::Sequence,
        minima: Vec::new(),
        k: opts.k,
        extrapolated: None,
        dichotomy: Dichotomy::Inconclusive,
        lower_bound: None,
        key_constant: None,
        c_squared: None,
        zero_tol: opts.zero_tol,
        hamburger,
    };
    match finite {
        Verdict::Fails => {
            record.kind = CapacityKind::Infinite {
                reason: "measure-infinite".into(),
            };
            record.dichotomy = Dichotomy::Infinite;
            return Ok(record);
        }
        Verdict::Inconclusive => {
            return Err(Error::SolverFailure(format!(
                "finiteness of the measure is undetermined after {} terms",
                measure.evidence.terms_used
            )))
        }
        Verdict::Holds => {}
    }
    let mut schedule = opts.schedule.clone();
    schedule.sort_unstable();
    schedule.dedup();
    let c_squared = duality_constant(chain, &opts.series)?;
    record.c_squared = c_squared;
    for &n in &schedule {
        let min = capacity_minimum(chain, n, opts.k)?;
        if let (Some(c2), Some(_)) = (c_squared, opts.k) {
            // 1 <= C ||Delta f|| for every f vanishing at 0
            if min.parts.laplacian * c2 < 1.0 - SANDWICH_SLACK {
                return Err(Error::AssertionFailure(format!(
                    "duality bound violated at n = {n}: ||Delta f||^2 C^2 = {}",
                    min.parts.laplacian * c2
                )));
            }
        }
        if let Some(&(prev_n, prev)) = record.minima.last() {
            if min.value > prev * (1.0 + MONOTONE_SLACK) {
                return Err(Error::AssertionFailure(format!(
                    "capacity minima increase from n = {prev_n} ({prev}) to n = {n} ({})",
                    min.value
                )));
            }
        }
        record.minima.push((n, min.value));
    }
    let values: Vec<f64> = record.minima.iter().map(|&(_, v)| v).collect();
    record.extrapolated = extrapolate(&values);
    if let Some(c2) = c_squared {
        let key = key_constant(chain, opts.bound_k)?;
        record.lower_bound = Some(1.0 / (key.c * c2));
        record.key_constant = Some(key);
    }
    record.dichotomy = match (record.extrapolated, record.lower_bound) {
        (Some(lim), _) if lim < opts.zero_tol && record.hamburger.diverges() => Dichotomy::Zero,
        (Some(lim), Some(lb)) if lim > lb / 2.0 => Dichotomy::PositiveFinite,
        _ => Dichotomy::Inconclusive,
    };
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub cap: f64,
    pub capk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityComparison {
    pub key_constant: KeyConstant,
    pub rows: Vec<ComparisonRow>,
}

/// `cap_n <= capk_n <= C(k) cap_n` along the schedule.
pub fn capacity_comparison(chain: &BirthDeath, k: usize, schedule: &[usize]) -> Result<CapacityComparison> {
    if k == 0 {
        return Err(Error::InvalidSequence("comparison needs k >= 1".into()));
    }
    let key_constant = key_constant(chain, k)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let cap = capacity_minimum(chain, n, None)?.value;
        let capk = capacity_minimum(chain, n, Some(k))?.value;
        if cap > capk * (1.0 + SANDWICH_SLACK) || capk > key_constant.c * cap * (1.0 + SANDWICH_SLACK) {
            return Err(Error::AssertionFailure(format!(
                "sandwich fails at n = {n}: cap {cap}, capk {capk}, C(k) {}",
                key_constant.c
            )));
        }
        rows.push(ComparisonRow { n, cap, capk });
    }
    Ok(CapacityComparison { key_constant, rows })
}
