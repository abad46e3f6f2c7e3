//! Schrödinger operators `Delta + W` on chains.
//!
//! Generalized eigenfunctions are built by the first-order recursion
//! `v(r+1) = v(r) + (1/b(r)) sum_{k<=r} (W(k) - lambda) v(k) m(k)` and stored
//! as mantissa/exponent pairs, since they grow geometrically for
//! `lambda < inf W`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::criteria::{hamburger_esa, Verdict};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{BirthDeath, End, GraphSpec, Potential, Vertex};
use crate::numeric::CompensatedSum;
use crate::sequence::SequenceSpec;
use crate::series::{decide, Evidence, Method, Outcome, SeriesOptions, SeriesShape, SeriesVerdict, MIN_BUDGET};

/// Default spectral parameter when a negative one is needed.
pub const DEFAULT_LAMBDA: f64 = -1.0;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Window used for the comparison `v >= w`.
pub const COMPARISON_WINDOW: usize = 400;
/// Window used for dense conjugation checks.
pub const CONJUGATION_WINDOW: usize = 40;
const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BITS: i32 = 498;

/// `x * 2^e` without intermediate overflow.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

/// `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp2: i32,
}

impl Scaled {
    pub fn value(self) -> f64 {
        ldexp(self.mantissa, self.exp2)
    }

    /// Value expressed relative to `2^exp2`.
    pub fn relative_to(self, exp2: i32) -> f64 {
        ldexp(self.mantissa, self.exp2 - exp2)
    }

    pub fn ln_abs(self) -> f64 {
        self.mantissa.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// `self >= other`, exact for finite mantissas.
    pub fn ge(self, other: Scaled) -> bool {
        let e = self.exp2.max(other.exp2);
        self.relative_to(e) >= other.relative_to(e)
    }
}

/// Solution of `(Delta + W) v = lambda v` on a chain with `v(0) = v0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSolution {
    pub chain: BirthDeath,
    pub potential: Potential,
    pub lambda: f64,
    pub values: Vec<Scaled>,
    /// `v > 0` on every computed index.
    pub positive: bool,
    /// Every computed step `v(r+1) - v(r)` is positive.
    pub steps_positive: bool,
    running: Scaled,
}

impl EigenSolution {
    /// Index of the last computed value.
    pub fn last(&self) -> usize {
        self.values.len() - 1
    }

    pub fn scaled(&self, r: usize) -> Result<Scaled> {
        self.values.get(r).copied().ok_or(Error::IndexBeyondTable {
            index: r,
            len: self.values.len(),
        })
    }

    /// `v(r)` as a float; infinite once it leaves the representable range.
    pub fn value(&self, r: usize) -> Result<f64> {
        Ok(self.scaled(r)?.value())
    }

    pub fn ln_value(&self, r: usize) -> Result<f64> {
        Ok(self.scaled(r)?.ln_abs())
    }

    /// `v(r+1) / v(r)`.
    pub fn ratio(&self, r: usize) -> Result<f64> {
        let (a, b) = (self.scaled(r)?, self.scaled(r + 1)?);
        Ok(b.relative_to(a.exp2) / a.mantissa)
    }

    /// Compute values through index `upto`; already computed values are kept.
    pub fn extend_to(&mut self, upto: usize) -> Result<()> {
        let mut exp2 = self.values.last().map_or(0, |v| v.exp2);
        let mut sum = self.running.relative_to(exp2);
        while self.values.len() <= upto {
            let r = self.values.len() - 1;
            let here = self.values[r].relative_to(exp2);
            let coef = self.potential.eval(r)? - self.lambda;
            sum += coef * here * self.chain.m(r)?;
            let mut next = here + sum / self.chain.b(r)?;
            if !next.is_finite() || !sum.is_finite() {
                return Err(Error::Overflow { last_finite: r });
            }
            if next.abs() > RESCALE_ABOVE {
                next = ldexp(next, -RESCALE_BITS);
                sum = ldexp(sum, -RESCALE_BITS);
                exp2 += RESCALE_BITS;
            }
            self.positive &= next > 0.0;
            self.steps_positive &= sum / self.chain.b(r)? > 0.0;
            self.values.push(Scaled { mantissa: next, exp2 });
        }
        self.running = Scaled { mantissa: sum, exp2 };
        Ok(())
    }

    /// Largest row-relative residual of `(Delta + W - lambda) v` over rows
    /// whose right neighbour is computed.
    pub fn residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for r in 0..self.last() {
            let e = self.values[r].exp2;
            let here = self.values[r].relative_to(e);
            let next = self.values[r + 1].relative_to(e);
            let (left_b, prev) = if r == 0 {
                (0.0, 0.0)
            } else {
                (self.chain.b(r - 1)?, self.values[r - 1].relative_to(e))
            };
            let right_b = self.chain.b(r)?;
            let m = self.chain.m(r)?;
            let coef = self.potential.eval(r)? - self.lambda;
            let lhs = (left_b * (here - prev) + right_b * (here - next)) / m + coef * here;
            let scale = (left_b * (here.abs() + prev.abs()) + right_b * (here.abs() + next.abs())) / m
                + coef.abs() * here.abs();
            if scale > 0.0 {
                worst = worst.max(lhs.abs() / scale);
            }
        }
        Ok(worst)
    }

    /// Every step of the recursion is positive and the stored values never
    /// decrease. Steps far below the precision of `v` leave the stored value
    /// unchanged, so equality of neighbours is allowed.
    pub fn strictly_increasing(&self) -> bool {
        self.steps_positive && self.values.windows(2).all(|w| w[1].ge(w[0]))
    }
}

/// Run the recursion from `v(0) = v0` through index `upto`.
pub fn eigen_recursion(
    chain: &BirthDeath,
    potential: &Potential,
    lambda: f64,
    v0: f64,
    upto: usize,
) -> Result<EigenSolution> {
    if upto < 1 {
        return Err(Error::InvalidSequence("eigen recursion needs upto >= 1".into()));
    }
    let mut sol = EigenSolution {
        chain: chain.clone(),
        potential: potential.clone(),
        lambda,
        values: vec![Scaled { mantissa: v0, exp2: 0 }],
        positive: v0 > 0.0,
        steps_positive: true,
        running: Scaled { mantissa: 0.0, exp2: 0 },
    };
    sol.extend_to(upto)?;
    Ok(sol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedPotentialRecord {
    pub lower_bound: f64,
    pub lambda: f64,
    /// `sup(lambda - W) = lambda - K`.
    pub comparison_lambda: f64,
    pub hamburger: SeriesVerdict,
    /// Indices on which `v >= w` was checked.
    pub window: usize,
    pub verdict: Verdict,
}

/// A potential bounded below keeps an essentially self-adjoint chain so.
pub fn bounded_potential_esa(
    chain: &BirthDeath,
    potential: &Potential,
    opts: &SeriesOptions,
) -> Result<BoundedPotentialRecord> {
    let k = potential.lower_bound().ok_or(Error::LowerBoundMissing)?;
    let hamburger = hamburger_esa(chain, opts)?;
    match hamburger.outcome {
        Outcome::Converges => return Err(Error::ChainNotEsa),
        Outcome::Inconclusive => {
            return Ok(BoundedPotentialRecord {
                lower_bound: k,
                lambda: k - 1.0,
                comparison_lambda: -1.0,
                hamburger,
                window: 0,
                verdict: Verdict::Inconclusive,
            })
        }
        Outcome::Diverges => {}
    }
    let lambda = k - 1.0;
    let window = chain
        .len_limit()
        .map_or(COMPARISON_WINDOW, |l| l.saturating_sub(1).min(COMPARISON_WINDOW));
    let v = eigen_recursion(chain, potential, lambda, 1.0, window)?;
    // w solves Delta w = (lambda - K) w; evaluating it as the K-shifted
    // problem keeps every coefficient comparison monotone in floating point.
    let w = eigen_recursion(chain, &Potential::constant(k), lambda, 1.0, window)?;
    if let Some(r) = (0..=window).find(|&r| !v.values[r].ge(w.values[r])) {
        return Err(Error::AssertionFailure(format!("comparison v >= w fails at index {r}")));
    }
    Ok(BoundedPotentialRecord {
        lower_bound: k,
        lambda,
        comparison_lambda: lambda - k,
        hamburger,
        window,
        verdict: Verdict::Holds,
    })
}

/// Divergence certificate along one family of paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathCertificate {
    pub path: String,
    pub verdict: SeriesVerdict,
}

/// `W(x) = Deg(x) (inf_{y~x} m(y))^(-1/2)` on a graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EsaPotential {
    pub graph: GraphSpec,
    pub lambda: f64,
    pub certificates: Vec<PathCertificate>,
}

impl EsaPotential {
    pub fn eval(&self, v: Vertex) -> Result<f64> {
        let n = self.graph.neighbourhood(v)?;
        let inf = n.inf_neighbour_measure();
        if inf <= 0.0 {
            return Err(Error::ZeroInfMeasure);
        }
        Ok(n.weighted_degree() / inf.sqrt())
    }

    /// The same potential as a chain rule, for chain graphs.
    pub fn chain_potential(&self) -> Option<Potential> {
        match &self.graph {
            GraphSpec::Chain(c) => Some(Potential::EsaForcing { chain: c.clone() }),
            _ => None,
        }
    }

    /// All values on a finite graph.
    pub fn table(&self) -> Result<Option<Vec<f64>>> {
        match &self.graph {
            GraphSpec::Finite(f) => (0..f.len())
                .map(|x| self.eval(Vertex::Node(x)))
                .collect::<Result<_>>()
                .map(Some),
            _ => Ok(None),
        }
    }
}

/// Terms `((Deg + W - lambda)/Deg)^2 m(next)` along a chain starting at
/// vertex 1, for a chain whose vertex `j+1` has extra edge `extra` and
/// extra neighbour mass `extra_mass`.
fn forcing_terms(chain: &BirthDeath, extra: Option<(&SequenceSpec, &SequenceSpec)>, lambda: f64) -> Expr {
    let b = Expr::seq(&chain.edge);
    let m = Expr::seq(&chain.measure);
    let mut weight = b.clone().add(b.shift(1));
    let mut inf = m.clone().min(m.clone().shift(2));
    if let Some((pe, pm)) = extra {
        weight = weight.add(Expr::seq(pe).shift(1));
        inf = inf.min(Expr::seq(pm).shift(1));
    }
    let deg = weight.div(m.clone().shift(1));
    let w = deg.clone().mul(inf.pow(-0.5));
    deg.clone()
        .add(w)
        .add(Expr::Const(-lambda))
        .div(deg)
        .square()
        .mul(m.shift(2))
}

/// Build the ESA-forcing potential with a divergence certificate for every
/// infinite end of `g`.
pub fn make_esa_potential(g: &GraphSpec, opts: &SeriesOptions) -> Result<EsaPotential> {
    let lambda = DEFAULT_LAMBDA;
    let mut paths: Vec<(String, Expr)> = Vec::new();
    match g {
        GraphSpec::Chain(c) => paths.push(("chain".into(), forcing_terms(c, None, lambda))),
        GraphSpec::PendantChain(p) => paths.push((
            "spine".into(),
            forcing_terms(&p.base, Some((&p.pendant_edge, &p.pendant_measure)), lambda),
        )),
        GraphSpec::TwoRayStar(s) => {
            for end in [End::Positive, End::Negative] {
                paths.push((format!("{end} end"), forcing_terms(&s.ray(end)?, None, lambda)));
            }
        }
        GraphSpec::StarLike(s) => {
            for (i, ray) in s.rays.iter().enumerate() {
                paths.push((format!("ray {i}"), forcing_terms(&ray.chain, None, lambda)));
            }
            if let Some(fam) = &s.family {
                let n = g.neighbourhood(Vertex::Hub(fam.attach))?;
                if n.inf_neighbour_measure() <= 0.0 {
                    return Err(Error::ZeroInfMeasure);
                }
                paths.push(("family member 0".into(), forcing_terms(&fam.member(0)?, None, lambda)));
            }
        }
        GraphSpec::Finite(f) => {
            if let Some(x) = (0..f.len()).find(|&x| f.neighbours(x).iter().any(|&(y, _)| f.measure[y] <= 0.0)) {
                return Err(Error::InvalidGraph(format!("non-positive mass next to vertex {x}")));
            }
        }
    }
    let certificates = paths
        .into_iter()
        .map(|(path, expr)| {
            Ok(PathCertificate {
                path,
                verdict: decide(&expr, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EsaPotential {
        graph: g.clone(),
        lambda,
        certificates,
    })
}

/// Chain after conjugation by a positive eigenfunction, plus the constant
/// shift `lambda`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub chain: BirthDeath,
    pub shift: f64,
}

/// Weights `b v v` and masses `m v^2`, truncated where they leave the
/// floating-point range.
pub fn ground_state_transform(v: &EigenSolution) -> Result<GroundState> {
    if let Some(r) = v.values.iter().position(|x| x.mantissa <= 0.0) {
        return Err(Error::NonpositiveV(r));
    }
    let res = v.residual()?;
    if res > RESIDUAL_TOL {
        return Err(Error::AssertionFailure(format!(
            "eigen residual {res:e} above tolerance"
        )));
    }
    if v.lambda == 0.0 && v.values.iter().all(|x| x.value() == 1.0) {
        return Ok(GroundState {
            chain: v.chain.clone(),
            shift: 0.0,
        });
    }
    let mut mass = Vec::new();
    for (r, x) in v.values.iter().enumerate() {
        let t = ldexp(v.chain.m(r)? * x.mantissa * x.mantissa, 2 * x.exp2);
        if !(t.is_finite() && t > 0.0) {
            break;
        }
        mass.push(t);
    }
    let mut edge = Vec::new();
    for r in 0..mass.len().saturating_sub(1) {
        let (a, b) = (v.values[r], v.values[r + 1]);
        let t = ldexp(v.chain.b(r)? * a.mantissa * b.mantissa, a.exp2 + b.exp2);
        if !(t.is_finite() && t > 0.0) {
            break;
        }
        edge.push(t);
    }
    mass.truncate(edge.len() + 1);
    Ok(GroundState {
        chain: BirthDeath::new(SequenceSpec::from_table(edge)?, SequenceSpec::from_table(mass)?),
        shift: v.lambda,
    })
}

/// Verdict for a prefix of terms that may end early because later terms
/// overflow.
fn decide_prefix(terms: Vec<f64>, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    if terms.len() >= MIN_BUDGET {
        return decide(&Expr::table(terms), opts);
    }
    let total = crate::numeric::sum(terms.iter().copied());
    if total > opts.blow_threshold {
        return Ok(SeriesVerdict {
            outcome: Outcome::Diverges,
            estimate: None,
            evidence: Evidence {
                terms_used: terms.len(),
                partial_sums: vec![(terms.len().saturating_sub(1), total)],
                dominant_term: None,
                method: Method::BlowUp,
                tail_bound: None,
            },
        });
    }
    Err(Error::IndexBeyondTable {
        index: MIN_BUDGET - 1,
        len: terms.len(),
    })
}

/// `sum_r (sum_{k<=r} 1/(b v(k) v(k+1)))^2 v(r+1)^2 m(r+1)`, evaluated
/// directly in log space.
pub fn transformed_hamburger_direct(v: &EigenSolution, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    if let Some(r) = v.values.iter().position(|x| x.mantissa <= 0.0) {
        return Err(Error::NonpositiveV(r));
    }
    let ln_v: Vec<f64> = v.values.iter().map(|x| x.ln_abs()).collect();
    let mut inner = CompensatedSum::new();
    let mut terms = Vec::new();
    for r in 0..ln_v.len() - 1 {
        inner.add((-(v.chain.b(r)?.ln() + ln_v[r] + ln_v[r + 1])).exp());
        let t = (2.0 * inner.value().ln() + 2.0 * ln_v[r + 1] + v.chain.m(r + 1)?.ln()).exp();
        if !t.is_finite() {
            break;
        }
        terms.push(t);
    }
    decide_prefix(terms, opts)
}

/// Hamburger series of the transformed chain.
pub fn transformed_hamburger(v: &EigenSolution, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    let gs = ground_state_transform(v)?;
    let expr = SeriesShape::Hamburger.expr(&gs.chain.edge, &gs.chain.measure);
    match expr.len_limit() {
        Some(n) => decide_prefix(expr.eval(n.min(opts.budget))?, opts),
        None => hamburger_esa(&gs.chain, opts),
    }
}

/// Largest entrywise difference, relative to the largest entry of its row,
/// between `A` and `T^-1 B T` on interior rows, where `T = diag(t)`.
fn conjugation_gap(a: &DMatrix<f64>, b: &DMatrix<f64>, t: &[f64]) -> f64 {
    let n = t.len();
    let tm = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(t));
    let tinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, t.iter().map(|x| 1.0 / x)));
    let conj = tinv * b * tm;
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let scale = (0..n)
            .map(|j| a[(i, j)].abs().max(conj[(i, j)].abs()))
            .fold(0.0, f64::max);
        if scale > 0.0 {
            let gap = (0..n).map(|j| (a[(i, j)] - conj[(i, j)]).abs()).fold(0.0, f64::max);
            worst = worst.max(gap / scale);
        }
    }
    worst
}

/// Tridiagonal matrix of `Delta + W` on vertices `0..n`, rows truncated at
/// the window edge.
fn schrodinger_matrix(b: &[f64], m: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = m.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            a[(i, i)] += b[i - 1] / m[i];
            a[(i, i - 1)] = -b[i - 1] / m[i];
        }
        a[(i, i)] += b[i] / m[i] + w[i];
        if i + 1 < n {
            a[(i, i + 1)] = -b[i] / m[i];
        }
    }
    a
}

/// Check `H = T_v^-1 (L + W) T_v` on interior rows of a window; returns the
/// largest row-relative gap.
pub fn ground_state_conjugation(v: &EigenSolution, window: usize) -> Result<f64> {
    let n = window.min(v.values.len());
    if n < 3 {
        return Err(Error::InvalidSequence("conjugation window needs 3 vertices".into()));
    }
    let c = &v.chain;
    let b: Vec<f64> = (0..n).map(|r| c.b(r)).collect::<Result<_>>()?;
    let m: Vec<f64> = (0..n).map(|r| c.m(r)).collect::<Result<_>>()?;
    let w = v.potential.values(n)?;
    let vals: Vec<f64> = v.values[..n].iter().map(|x| x.value()).collect();
    if vals.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Overflow {
            last_finite: vals.iter().position(|x| !x.is_finite()).unwrap_or(0),
        });
    }
    // H from the transformed weights b v v and masses m v^2, plus lambda.
    let bt: Vec<f64> = (0..n)
        .map(|r| b[r] * vals[r] * vals.get(r + 1).copied().unwrap_or(0.0))
        .collect();
    let mt: Vec<f64> = (0..n).map(|r| m[r] * vals[r] * vals[r]).collect();
    let h = schrodinger_matrix(&bt, &mt, &vec![v.lambda; n]);
    let lw = schrodinger_matrix(&b, &m, &w);
    Ok(conjugation_gap(&h, &lw, &vals))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedVRecord {
    /// `sum_r (q(B_r) + m(B_r)) / b(r)` with `q = W m`.
    pub series: SeriesVerdict,
    pub hamburger: SeriesVerdict,
    /// ESA of `L_c + W`, decided only when the series converges.
    pub verdict: Verdict,
}

/// When the eigenfunction is bounded, `L_c + W` and `L_c` are ESA together.
pub fn bounded_v_criterion(chain: &BirthDeath, potential: &Potential, opts: &SeriesOptions) -> Result<BoundedVRecord> {
    if potential.lower_bound().is_none_or(|k| k < 0.0) {
        return Err(Error::InvalidSequence("bounded-v criterion needs W >= 0".into()));
    }
    let m = Expr::seq(&chain.measure);
    let expr = Expr::Potential(potential.clone())
        .mul(m.clone())
        .add(m)
        .partial_sum()
        .div(Expr::seq(&chain.edge));
    let series = decide(&expr, opts)?;
    let hamburger = hamburger_esa(chain, opts)?;
    let verdict = if series.converges() {
        Verdict::on_divergence(&hamburger)
    } else {
        Verdict::Inconclusive
    };
    Ok(BoundedVRecord {
        series,
        hamburger,
        verdict,
    })
}

/// `w(r) = b(r) / sqrt(m(r) m(r+1))`.
pub fn hc_weights(chain: &BirthDeath) -> Expr {
    let m = Expr::seq(&chain.measure);
    Expr::seq(&chain.edge).div(m.clone().mul(m.shift(1)).pow(0.5))
}

/// `W(r) = (1/sqrt m(r)) sum_y b(r,y) (1/sqrt m(r) - 1/sqrt m(y))`.
pub fn hc_potential(chain: &BirthDeath, r: usize) -> Result<f64> {
    let inv = |k: usize| chain.m(k).map(|m| 1.0 / m.sqrt());
    let here = inv(r)?;
    let mut acc = chain.b(r)? * (here - inv(r + 1)?);
    if r > 0 {
        acc += chain.b(r - 1)? * (here - inv(r - 1)?);
    }
    Ok(here * acc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HcRecord {
    /// `w(r)` for `r` below the sample length.
    pub weights: Vec<f64>,
    /// `W(r)` on the same range.
    pub potential: Vec<f64>,
    pub hamburger: SeriesVerdict,
    /// Series of the ground-state transform of `H_c` by `sqrt m`.
    pub transformed: SeriesVerdict,
    pub verdict: Verdict,
    pub conjugation_gap: f64,
}

/// Sample length reported in [`HcRecord`].
pub const HC_SAMPLE: usize = 16;

/// `H_c` with weights `w`, unit measure and potential `W` is unitarily
/// equivalent to `L_c`.
pub fn hc_equivalence(chain: &BirthDeath, opts: &SeriesOptions) -> Result<HcRecord> {
    let sample = chain
        .len_limit()
        .map_or(HC_SAMPLE, |l| l.saturating_sub(1).min(HC_SAMPLE));
    let weights = hc_weights(chain).eval(sample)?;
    let potential = (0..sample)
        .map(|r| hc_potential(chain, r))
        .collect::<Result<Vec<_>>>()?;
    let hamburger = hamburger_esa(chain, opts)?;
    // sqrt m is a positive 0-eigenfunction of H_c; transform (w, 1, W) by it.
    let v = Expr::seq(&chain.measure).pow(0.5);
    let inner = hc_weights(chain)
        .mul(v.clone())
        .mul(v.clone().shift(1))
        .pow(-1.0)
        .partial_sum();
    let transformed = decide(&inner.square().mul(v.shift(1).square()), opts)?;
    let verdict = Verdict::on_divergence(&transformed);
    let conjugation_gap = hc_conjugation(chain, CONJUGATION_WINDOW)?;
    Ok(HcRecord {
        weights,
        potential,
        hamburger,
        transformed,
        verdict,
        conjugation_gap,
    })
}

/// Check `H_c = T^-1 L_c T` with `T = diag(m^-1/2)` on interior rows.
pub fn hc_conjugation(chain: &BirthDeath, window: usize) -> Result<f64> {
    let n = chain.len_limit().map_or(window, |l| l.saturating_sub(1).min(window));
    let b: Vec<f64> = (0..n).map(|r| chain.b(r)).collect::<Result<_>>()?;
    let m: Vec<f64> = (0..n).map(|r| chain.m(r)).collect::<Result<_>>()?;
    let w: Vec<f64> = (0..n)
        .map(|r| Ok(b[r] / (m[r] * chain.m(r + 1)?).sqrt()))
        .collect::<Result<_>>()?;
    let pot: Vec<f64> = (0..n).map(|r| hc_potential(chain, r)).collect::<Result<_>>()?;
    let hc = schrodinger_matrix(&w, &vec![1.0; n], &pot);
    let lc = schrodinger_matrix(&b, &m, &vec![0.0; n]);
    let t: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    Ok(conjugation_gap(&hc, &lc, &t))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerezanskiiRecord {
    /// `sum_r sqrt(m(r) m(r+1)) / b(r)`.
    pub series: SeriesVerdict,
    /// `Holds` when ESA follows for every potential; silent otherwise.
    pub verdict: Verdict,
}

pub fn berezanskii_esa(chain: &BirthDeath, opts: &SeriesOptions) -> Result<BerezanskiiRecord> {
    let series = decide(&hc_weights(chain).pow(-1.0), opts)?;
    let verdict = if series.diverges() {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(BerezanskiiRecord { series, verdict })
}

/// Everything the chain-level criteria say about `L_c + W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchrodingerReport {
    pub lambda: f64,
    pub berezanskii: BerezanskiiRecord,
    pub bounded_potential: Option<BoundedPotentialRecord>,
    pub bounded_v: Option<BoundedVRecord>,
    /// Direct ground-state series for the positive eigenfunction at `lambda`.
    pub ground_state: Option<SeriesVerdict>,
    pub verdict: Verdict,
}

/// Combine the available criteria. `lambda` defaults to
/// `min(-1, K - 1)` for a potential bounded below by `K`.
pub fn schrodinger_esa(
    chain: &BirthDeath,
    potential: &Potential,
    lambda: Option<f64>,
    opts: &SeriesOptions,
) -> Result<SchrodingerReport> {
    let k = potential.lower_bound();
    let lambda = lambda.unwrap_or_else(|| k.map_or(DEFAULT_LAMBDA, |k| DEFAULT_LAMBDA.min(k - 1.0)));
    let berezanskii = berezanskii_esa(chain, opts)?;
    let bounded_potential = match bounded_potential_esa(chain, potential, opts) {
        Ok(r) => Some(r),
        Err(Error::ChainNotEsa | Error::LowerBoundMissing) => None,
        Err(e) => return Err(e),
    };
    let bounded_v = match bounded_v_criterion(chain, potential, opts) {
        Ok(r) => Some(r),
        Err(Error::InvalidSequence(_)) => None,
        Err(e) => return Err(e),
    };
    let ground_state = match k {
        Some(k) if lambda < k => {
            let upto = chain
                .len_limit()
                .map_or(COMPARISON_WINDOW, |l| l.saturating_sub(1).min(COMPARISON_WINDOW));
            let v = match eigen_recursion(chain, potential, lambda, 1.0, upto) {
                Ok(v) => v,
                Err(Error::Overflow { last_finite }) if last_finite > MIN_BUDGET => {
                    eigen_recursion(chain, potential, lambda, 1.0, last_finite)?
                }
                Err(e) => return Err(e),
            };
            Some(transformed_hamburger_direct(&v, opts)?)
        }
        _ => None,
    };
    let verdict = if berezanskii.verdict.holds() || bounded_potential.as_ref().is_some_and(|r| r.verdict.holds()) {
        Verdict::Holds
    } else if let Some(v) = bounded_v.as_ref().filter(|r| r.verdict != Verdict::Inconclusive) {
        v.verdict
    } else {
        ground_state
            .as_ref()
            .map_or(Verdict::Inconclusive, Verdict::on_divergence)
    };
    Ok(SchrodingerReport {
        lambda,
        berezanskii,
        bounded_potential,
        bounded_v,
        ground_state,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BirthDeath {
        BirthDeath::new(SequenceSpec::constant(1.0), SequenceSpec::constant(1.0))
    }

    #[test]
    fn recursion_matches_hand_values() {
        let v = eigen_recursion(&unit(), &Potential::zero(), -1.0, 1.0, 3).unwrap();
        let vals: Vec<f64> = (0..4).map(|r| v.value(r).unwrap()).collect();
        assert_eq!(vals, vec![1.0, 2.0, 5.0, 13.0]);
        assert!(v.positive && v.strictly_increasing());
    }

    #[test]
    fn zero_start_and_harmonic_constant() {
        let z = eigen_recursion(&unit(), &Potential::zero(), -1.0, 0.0, 10).unwrap();
        assert!(z.values.iter().all(|x| x.value() == 0.0));
        assert!(!z.positive);
        let one = eigen_recursion(&unit(), &Potential::zero(), 0.0, 1.0, 10).unwrap();
        assert!(one.values.iter().all(|x| x.value() == 1.0));
    }

    #[test]
    fn rescaling_keeps_residual_small() {
        let v = eigen_recursion(&unit(), &Potential::constant(5.0), -1.0, 1.0, 2000).unwrap();
        assert!(v.values.last().unwrap().exp2 > 0);
        assert!(v.residual().unwrap() <= RESIDUAL_TOL);
        assert!(v.ln_value(2000).unwrap() > 1000.0);
    }

    #[test]
    fn table_potential_overflow_reports_index() {
        let c = BirthDeath::new(SequenceSpec::constant(1e-300), SequenceSpec::constant(1.0));
        let err = eigen_recursion(&c, &Potential::constant(1e300), -1.0, 1.0, 10).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn transform_hand_values_and_identity() {
        let v = eigen_recursion(&unit(), &Potential::zero(), -1.0, 1.0, 3).unwrap();
        let gs = ground_state_transform(&v).unwrap();
        assert_eq!(gs.chain.edge.table()[..2], [2.0, 10.0]);
        assert_eq!(gs.chain.measure.table()[..3], [1.0, 4.0, 25.0]);
        assert_eq!(gs.shift, -1.0);
        let one = eigen_recursion(&unit(), &Potential::zero(), 0.0, 1.0, 5).unwrap();
        let id = ground_state_transform(&one).unwrap();
        assert_eq!(id.chain, unit());
        assert_eq!(id.shift, 0.0);
    }

    #[test]
    fn bounded_potential_cases() {
        let opts = SeriesOptions::default();
        let r = bounded_potential_esa(&unit(), &Potential::constant(5.0), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.comparison_lambda, -1.0);
        let r = bounded_potential_esa(&unit(), &Potential::zero(), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let err = bounded_potential_esa(&BirthDeath::unit_power(4.0), &Potential::zero(), &opts).unwrap_err();
        assert!(matches!(err, Error::ChainNotEsa));
        let unbounded = Potential::Closed {
            table: vec![],
            tail: crate::graph::PotentialTail::Power { c: -1.0, p: 1.0 },
        };
        let err = bounded_potential_esa(&unit(), &unbounded, &opts).unwrap_err();
        assert!(matches!(err, Error::LowerBoundMissing));
    }

    #[test]
    fn esa_potential_on_unit_chain() {
        let g = GraphSpec::Chain(unit());
        let p = make_esa_potential(&g, &SeriesOptions::default()).unwrap();
        assert_eq!(p.eval(Vertex::Chain(0)).unwrap(), 1.0);
        assert_eq!(p.eval(Vertex::Chain(5)).unwrap(), 2.0);
        let chain_rule = p.chain_potential().unwrap();
        assert_eq!(chain_rule.eval(0).unwrap(), 1.0);
        assert_eq!(chain_rule.eval(7).unwrap(), 2.0);
        assert!(p.certificates.iter().all(|c| c.verdict.diverges()));
    }

    #[test]
    fn bounded_v_examples() {
        let opts = SeriesOptions::default();
        let c = BirthDeath::new(SequenceSpec::exponential(1.0, 4.0), SequenceSpec::constant(1.0));
        let r = bounded_v_criterion(&c, &Potential::constant(1.0), &opts).unwrap();
        assert!(r.series.converges());
        assert_eq!(r.verdict, Verdict::Holds);
        let r = bounded_v_criterion(&unit(), &Potential::zero(), &opts).unwrap();
        assert!(r.series.diverges());
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn hc_unit_measure_is_plain_laplacian() {
        let c = BirthDeath::new(SequenceSpec::power(1.0, 0.5), SequenceSpec::constant(1.0));
        let rec = hc_equivalence(&c, &SeriesOptions::default()).unwrap();
        for (r, w) in rec.weights.iter().enumerate() {
            assert!((w - c.b(r).unwrap()).abs() < 1e-15);
        }
        assert!(rec.potential.iter().all(|&w| w == 0.0));
        assert!(rec.conjugation_gap <= 1e-10);
    }

    #[test]
    fn berezanskii_examples() {
        let opts = SeriesOptions::default();
        assert_eq!(berezanskii_esa(&unit(), &opts).unwrap().verdict, Verdict::Holds);
        let c = BirthDeath::new(SequenceSpec::exponential(1.0, 4.0), SequenceSpec::constant(1.0));
        let r = berezanskii_esa(&c, &opts).unwrap();
        assert!(r.series.converges());
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
