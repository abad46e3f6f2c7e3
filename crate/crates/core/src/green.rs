//! Green's functions by exhaustion, their closed form on chains, and the
//! square-integrable harmonic witnesses they produce.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::criteria::{hamburger_esa, is_transient, measure_finite, Recurrence, Verdict};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{window, BirthDeath, End, GraphSpec, StarLike, TwoRayStar, Vertex, Window};
use crate::harmonic::{star_harmonic, vanishing_harmonic, EndValues, HarmonicSolution, ResidualReport, RESIDUAL_TOL};
use crate::linalg::{SparseSym, SymBanded};
use crate::numeric::CompensatedSum;
use crate::sequence::TailSum;
use crate::series::{decide, decide_series, Outcome, SeriesOptions, SeriesShape, SeriesVerdict};

/// Window depth used for witness residual checks.
pub const WITNESS_DEPTH: usize = 200;
/// Slack allowed in the monotonicity certificate, relative to `g(pole)`.
const MONOTONE_SLACK: f64 = 1e-10;

/// Green's function of one exhaustion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenLevel {
    pub radius: usize,
    pub labels: Vec<Vertex>,
    /// Zero on the boundary.
    pub values: Vec<f64>,
    pub boundary: Vec<bool>,
}

impl GreenLevel {
    pub fn value(&self, v: Vertex) -> Option<f64> {
        self.labels.iter().position(|&l| l == v).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenExhaustion {
    pub pole: Vertex,
    pub levels: Vec<GreenLevel>,
}

impl GreenExhaustion {
    pub fn pole_values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value(self.pole).unwrap_or(0.0)).collect()
    }
}

fn is_path(g: &GraphSpec) -> bool {
    matches!(g, GraphSpec::Chain(_) | GraphSpec::TwoRayStar(_))
}

/// Solve `Delta g = 1_pole / m(pole)` inside the window, `g = 0` on its boundary.
pub fn solve_window(w: &Window, pole: usize, banded: bool) -> Result<Vec<f64>> {
    if w.boundary[pole] {
        return Err(Error::InvalidGraph(format!(
            "pole {} lies on the window boundary",
            w.labels[pole]
        )));
    }
    let interior: Vec<usize> = w.interior().collect();
    let slot: BTreeMap<usize, usize> = interior.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let n = interior.len();
    let mut rhs = vec![0.0; n];
    rhs[slot[&pole]] = 1.0;
    let solution = if banded {
        let mut a = SymBanded::zeros(n, 1);
        for (p, &x) in interior.iter().enumerate() {
            for &(y, b) in w.graph.neighbours(x) {
                a.add(p, p, b);
                if let Some(&q) = slot.get(&y) {
                    if q < p {
                        a.add(p, q, -b);
                    }
                }
            }
        }
        a.solve(&rhs)?
    } else {
        let mut a = SparseSym::zeros(n);
        for (p, &x) in interior.iter().enumerate() {
            for &(y, b) in w.graph.neighbours(x) {
                a.add(p, p, b);
                if let Some(&q) = slot.get(&y) {
                    if q < p {
                        a.add(p, q, -b);
                    }
                }
            }
        }
        a.solve(&rhs)?
    };
    let mut values = vec![0.0; w.labels.len()];
    for (p, &x) in interior.iter().enumerate() {
        values[x] = solution[p];
    }
    Ok(values)
}

fn root_for(g: &GraphSpec, pole: Vertex) -> usize {
    match (g, pole) {
        (GraphSpec::Finite(_), Vertex::Node(i)) => i,
        _ => 0,
    }
}

/// Green's function approximants `g_n` on the windows of the given radii,
/// with the certificate `0 < g_n <= g_n(pole)` and `g_n <= g_{n+1}`.
pub fn green_exhaustion(g: &GraphSpec, pole: Vertex, radii: &[usize]) -> Result<GreenExhaustion> {
    let mut levels: Vec<GreenLevel> = Vec::new();
    for &radius in radii {
        let w = window(g, radius, root_for(g, pole))?;
        let p = w
            .index_of(pole)
            .ok_or_else(|| Error::MissingValue(format!("pole {pole} outside the window")))?;
        let values = solve_window(&w, p, is_path(g))?;
        let top = values[p];
        for i in w.interior() {
            if !(values[i] > 0.0 && values[i] <= top * (1.0 + MONOTONE_SLACK)) {
                return Err(Error::MonotonicityViolation {
                    level: levels.len(),
                    vertex: w.labels[i].to_string(),
                });
            }
        }
        let level = GreenLevel {
            radius,
            labels: w.labels,
            values,
            boundary: w.boundary,
        };
        if let Some(prev) = levels.last() {
            for (i, &l) in prev.labels.iter().enumerate() {
                let now = level.value(l).unwrap_or(0.0);
                if now < prev.values[i] - MONOTONE_SLACK * top {
                    return Err(Error::MonotonicityViolation {
                        level: levels.len(),
                        vertex: l.to_string(),
                    });
                }
            }
        }
        levels.push(level);
    }
    Ok(GreenExhaustion { pole, levels })
}

/// Green's function on a finite graph with an explicit Dirichlet set.
pub fn green_dirichlet(g: &crate::graph::FiniteGraph, pole: usize, dirichlet: &[usize]) -> Result<Vec<f64>> {
    let labels = (0..g.len()).map(Vertex::Node).collect();
    let mut boundary = vec![false; g.len()];
    for &d in dirichlet {
        boundary[d] = true;
    }
    let w = Window {
        labels,
        graph: g.clone(),
        boundary,
    };
    solve_window(&w, pole, false)
}

/// Limit of the exhaustion on a chain with pole `0`: `sum_{k>=r} 1/b(k)`.
pub fn green_closed_form(chain: &BirthDeath, r: usize) -> Result<TailSum> {
    chain.edge.reciprocal().tail_sum(r)?.ok_or(Error::NotTransient)
}

/// Whether the Green's function is square summable towards infinity.
pub fn green_l2_end(chain: &BirthDeath, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    if is_transient(chain, opts)?.0 != Recurrence::Transient {
        return Err(Error::NotTransient);
    }
    decide_series(&chain.edge, &chain.measure, SeriesShape::GreenTail, opts)
}

/// Which ends of a two-ray star are transient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiouvilleCase {
    BothRecurrent,
    BothTransient,
    TransientPositiveOnly,
    TransientNegativeOnly,
    Undetermined,
}

/// Outcome of the square-integrable Liouville test on a two-ray star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleVerdict {
    pub verdict: Verdict,
    pub case: LiouvilleCase,
    pub reason: String,
    pub witness: Option<HarmonicSolution>,
    pub witness_l2: Vec<SeriesVerdict>,
    pub residual: Option<ResidualReport>,
    /// Sub-verdicts keyed by name, e.g. `esa+`, `green_l2-`, `measure+`.
    pub checks: BTreeMap<String, SeriesVerdict>,
}

fn end_tag(end: End) -> &'static str {
    match end {
        End::Positive => "+",
        End::Negative => "-",
    }
}

/// Whether non-constant harmonic functions in `l^2` exist on a two-ray star.
///
/// When several sufficient conditions hold for two transient ends, the
/// finite-total-measure witness is preferred, then vanishing at `+inf`.
pub fn liouville_two_ray(star: &TwoRayStar, opts: &SeriesOptions) -> Result<LiouvilleVerdict> {
    let pos = star.ray(End::Positive)?;
    let neg = star.ray(End::Negative)?;
    let mut checks = BTreeMap::new();
    let (rec_pos, s) = is_transient(&pos, opts)?;
    checks.insert("recurrence+".to_string(), s);
    let (rec_neg, s) = is_transient(&neg, opts)?;
    checks.insert("recurrence-".to_string(), s);

    let esa = |end: End, ray: &BirthDeath, checks: &mut BTreeMap<String, SeriesVerdict>| -> Result<Verdict> {
        let v = hamburger_esa(ray, opts)?;
        let out = Verdict::on_divergence(&v);
        checks.insert(format!("esa{}", end_tag(end)), v);
        Ok(out)
    };
    let measure = |end: End, ray: &BirthDeath, checks: &mut BTreeMap<String, SeriesVerdict>| -> Result<Verdict> {
        let (f, v) = measure_finite(ray, opts)?;
        checks.insert(format!("measure{}", end_tag(end)), v);
        Ok(f)
    };
    let green_l2 = |end: End, ray: &BirthDeath, checks: &mut BTreeMap<String, SeriesVerdict>| -> Result<Verdict> {
        let v = green_l2_end(ray, opts)?;
        let out = Verdict::on_convergence(&v);
        checks.insert(format!("green_l2{}", end_tag(end)), v);
        Ok(out)
    };

    use Recurrence::*;
    let (case, fails, witness): (LiouvilleCase, Verdict, Option<(String, HarmonicSolution)>) = match (rec_pos, rec_neg)
    {
        (Recurrent, Recurrent) => {
            let ep = esa(End::Positive, &pos, &mut checks)?;
            let en = esa(End::Negative, &neg, &mut checks)?;
            let fails = ep.negate().and(en.negate());
            let w = if fails.holds() {
                Some((
                    "both ends recurrent and neither end essentially self-adjoint".to_string(),
                    star_harmonic(star, 0.0, 1.0, WITNESS_DEPTH)?,
                ))
            } else {
                None
            };
            (LiouvilleCase::BothRecurrent, fails, w)
        }
        (Transient, Transient) => {
            let gp = green_l2(End::Positive, &pos, &mut checks)?;
            let gn = green_l2(End::Negative, &neg, &mut checks)?;
            let mp = measure(End::Positive, &pos, &mut checks)?;
            let mn = measure(End::Negative, &neg, &mut checks)?;
            let c1 = gp.and(mn);
            let c2 = gn.and(mp);
            let c3 = mp.and(mn);
            let fails = c1.or(c2).or(c3);
            let w = if c3.holds() {
                Some((
                    "finite total measure".to_string(),
                    star_harmonic(star, 0.0, 1.0, WITNESS_DEPTH)?,
                ))
            } else if c1.holds() {
                Some((
                    "Green's function square summable at +inf and finite measure towards -inf".to_string(),
                    vanishing_harmonic(star, End::Positive, WITNESS_DEPTH)?,
                ))
            } else if c2.holds() {
                Some((
                    "Green's function square summable at -inf and finite measure towards +inf".to_string(),
                    vanishing_harmonic(star, End::Negative, WITNESS_DEPTH)?,
                ))
            } else {
                None
            };
            (LiouvilleCase::BothTransient, fails, w)
        }
        (Transient, Recurrent) | (Recurrent, Transient) => {
            let (t_end, t_ray, r_end, r_ray, case) = if rec_pos == Transient {
                (
                    End::Positive,
                    &pos,
                    End::Negative,
                    &neg,
                    LiouvilleCase::TransientPositiveOnly,
                )
            } else {
                (
                    End::Negative,
                    &neg,
                    End::Positive,
                    &pos,
                    LiouvilleCase::TransientNegativeOnly,
                )
            };
            let e = esa(r_end, r_ray, &mut checks)?;
            let g = green_l2(t_end, t_ray, &mut checks)?;
            let m = measure(t_end, t_ray, &mut checks)?;
            let fails = e.negate().and(g.or(m));
            let w = if fails.holds() {
                if g.holds() {
                    Some((
                            format!(
                                "recurrent end {r_end} not essentially self-adjoint, Green's function square summable at {t_end}"
                            ),
                            vanishing_harmonic(star, t_end, WITNESS_DEPTH)?,
                        ))
                } else {
                    Some((
                        format!("recurrent end {r_end} not essentially self-adjoint, finite measure towards {t_end}"),
                        star_harmonic(star, 0.0, 1.0, WITNESS_DEPTH)?,
                    ))
                }
            } else {
                None
            };
            (case, fails, w)
        }
        _ => (LiouvilleCase::Undetermined, Verdict::Inconclusive, None),
    };

    let verdict = fails.negate();
    let mut out = LiouvilleVerdict {
        verdict,
        case,
        reason: String::new(),
        witness: None,
        witness_l2: Vec::new(),
        residual: None,
        checks,
    };
    match witness {
        Some((reason, h)) => {
            let residual = h.residual()?;
            let l2: Vec<SeriesVerdict> = [End::Positive, End::Negative]
                .iter()
                .map(|&e| h.end(e).expect("star witness has both ends").l2_verdict(opts))
                .collect::<Result<_>>()?;
            if !residual.passes(RESIDUAL_TOL) || l2.iter().any(|v| v.outcome != Outcome::Converges) {
                return Err(Error::AssertionFailure(format!(
                    "Liouville witness failed verification ({reason})"
                )));
            }
            out.reason = reason;
            out.residual = Some(residual);
            out.witness_l2 = l2;
            out.witness = Some(h);
        }
        None => {
            out.reason = match (case, verdict) {
                (LiouvilleCase::Undetermined, _) => "recurrence of an end is undetermined".into(),
                (_, Verdict::Holds) => "no sufficient condition for a square-summable harmonic function holds".into(),
                _ => "sub-verdicts inconclusive".into(),
            };
        }
    }
    Ok(out)
}

/// Exact Green's function of a transient star-like graph with pole at a hub vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarLikeGreen {
    pub pole: usize,
    pub hub: Vec<f64>,
    /// Current `kappa_i g(attach_i)` escaping through each explicit ray.
    pub ray_current: Vec<f64>,
    /// Escape conductance of each explicit ray (zero if recurrent).
    pub ray_conductance: Vec<f64>,
    /// Total escape conductance of the ray family.
    pub family_conductance: f64,
    pub family_resistance: Option<f64>,
}

impl StarLikeGreen {
    /// Values along explicit ray `i`, depths `0..=depth`.
    pub fn ray_values(&self, s: &StarLike, i: usize, depth: usize) -> Result<Vec<f64>> {
        self.ray_end(s, i)?.values(depth)
    }

    /// The Green's function along ray `i` seen from the ray root.
    pub fn ray_end(&self, s: &StarLike, i: usize) -> Result<EndValues> {
        let ray = &s.rays[i];
        let current = self.ray_current[i];
        let at_hub = self.hub[ray.attach];
        if current == 0.0 {
            return Ok(EndValues {
                ray: ray.chain.clone(),
                center: at_hub,
                flux: 0.0,
                vanishing: false,
            });
        }
        Ok(EndValues {
            ray: ray.chain.clone(),
            center: at_hub - current / ray.weight,
            flux: -current,
            vanishing: true,
        })
    }
}

fn ray_resistance(chain: &BirthDeath, opts: &SeriesOptions) -> Result<Option<f64>> {
    Ok(match is_transient(chain, opts)?.0 {
        Recurrence::Transient => Some(chain.edge.reciprocal().tail_sum(0)?.ok_or(Error::NotTransient)?.value),
        Recurrence::Recurrent => None,
        Recurrence::Inconclusive => return Err(Error::SolverFailure("recurrence of a ray is undetermined".into())),
    })
}

/// Green's function with pole at hub vertex `pole`, from the effective
/// conductance each ray offers towards infinity.
pub fn star_like_green(s: &StarLike, pole: usize, opts: &SeriesOptions) -> Result<StarLikeGreen> {
    let h = s.hub.len();
    if pole >= h {
        return Err(Error::InvalidGraph(format!("pole {pole} is not a hub vertex")));
    }
    let mut escape = vec![0.0; h];
    let mut ray_conductance = Vec::with_capacity(s.rays.len());
    for ray in &s.rays {
        let k = match ray_resistance(&ray.chain, opts)? {
            Some(r) => 1.0 / (1.0 / ray.weight + r),
            None => 0.0,
        };
        ray_conductance.push(k);
        escape[ray.attach] += k;
    }
    let (mut family_conductance, mut family_resistance) = (0.0, None);
    if let Some(fam) = &s.family {
        if let Some(r) = ray_resistance(&fam.chain, opts)? {
            family_resistance = Some(r);
            // sum_i w_i / (1 + w_i R): summed to the budget, remainder bounded by the weight tail
            let w = fam.weight.values(opts.budget)?;
            let mut acc = CompensatedSum::new();
            for wi in &w {
                acc.add(wi / (1.0 + wi * r));
            }
            let rest = fam
                .weight
                .tail_sum(opts.budget)?
                .ok_or_else(|| Error::DivergentDegree(Vertex::Hub(fam.attach).to_string()))?;
            family_conductance = acc.value() + 0.5 * rest.value;
            escape[fam.attach] += family_conductance;
        }
    }
    if escape.iter().all(|&k| k == 0.0) {
        return Err(Error::NotTransient);
    }
    let mut a = DMatrix::<f64>::zeros(h, h);
    for x in 0..h {
        for &(y, b) in s.hub.neighbours(x) {
            a[(x, x)] += b;
            a[(x, y)] -= b;
        }
        a[(x, x)] += escape[x];
    }
    let mut rhs = DVector::<f64>::zeros(h);
    rhs[pole] = 1.0;
    let hub = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { row: pole, pivot: 0.0 })?;
    let hub: Vec<f64> = hub.iter().copied().collect();
    let ray_current = s
        .rays
        .iter()
        .zip(&ray_conductance)
        .map(|(r, k)| k * hub[r.attach])
        .collect();
    Ok(StarLikeGreen {
        pole,
        hub,
        ray_current,
        ray_conductance,
        family_conductance,
        family_resistance,
    })
}

/// Harmonic function in `l^2` on a transient star-like graph: the Green's
/// function off a non-ESA ray, continued harmonically along that ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarLikeWitness {
    pub ray: usize,
    pub green: StarLikeGreen,
    /// Witness along the chosen ray.
    pub chosen: EndValues,
    /// Green's function along the other explicit rays.
    pub others: Vec<(usize, EndValues)>,
    pub l2: Verdict,
    pub l2_parts: BTreeMap<String, SeriesVerdict>,
    pub residual: ResidualReport,
}

impl StarLikeWitness {
    pub fn hub_value(&self, x: usize) -> f64 {
        self.green.hub[x]
    }
}

pub fn starlike_liouville_witness(s: &StarLike, opts: &SeriesOptions) -> Result<StarLikeWitness> {
    crate::graph::check_condition_a(&GraphSpec::StarLike(s.clone()))?;
    let chosen_ray = s
        .rays
        .iter()
        .enumerate()
        .find_map(|(i, r)| match hamburger_esa(&r.chain, opts) {
            Ok(v) if v.converges() => Some(Ok(i)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .transpose()?;
    let Some(ray_idx) = chosen_ray else {
        if let Some(fam) = &s.family {
            if hamburger_esa(&fam.chain, opts)?.converges() {
                return Err(Error::Unsupported(
                    "the only rays failing essential self-adjointness belong to a ray family".into(),
                ));
            }
        }
        return Err(Error::NoNonEsaRay);
    };
    let ray = &s.rays[ray_idx];
    let pole = ray.attach;
    let green = star_like_green(s, pole, opts)?;
    let g_pole = green.hub[pole];

    // Flux out of the pole through every neighbour except the chosen root.
    let mut out_flux = CompensatedSum::new();
    for &(y, b) in s.hub.neighbours(pole) {
        out_flux.add(b * (g_pole - green.hub[y]));
    }
    for (i, r) in s.rays.iter().enumerate() {
        if i != ray_idx && r.attach == pole {
            out_flux.add(green.ray_current[i]);
        }
    }
    if s.family.as_ref().is_some_and(|f| f.attach == pole) {
        out_flux.add(green.family_conductance * g_pole);
    }
    let root_value = g_pole + out_flux.value() / ray.weight;
    let flux = ray.weight * (root_value - g_pole);
    let chosen = EndValues {
        ray: ray.chain.clone(),
        center: root_value,
        flux,
        vanishing: false,
    };

    let mut l2_parts = BTreeMap::new();
    l2_parts.insert(format!("ray{ray_idx}"), chosen.l2_verdict(opts)?);
    let mut others = Vec::new();
    for i in 0..s.rays.len() {
        if i == ray_idx {
            continue;
        }
        let e = green.ray_end(s, i)?;
        l2_parts.insert(format!("ray{i}"), e.l2_verdict(opts)?);
        others.push((i, e));
    }
    if let Some(fam) = &s.family {
        let g_att = green.hub[fam.attach];
        let terms = match green.family_resistance {
            Some(r) => {
                // member i carries current I_i = g w_i / (1 + w_i r) and g = I_i G(k) along it
                let tail = decide_series(&fam.chain.edge, &fam.chain.measure, SeriesShape::GreenTail, opts)?;
                if tail.outcome == Outcome::Diverges {
                    return Err(Error::GreenNotL2);
                }
                let t = tail.estimate.unwrap_or(0.0);
                let g0 = r;
                let current = Expr::Const(g_att)
                    .mul(Expr::seq(&fam.weight))
                    .div(Expr::Const(1.0).add(Expr::Const(r).mul(Expr::seq(&fam.weight))));
                current.square().mul(
                    Expr::Const(g0 * g0)
                        .mul(Expr::seq(&fam.root_measure))
                        .add(Expr::Const(t)),
                )
            }
            None => {
                let rest = fam.chain.measure.skip(1)?;
                let m_rest = rest.total()?.ok_or(Error::GreenNotL2)?;
                Expr::Const(g_att * g_att).mul(Expr::seq(&fam.root_measure).add(Expr::Const(m_rest)))
            }
        };
        l2_parts.insert("family".into(), decide(&terms, opts)?);
    }
    for (name, v) in &l2_parts {
        if name != &format!("ray{ray_idx}") && v.outcome == Outcome::Diverges {
            return Err(Error::GreenNotL2);
        }
    }
    let l2 = l2_parts
        .values()
        .map(Verdict::on_convergence)
        .fold(Verdict::Holds, Verdict::and);

    let residual = starlike_residual(s, &green, ray_idx, &chosen, &others, WITNESS_DEPTH)?;
    Ok(StarLikeWitness {
        ray: ray_idx,
        green,
        chosen,
        others,
        l2,
        l2_parts,
        residual,
    })
}

fn starlike_residual(
    s: &StarLike,
    green: &StarLikeGreen,
    ray_idx: usize,
    chosen: &EndValues,
    others: &[(usize, EndValues)],
    depth: usize,
) -> Result<ResidualReport> {
    let mut ray_vals: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    ray_vals.insert(ray_idx, chosen.values(depth)?);
    for (i, e) in others {
        ray_vals.insert(*i, e.values(depth)?);
    }
    let mut report = ResidualReport {
        max_abs: 0.0,
        max_relative: 0.0,
        worst: None,
        flux_relative: 0.0,
    };
    let mut record = |flux: f64, scale: f64, m: f64, v: Vertex| {
        let abs = flux.abs() / m;
        let rel = abs / (scale / m).max(1.0);
        report.max_abs = report.max_abs.max(abs);
        if rel > report.max_relative {
            report.max_relative = rel;
            report.worst = Some(v);
        }
    };
    for x in 0..s.hub.len() {
        let gx = green.hub[x];
        let mut flux = CompensatedSum::new();
        let mut scale = 0.0;
        for &(y, b) in s.hub.neighbours(x) {
            flux.add(b * (gx - green.hub[y]));
            scale += b * (gx.abs() + green.hub[y].abs());
        }
        for (i, r) in s.rays.iter().enumerate() {
            if r.attach == x {
                let root = ray_vals[&i][0];
                flux.add(r.weight * (gx - root));
                scale += r.weight * (gx.abs() + root.abs());
            }
        }
        if let Some(f) = &s.family {
            if f.attach == x {
                let c = green.family_conductance * gx;
                flux.add(c);
                scale += c.abs();
            }
        }
        record(flux.value(), scale, s.hub.measure[x], Vertex::Hub(x));
    }
    for (i, r) in s.rays.iter().enumerate() {
        let vals = &ray_vals[&i];
        for d in 0..depth {
            let prev = if d == 0 { green.hub[r.attach] } else { vals[d - 1] };
            let left = if d == 0 { r.weight } else { r.chain.b(d - 1)? };
            let right = r.chain.b(d)?;
            let here = vals[d];
            let flux = left * (here - prev) + right * (here - vals[d + 1]);
            let scale = left * (here.abs() + prev.abs()) + right * (here.abs() + vals[d + 1].abs());
            record(flux, scale, r.chain.m(d)?, Vertex::Ray { ray: i, depth: d });
        }
    }
    Ok(report)
}

/// Constant `C` with `C g_{x0,n} >= g_{x,n}` on every exhaustion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    pub constant: f64,
    pub levels_checked: usize,
    /// Smallest `C g_{x0,n} - g_{x,n}` seen, relative to `g_{x,n}(x)`.
    pub min_margin: f64,
}

pub fn green_pole_comparability(
    g: &GraphSpec,
    x0: Vertex,
    x: Vertex,
    omega: &[Vertex],
    radii: &[usize],
) -> Result<Comparability> {
    if radii.is_empty() {
        return Err(Error::MissingValue("at least one exhaustion radius".into()));
    }
    let first = window(g, radii[0], root_for(g, x0))?;
    let omega_set: BTreeSet<Vertex> = omega.iter().copied().collect();
    if !omega_set.contains(&x0) || !omega_set.contains(&x) {
        return Err(Error::WindowDisconnected);
    }
    let mut idx = Vec::new();
    for &v in omega {
        match first.index_of(v) {
            Some(i) if !first.boundary[i] => idx.push(i),
            _ => return Err(Error::WindowDisconnected),
        }
    }
    // connectivity of omega inside the first window
    let inside: BTreeSet<usize> = idx.iter().copied().collect();
    let mut seen = BTreeSet::from([idx[0]]);
    let mut queue = VecDeque::from([idx[0]]);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in first.graph.neighbours(i) {
            if inside.contains(&j) && seen.insert(j) {
                queue.push_back(j);
            }
        }
    }
    if seen.len() != inside.len() {
        return Err(Error::WindowDisconnected);
    }
    let ex0 = green_exhaustion(g, x0, radii)?;
    let ex = green_exhaustion(g, x, radii)?;
    let constant = if x0 == x {
        1.0
    } else {
        let deepest = ex.levels.last().expect("non-empty");
        omega
            .iter()
            .map(|&v| deepest.value(v).unwrap_or(0.0) / ex0.levels[0].value(v).unwrap_or(f64::NAN))
            .fold(0.0, f64::max)
    };
    let mut min_margin = f64::INFINITY;
    for (a, b) in ex0.levels.iter().zip(&ex.levels) {
        let scale = b.value(x).unwrap_or(1.0);
        for (i, &l) in a.labels.iter().enumerate() {
            let margin = (constant * a.values[i] - b.value(l).unwrap_or(0.0)) / scale;
            min_margin = min_margin.min(margin);
        }
    }
    if min_margin < -1e-10 {
        return Err(Error::AssertionFailure(format!(
            "comparability constant {constant} violated by {min_margin:e}"
        )));
    }
    Ok(Comparability {
        constant,
        levels_checked: radii.len(),
        min_margin,
    })
}
