//! Graph surgery: splitting a graph into two parts and the edges between
//! them, boundary degrees, pendant completions and star assembly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::criteria::{hamburger_esa, Verdict};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{check_condition_a, BirthDeath, FiniteGraph, GraphSpec, PendantChain, Ray, RayFamily, StarLike};
use crate::sequence::SequenceSpec;
use crate::series::{decide, pendant_expr, Outcome, SeriesOptions, SeriesVerdict};

/// Spectral parameter of the pendant certificate.
pub const PENDANT_LAMBDA: f64 = -1.0;
pub const DEFAULT_PROBE_DEPTH: usize = 10_000;
pub const DECOMPOSITION_TOL: f64 = 1e-12;
/// Growth between the two halves of a sample that counts as unbounded.
const GROWTH_FACTOR: f64 = 10.0;

/// Which part an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Inner,
    Outer,
    Boundary,
}

/// `X = X1 ⊔ X2` with `b = b1 + b2 + b_boundary`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub x1: BTreeSet<usize>,
    pub x2: BTreeSet<usize>,
    /// Vertices with a neighbour on the other side.
    pub x3: BTreeSet<usize>,
    pub edges: Vec<(usize, usize, f64, Part)>,
    /// `Deg_boundary(x) = (1/m(x)) sum_{y in X3} b_boundary(x, y)` on `X3`.
    pub deg_boundary: BTreeMap<usize, f64>,
}

impl Decomposition {
    fn weight(&self, part: Part, x: usize, y: usize) -> f64 {
        self.edges
            .iter()
            .find(|e| e.3 == part && ((e.0, e.1) == (x, y) || (e.0, e.1) == (y, x)))
            .map_or(0.0, |e| e.2)
    }

    pub fn b1(&self, x: usize, y: usize) -> f64 {
        self.weight(Part::Inner, x, y)
    }

    pub fn b2(&self, x: usize, y: usize) -> f64 {
        self.weight(Part::Outer, x, y)
    }

    pub fn b_boundary(&self, x: usize, y: usize) -> f64 {
        self.weight(Part::Boundary, x, y)
    }

    /// `Delta_part f` for the graph keeping only edges of `part`.
    pub fn laplacian(&self, g: &FiniteGraph, part: Part, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        for &(x, y, b, p) in &self.edges {
            if p == part {
                out[x] += b * (f[x] - f[y]);
                out[y] += b * (f[y] - f[x]);
            }
        }
        for (o, m) in out.iter_mut().zip(&g.measure) {
            *o /= m;
        }
        out
    }
}

pub fn decompose(g: &FiniteGraph, x1: &BTreeSet<usize>) -> Result<Decomposition> {
    if let Some(&x) = x1.iter().find(|&&x| x >= g.len()) {
        return Err(Error::InvalidGraph(format!("vertex {x} is not in the graph")));
    }
    let x2: BTreeSet<usize> = (0..g.len()).filter(|x| !x1.contains(x)).collect();
    let mut x3 = BTreeSet::new();
    let edges: Vec<_> = g
        .edges
        .iter()
        .map(|&(x, y, b)| {
            let part = match (x1.contains(&x), x1.contains(&y)) {
                (true, true) => Part::Inner,
                (false, false) => Part::Outer,
                _ => {
                    x3.insert(x);
                    x3.insert(y);
                    Part::Boundary
                }
            };
            (x, y, b, part)
        })
        .collect();
    let mut deg_boundary: BTreeMap<usize, f64> = x3.iter().map(|&x| (x, 0.0)).collect();
    for &(x, y, b, p) in &edges {
        if p == Part::Boundary {
            *deg_boundary.get_mut(&x).expect("boundary vertex") += b / g.measure[x];
            *deg_boundary.get_mut(&y).expect("boundary vertex") += b / g.measure[y];
        }
    }
    Ok(Decomposition {
        x1: x1.clone(),
        x2,
        x3,
        edges,
        deg_boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResidual {
    pub max_abs: f64,
    /// Relative to `(1/m) sum b (|f(x)| + |f(y)|)`.
    pub max_relative: f64,
}

/// `Delta f - (Delta_1 f_1 + Delta_2 f_2 + Delta_boundary f_3)` with each
/// `f_i` the restriction of `f` extended by zero.
pub fn verify_decomposition(g: &FiniteGraph, x1: &BTreeSet<usize>, f: &[f64]) -> Result<DecompositionResidual> {
    if f.len() != g.len() {
        return Err(Error::MissingValue(format!(
            "f has {} values for {} vertices",
            f.len(),
            g.len()
        )));
    }
    let d = decompose(g, x1)?;
    let restrict = |set: &BTreeSet<usize>| -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(x, &v)| if set.contains(&x) { v } else { 0.0 })
            .collect()
    };
    let full = g.laplacian(f);
    let l1 = d.laplacian(g, Part::Inner, &restrict(&d.x1));
    let l2 = d.laplacian(g, Part::Outer, &restrict(&d.x2));
    let l3 = d.laplacian(g, Part::Boundary, &restrict(&d.x3));
    let mut out = DecompositionResidual {
        max_abs: 0.0,
        max_relative: 0.0,
    };
    for x in 0..g.len() {
        let gap = (full[x] - (l1[x] + l2[x] + l3[x])).abs();
        let scale: f64 = g
            .neighbours(x)
            .iter()
            .map(|&(y, b)| b * (f[x].abs() + f[y].abs()))
            .sum::<f64>()
            / g.measure[x];
        out.max_abs = out.max_abs.max(gap);
        if scale > 0.0 {
            out.max_relative = out.max_relative.max(gap / scale);
        }
    }
    Ok(out)
}

/// How an infinite graph is split for boundary-degree questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "split", rename_all = "snake_case")]
pub enum Split {
    /// Chain vertices `0..=n` against the rest.
    Prefix { n: usize },
    /// Hub (or the centre of a two-ray star) against the rays.
    Hub,
    /// Chain vertices against their pendants.
    Spine,
    /// Explicit vertex set of a finite graph.
    Vertices { x1: BTreeSet<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum BoundaryBound {
    Bounded {
        #[serde(with = "crate::numeric::json_float")]
        sup: f64,
    },
    Unbounded {
        witness: usize,
        #[serde(with = "crate::numeric::json_float")]
        value: f64,
    },
    Inconclusive,
}

impl BoundaryBound {
    pub fn is_bounded(&self) -> bool {
        matches!(self, BoundaryBound::Bounded { .. })
    }

    fn join(self, other: Self) -> Self {
        match (self, other) {
            (u @ BoundaryBound::Unbounded { .. }, _) | (_, u @ BoundaryBound::Unbounded { .. }) => u,
            (BoundaryBound::Bounded { sup: a }, BoundaryBound::Bounded { sup: b }) => {
                BoundaryBound::Bounded { sup: a.max(b) }
            }
            _ => BoundaryBound::Inconclusive,
        }
    }
}

/// Boundedness of an infinite family of boundary degrees `d(r)`.
fn family_bound(d: &Expr, probe_depth: usize) -> Result<BoundaryBound> {
    let n = d.len_limit().map_or(probe_depth, |l| l.min(probe_depth)).max(1);
    let values = d.eval(n)?;
    let (witness, value) = values
        .iter()
        .copied()
        .enumerate()
        .filter(|v| v.1.is_finite())
        .fold((0, f64::NEG_INFINITY), |a, v| if v.1 > a.1 { v } else { a });
    if let Some(term) = d.asymptotic() {
        return Ok(if term.bounded() {
            BoundaryBound::Bounded {
                sup: value.max(term.eval(n as f64)),
            }
        } else {
            BoundaryBound::Unbounded { witness, value }
        });
    }
    let half = n / 2;
    let head = values[..half.max(1)].iter().copied().fold(0.0, f64::max);
    let rest = values[half.max(1)..].iter().copied().fold(0.0, f64::max);
    Ok(
        if rest > GROWTH_FACTOR * head || values.iter().any(|v| !v.is_finite()) {
            BoundaryBound::Unbounded { witness, value }
        } else if rest <= head {
            BoundaryBound::Bounded { sup: head }
        } else {
            BoundaryBound::Inconclusive
        },
    )
}

fn finite_bound(values: impl IntoIterator<Item = f64>) -> BoundaryBound {
    BoundaryBound::Bounded {
        sup: values.into_iter().fold(0.0, f64::max),
    }
}

/// Is `Deg_boundary` bounded on `X3` for the given split?
pub fn boundary_degree_bound(g: &GraphSpec, split: &Split, probe_depth: usize) -> Result<BoundaryBound> {
    let mismatch = || Error::Unsupported(format!("split {split:?} does not apply to a {} graph", g.kind()));
    match (g, split) {
        (GraphSpec::Chain(c), Split::Prefix { n }) => {
            let b = c.b(*n)?;
            Ok(finite_bound([b / c.m(*n)?, b / c.m(n + 1)?]))
        }
        (GraphSpec::TwoRayStar(s), Split::Hub) => {
            let (bp, bn) = (s.edge_between(0)?, s.edge_between(-1)?);
            Ok(finite_bound([(bp + bn) / s.m(0)?, bp / s.m(1)?, bn / s.m(-1)?]))
        }
        (GraphSpec::StarLike(s), Split::Hub) => {
            let mut hub = vec![0.0; s.hub.len()];
            let mut roots = Vec::new();
            for ray in &s.rays {
                hub[ray.attach] += ray.weight;
                roots.push(ray.weight / ray.chain.m(0)?);
            }
            let mut bound = BoundaryBound::Bounded { sup: 0.0 };
            if let Some(fam) = &s.family {
                match fam.weight.total()? {
                    Some(t) => hub[fam.attach] += t,
                    None => {
                        return Ok(BoundaryBound::Unbounded {
                            witness: 0,
                            value: f64::INFINITY,
                        })
                    }
                }
                let member_deg = Expr::seq(&fam.weight).div(Expr::seq(&fam.root_measure));
                bound = family_bound(&member_deg, probe_depth)?;
            }
            let hub_deg = hub.iter().zip(&s.hub.measure).map(|(b, m)| b / m);
            Ok(finite_bound(hub_deg.chain(roots)).join(bound))
        }
        (GraphSpec::PendantChain(p), Split::Spine) => {
            let pe = Expr::seq(&p.pendant_edge);
            let spine = family_bound(&pe.clone().div(Expr::seq(&p.base.measure)), probe_depth)?;
            let pendant = family_bound(&pe.div(Expr::seq(&p.pendant_measure)), probe_depth)?;
            Ok(spine.join(pendant))
        }
        (GraphSpec::Finite(f), Split::Vertices { x1 }) => {
            Ok(finite_bound(decompose(f, x1)?.deg_boundary.values().copied()))
        }
        _ => Err(mismatch()),
    }
}

/// `sum_k (Deg(x_k) / (Deg(x_k) - lambda))^2 m(x_k)` over the pendants.
pub fn pendant_certificate(
    pendant_edge: &SequenceSpec,
    pendant_measure: &SequenceSpec,
    opts: &SeriesOptions,
) -> Result<SeriesVerdict> {
    decide(&pendant_expr(pendant_edge, pendant_measure, PENDANT_LAMBDA), opts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PendantAttachment {
    pub graph: GraphSpec,
    pub lambda: f64,
    /// Absent for finite graphs, which are trivially essentially self-adjoint.
    pub certificate: Option<SeriesVerdict>,
    /// `Holds` when the supergraph is certified ESA.
    pub verdict: Verdict,
}

/// Hang one pendant vertex off every vertex of `g`.
pub fn attach_pendants(
    g: &GraphSpec,
    pendant_edge: &SequenceSpec,
    pendant_measure: &SequenceSpec,
    opts: &SeriesOptions,
) -> Result<PendantAttachment> {
    match g {
        GraphSpec::Chain(c) => {
            let certificate = pendant_certificate(pendant_edge, pendant_measure, opts)?;
            let verdict = if certificate.diverges() {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            };
            Ok(PendantAttachment {
                graph: GraphSpec::PendantChain(PendantChain {
                    base: c.clone(),
                    pendant_edge: pendant_edge.clone(),
                    pendant_measure: pendant_measure.clone(),
                }),
                lambda: PENDANT_LAMBDA,
                certificate: Some(certificate),
                verdict,
            })
        }
        GraphSpec::Finite(f) => {
            let n = f.len();
            let mut measure = f.measure.clone();
            let mut edges = f.edges.clone();
            for k in 0..n {
                measure.push(pendant_measure.eval(k)?);
                edges.push((k, n + k, pendant_edge.eval(k)?));
            }
            Ok(PendantAttachment {
                graph: GraphSpec::Finite(FiniteGraph::new(measure, edges)?),
                lambda: PENDANT_LAMBDA,
                certificate: None,
                verdict: Verdict::Holds,
            })
        }
        _ => Err(Error::Unsupported(format!("pendants on a {} graph", g.kind()))),
    }
}

/// A chain that is not ESA whose pendant supergraph is.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityBreak {
    pub graph: GraphSpec,
    /// Pendant certificate at `lambda = -1`; divergence makes the supergraph ESA.
    pub pendant: SeriesVerdict,
    /// Hamburger series of the base chain; convergence makes it not ESA.
    pub base: SeriesVerdict,
    pub supergraph_esa: Verdict,
    pub base_esa: Verdict,
    /// Both conditions hold.
    pub breaks: bool,
}

pub fn stability_break_example(
    chain: &BirthDeath,
    pendant_edge: &SequenceSpec,
    pendant_measure: &SequenceSpec,
    opts: &SeriesOptions,
) -> Result<StabilityBreak> {
    let base = hamburger_esa(chain, opts)?;
    if base.outcome == Outcome::Diverges {
        return Err(Error::BaseChainIsEsa);
    }
    let attached = attach_pendants(&GraphSpec::Chain(chain.clone()), pendant_edge, pendant_measure, opts)?;
    let pendant = attached.certificate.expect("chains carry a certificate");
    let base_esa = Verdict::on_divergence(&base);
    Ok(StabilityBreak {
        graph: attached.graph,
        breaks: pendant.diverges() && base.converges(),
        pendant,
        base,
        supergraph_esa: attached.verdict,
        base_esa,
    })
}

/// A ray given by the edges from its root into the hub.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayAttachment {
    pub edges: Vec<(usize, f64)>,
    pub chain: BirthDeath,
}

/// Validate and build a star-like graph.
pub fn assemble_star(hub: FiniteGraph, rays: Vec<RayAttachment>, family: Option<RayFamily>) -> Result<GraphSpec> {
    let mut built = Vec::with_capacity(rays.len());
    for (i, r) in rays.into_iter().enumerate() {
        let &[(attach, weight)] = r.edges.as_slice() else {
            return Err(Error::RayConditionViolated(format!(
                "ray {i} is joined to the hub by {} edges, expected exactly one",
                r.edges.len()
            )));
        };
        if attach >= hub.len() {
            return Err(Error::RayConditionViolated(format!(
                "ray {i} attaches to missing hub vertex {attach}"
            )));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::RayConditionViolated(format!(
                "ray {i} has attachment weight {weight}"
            )));
        }
        built.push(Ray {
            attach,
            weight,
            chain: r.chain,
        });
    }
    if let Some(fam) = &family {
        if fam.attach >= hub.len() {
            return Err(Error::RayConditionViolated(format!(
                "family attaches to missing hub vertex {}",
                fam.attach
            )));
        }
        if fam.weight.total()?.is_none() {
            return Err(Error::ConditionAFailure {
                vertex: format!("hub {}", fam.attach),
                detail: "attachment weights are not summable".into(),
            });
        }
    }
    let g = GraphSpec::StarLike(StarLike {
        hub,
        rays: built,
        family,
    });
    check_condition_a(&g)?;
    Ok(g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarLikeEsa {
    pub boundary: BoundaryBound,
    pub rays: Vec<SeriesVerdict>,
    /// Shared tail of the family members.
    pub family: Option<SeriesVerdict>,
    pub verdict: Verdict,
}

/// With a finite hub and bounded boundary degree the graph is ESA exactly
/// when every ray is. Unbounded boundary degree is an error.
pub fn star_like_esa(s: &StarLike, opts: &SeriesOptions) -> Result<StarLikeEsa> {
    let boundary = boundary_degree_bound(&GraphSpec::StarLike(s.clone()), &Split::Hub, DEFAULT_PROBE_DEPTH)?;
    let rays = s
        .rays
        .iter()
        .map(|r| hamburger_esa(&r.chain, opts))
        .collect::<Result<Vec<_>>>()?;
    let family = s
        .family
        .as_ref()
        .map(|f| hamburger_esa(&f.member(0)?, opts))
        .transpose()?;
    let ends = rays
        .iter()
        .chain(family.iter())
        .fold(Verdict::Holds, |acc, v| acc.and(Verdict::on_divergence(v)));
    let verdict = match boundary {
        BoundaryBound::Bounded { .. } => ends,
        BoundaryBound::Unbounded { witness, .. } => return Err(Error::BoundaryDegreeUnbounded(witness)),
        BoundaryBound::Inconclusive => Verdict::Inconclusive,
    };
    Ok(StarLikeEsa {
        boundary,
        rays,
        family,
        verdict,
    })
}
