//! Weighted graph specifications and finite windows into them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::asym::AsymptoticTerm;
use crate::error::{Error, Result};
use crate::sequence::SequenceSpec;

/// Birth-death chain on the non-negative integers.
///
/// `edge(k)` is the weight of `{k, k+1}` and `measure(k)` the mass of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirthDeath {
    pub edge: SequenceSpec,
    pub measure: SequenceSpec,
}

impl BirthDeath {
    pub fn new(edge: SequenceSpec, measure: SequenceSpec) -> Self {
        Self { edge, measure }
    }

    /// Unit edges with `m(r) = (r+1)^(-alpha)`.
    pub fn unit_power(alpha: f64) -> Self {
        Self::new(SequenceSpec::constant(1.0), SequenceSpec::power(1.0, -alpha))
    }

    pub fn b(&self, k: usize) -> Result<f64> {
        self.edge.eval(k)
    }

    pub fn m(&self, k: usize) -> Result<f64> {
        self.measure.eval(k)
    }

    /// Weighted degree `(b(r-1, r) + b(r, r+1)) / m(r)`.
    pub fn degree(&self, r: usize) -> Result<f64> {
        let left = if r == 0 { 0.0 } else { self.b(r - 1)? };
        Ok((left + self.b(r)?) / self.m(r)?)
    }

    /// Formal Laplacian of `f` at `r`, given `f(r-1), f(r), f(r+1)`.
    pub fn laplacian_at(&self, r: usize, prev: f64, here: f64, next: f64) -> Result<f64> {
        let left = if r == 0 { 0.0 } else { self.b(r - 1)? * (here - prev) };
        Ok((left + self.b(r)? * (here - next)) / self.m(r)?)
    }

    /// Number of vertices for which both sequences are defined.
    pub fn len_limit(&self) -> Option<usize> {
        match (self.edge.len_limit(), self.measure.len_limit()) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }
}

/// Two rays glued at a centre vertex `0`.
///
/// Positive side: `edge_pos(k) = b(k, k+1)`, `measure_pos(k) = m(k)`.
/// Negative side: `edge_neg(k) = b(-k, -k-1)`, `measure_neg(k) = m(-k-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoRayStar {
    pub edge_pos: SequenceSpec,
    pub measure_pos: SequenceSpec,
    pub edge_neg: SequenceSpec,
    pub measure_neg: SequenceSpec,
}

/// Which end of a two-ray star.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Positive,
    Negative,
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::Positive => write!(f, "+inf"),
            End::Negative => write!(f, "-inf"),
        }
    }
}

impl TwoRayStar {
    /// Both ends given by the same chain data.
    pub fn mirrored(chain: &BirthDeath) -> Result<Self> {
        Ok(Self {
            edge_pos: chain.edge.clone(),
            measure_pos: chain.measure.clone(),
            edge_neg: chain.edge.clone(),
            measure_neg: chain.measure.skip(1)?,
        })
    }

    pub fn from_rays(pos: &BirthDeath, neg: &BirthDeath) -> Result<Self> {
        Ok(Self {
            edge_pos: pos.edge.clone(),
            measure_pos: pos.measure.clone(),
            edge_neg: neg.edge.clone(),
            measure_neg: neg.measure.skip(1)?,
        })
    }

    /// The end seen as a chain rooted at the centre.
    pub fn ray(&self, end: End) -> Result<BirthDeath> {
        Ok(match end {
            End::Positive => BirthDeath::new(self.edge_pos.clone(), self.measure_pos.clone()),
            End::Negative => BirthDeath::new(
                self.edge_neg.clone(),
                self.measure_neg.prepend(self.measure_pos.eval(0)?)?,
            ),
        })
    }

    /// Weight of the edge `{i, i+1}` for integer `i`.
    pub fn edge_between(&self, i: i64) -> Result<f64> {
        if i >= 0 {
            self.edge_pos.eval(i as usize)
        } else {
            self.edge_neg.eval((-i - 1) as usize)
        }
    }

    pub fn m(&self, i: i64) -> Result<f64> {
        if i >= 0 {
            self.measure_pos.eval(i as usize)
        } else {
            self.measure_neg.eval((-i - 1) as usize)
        }
    }
}

/// A ray attached to a hub vertex by a single edge at its root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub attach: usize,
    pub weight: f64,
    pub chain: BirthDeath,
}

/// Countably many rays attached at one hub vertex, sharing edges and
/// measure below the root. Member `i` has root edge `weight(i)` and root
/// mass `root_measure(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFamily {
    pub attach: usize,
    pub weight: SequenceSpec,
    pub root_measure: SequenceSpec,
    pub chain: BirthDeath,
}

impl RayFamily {
    /// Member `i` as a chain of its own.
    pub fn member(&self, i: usize) -> Result<BirthDeath> {
        let rest = self.chain.measure.skip(1)?;
        Ok(BirthDeath::new(
            self.chain.edge.clone(),
            rest.prepend(self.root_measure.eval(i)?)?,
        ))
    }
}

/// Finite hub with rays attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarLike {
    pub hub: FiniteGraph,
    pub rays: Vec<Ray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<RayFamily>,
}

impl StarLike {
    /// A single hub vertex with two rays is a two-ray star.
    pub fn as_two_ray_star(&self) -> Result<Option<TwoRayStar>> {
        if self.hub.len() != 1 || self.rays.len() != 2 || self.family.is_some() {
            return Ok(None);
        }
        let centre = self.hub.measure[0];
        let (a, b) = (&self.rays[0], &self.rays[1]);
        Ok(Some(TwoRayStar {
            edge_pos: a.chain.edge.prepend(a.weight)?,
            measure_pos: a.chain.measure.prepend(centre)?,
            edge_neg: b.chain.edge.prepend(b.weight)?,
            measure_neg: b.chain.measure.clone(),
        }))
    }
}

/// Finite weighted graph with undirected edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteGraph {
    pub measure: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct RawFinite {
    measure: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawFinite> for FiniteGraph {
    type Error = Error;
    fn try_from(raw: RawFinite) -> Result<Self> {
        FiniteGraph::new(raw.measure, raw.edges)
    }
}

impl From<FiniteGraph> for RawFinite {
    fn from(g: FiniteGraph) -> Self {
        RawFinite {
            measure: g.measure,
            edges: g.edges,
        }
    }
}

impl FiniteGraph {
    pub fn new(measure: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = measure.len();
        if let Some(i) = measure.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidGraph(format!("measure at vertex {i} is not positive")));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(x, y, w) in &edges {
            if x >= n || y >= n {
                return Err(Error::InvalidGraph(format!("edge ({x}, {y}) leaves the vertex set")));
            }
            if x == y {
                return Err(Error::InvalidGraph(format!("loop at vertex {x}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({x}, {y}) has weight {w}")));
            }
            let key = (x.min(y), x.max(y));
            if merged.insert(key, w).is_some() {
                return Err(Error::InvalidGraph(format!("edge ({x}, {y}) listed twice")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(x, y), &w) in &merged {
            adjacency[x].push((y, w));
            adjacency[y].push((x, w));
        }
        Ok(Self {
            measure,
            edges,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn neighbours(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|x| {
                let s: f64 = self.adjacency[x].iter().map(|&(y, w)| w * (f[x] - f[y])).sum();
                s / self.measure[x]
            })
            .collect()
    }

    /// Each edge counted once.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges.iter().map(|&(x, y, w)| w * (f[x] - f[y]).powi(2)).sum()
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, w)| w).sum::<f64>() / self.measure[x]
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.ball(0, usize::MAX).len() == self.len()
    }

    /// Vertices within hop distance `radius` of `root`, in BFS order.
    pub fn ball(&self, root: usize, radius: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        dist[root] = 0;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            if dist[x] == radius {
                continue;
            }
            for &(y, _) in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        order
    }
}

/// Chain with one pendant vertex hung off every chain vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendantChain {
    pub base: BirthDeath,
    /// Weight of `{r, x_r}`.
    pub pendant_edge: SequenceSpec,
    /// Mass of the pendant `x_r`.
    pub pendant_measure: SequenceSpec,
}

/// Any graph the crate can analyse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    #[serde(alias = "birth_death")]
    Chain(BirthDeath),
    TwoRayStar(TwoRayStar),
    StarLike(StarLike),
    Finite(FiniteGraph),
    PendantChain(PendantChain),
}

impl GraphSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GraphSpec::Chain(_) => "chain",
            GraphSpec::TwoRayStar(_) => "two_ray_star",
            GraphSpec::StarLike(_) => "star_like",
            GraphSpec::Finite(_) => "finite",
            GraphSpec::PendantChain(_) => "pendant_chain",
        }
    }
}

/// Neighbours of one vertex: `(neighbour, b(x, y), m(y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbourhood {
    pub measure: f64,
    pub edges: Vec<(Vertex, f64, f64)>,
    /// Total weight and infimum root mass of an attached ray family.
    pub family: Option<(f64, f64)>,
}

impl Neighbourhood {
    /// `Deg(x) = (1/m(x)) sum_y b(x, y)`.
    pub fn weighted_degree(&self) -> f64 {
        let total: f64 = self.edges.iter().map(|e| e.1).sum::<f64>() + self.family.map_or(0.0, |f| f.0);
        total / self.measure
    }

    pub fn inf_neighbour_measure(&self) -> f64 {
        let local = self.edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        local.min(self.family.map_or(f64::INFINITY, |f| f.1))
    }
}

fn family_infimum(s: &SequenceSpec) -> Result<f64> {
    if s.asymptotic().is_some_and(|a| a.tends_to_zero()) {
        return Ok(0.0);
    }
    let probe = s.len_limit().unwrap_or(4096).min(4096);
    Ok(s.values(probe)?.into_iter().fold(f64::INFINITY, f64::min))
}

impl GraphSpec {
    /// Local structure around `v`.
    pub fn neighbourhood(&self, v: Vertex) -> Result<Neighbourhood> {
        let bad = || Error::InvalidGraph(format!("vertex {v} does not belong to a {} graph", self.kind()));
        let mut edges = Vec::new();
        let mut family = None;
        let measure = match (self, v) {
            (GraphSpec::Chain(c), Vertex::Chain(r)) => {
                if r > 0 {
                    edges.push((Vertex::Chain(r - 1), c.b(r - 1)?, c.m(r - 1)?));
                }
                edges.push((Vertex::Chain(r + 1), c.b(r)?, c.m(r + 1)?));
                c.m(r)?
            }
            (GraphSpec::PendantChain(p), Vertex::Chain(r)) => {
                if r > 0 {
                    edges.push((Vertex::Chain(r - 1), p.base.b(r - 1)?, p.base.m(r - 1)?));
                }
                edges.push((Vertex::Chain(r + 1), p.base.b(r)?, p.base.m(r + 1)?));
                edges.push((Vertex::Pendant(r), p.pendant_edge.eval(r)?, p.pendant_measure.eval(r)?));
                p.base.m(r)?
            }
            (GraphSpec::PendantChain(p), Vertex::Pendant(r)) => {
                edges.push((Vertex::Chain(r), p.pendant_edge.eval(r)?, p.base.m(r)?));
                p.pendant_measure.eval(r)?
            }
            (GraphSpec::TwoRayStar(s), Vertex::Star(i)) => {
                edges.push((Vertex::Star(i - 1), s.edge_between(i - 1)?, s.m(i - 1)?));
                edges.push((Vertex::Star(i + 1), s.edge_between(i)?, s.m(i + 1)?));
                s.m(i)?
            }
            (GraphSpec::Finite(f), Vertex::Node(x)) => {
                if x >= f.len() {
                    return Err(bad());
                }
                for &(y, b) in f.neighbours(x) {
                    edges.push((Vertex::Node(y), b, f.measure[y]));
                }
                f.measure[x]
            }
            (GraphSpec::StarLike(s), Vertex::Hub(x)) => {
                if x >= s.hub.len() {
                    return Err(bad());
                }
                for &(y, b) in s.hub.neighbours(x) {
                    edges.push((Vertex::Hub(y), b, s.hub.measure[y]));
                }
                for (i, ray) in s.rays.iter().enumerate() {
                    if ray.attach == x {
                        edges.push((Vertex::Ray { ray: i, depth: 0 }, ray.weight, ray.chain.m(0)?));
                    }
                }
                if let Some(fam) = s.family.as_ref().filter(|f| f.attach == x) {
                    let total = fam
                        .weight
                        .total()?
                        .ok_or_else(|| Error::DivergentDegree(v.to_string()))?;
                    family = Some((total, family_infimum(&fam.root_measure)?));
                }
                s.hub.measure[x]
            }
            (GraphSpec::StarLike(s), Vertex::Ray { ray, depth }) => {
                let r = s.rays.get(ray).ok_or_else(bad)?;
                if depth == 0 {
                    edges.push((Vertex::Hub(r.attach), r.weight, s.hub.measure[r.attach]));
                } else {
                    edges.push((
                        Vertex::Ray { ray, depth: depth - 1 },
                        r.chain.b(depth - 1)?,
                        r.chain.m(depth - 1)?,
                    ));
                }
                edges.push((
                    Vertex::Ray { ray, depth: depth + 1 },
                    r.chain.b(depth)?,
                    r.chain.m(depth + 1)?,
                ));
                r.chain.m(depth)?
            }
            (GraphSpec::StarLike(s), Vertex::Member { member, depth }) => {
                let fam = s.family.as_ref().ok_or_else(bad)?;
                let chain = fam.member(member)?;
                if depth == 0 {
                    edges.push((
                        Vertex::Hub(fam.attach),
                        fam.weight.eval(member)?,
                        s.hub.measure[fam.attach],
                    ));
                } else {
                    edges.push((
                        Vertex::Member {
                            member,
                            depth: depth - 1,
                        },
                        chain.b(depth - 1)?,
                        chain.m(depth - 1)?,
                    ));
                }
                edges.push((
                    Vertex::Member {
                        member,
                        depth: depth + 1,
                    },
                    chain.b(depth)?,
                    chain.m(depth + 1)?,
                ));
                chain.m(depth)?
            }
            _ => return Err(bad()),
        };
        Ok(Neighbourhood { measure, edges, family })
    }
}

/// Vertex labels across graph kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    Chain(usize),
    Star(i64),
    Hub(usize),
    Ray { ray: usize, depth: usize },
    Member { member: usize, depth: usize },
    Pendant(usize),
    Node(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Chain(r) => write!(f, "{r}"),
            Vertex::Star(i) => write!(f, "{i}"),
            Vertex::Hub(h) => write!(f, "hub{h}"),
            Vertex::Ray { ray, depth } => write!(f, "{depth}^({ray})"),
            Vertex::Member { member, depth } => write!(f, "{depth}^(family {member})"),
            Vertex::Pendant(r) => write!(f, "x_{r}"),
            Vertex::Node(i) => write!(f, "v{i}"),
        }
    }
}

/// Finite induced subgraph with the vertices that touch the outside marked.
#[derive(Debug, Clone)]
pub struct Window {
    pub labels: Vec<Vertex>,
    pub graph: FiniteGraph,
    pub boundary: Vec<bool>,
}

impl Window {
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.labels.iter().position(|&l| l == v)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&i| !self.boundary[i])
    }

    /// `|Delta f|` and the row scale `(1/m) sum b (|f(x)| + |f(y)|)` at `x`.
    pub fn residual(&self, f: &[f64], x: usize) -> (f64, f64) {
        let mut flux = crate::numeric::CompensatedSum::new();
        let mut scale = 0.0;
        for &(y, w) in self.graph.neighbours(x) {
            flux.add(w * f[x]);
            flux.add(-w * f[y]);
            scale += w * (f[x].abs() + f[y].abs());
        }
        let m = self.graph.measure[x];
        (flux.value().abs() / m, scale / m)
    }
}

struct WindowBuilder {
    labels: Vec<Vertex>,
    index: BTreeMap<Vertex, usize>,
    measure: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    boundary: Vec<bool>,
}

impl WindowBuilder {
    fn new() -> Self {
        Self {
            labels: Vec::new(),
            index: BTreeMap::new(),
            measure: Vec::new(),
            edges: Vec::new(),
            boundary: Vec::new(),
        }
    }

    fn vertex(&mut self, v: Vertex, m: f64, on_boundary: bool) -> usize {
        let i = self.labels.len();
        self.labels.push(v);
        self.index.insert(v, i);
        self.measure.push(m);
        self.boundary.push(on_boundary);
        i
    }

    fn edge(&mut self, a: Vertex, b: Vertex, w: f64) {
        let (i, j) = (self.index[&a], self.index[&b]);
        self.edges.push((i, j, w));
    }

    fn finish(self) -> Result<Window> {
        Ok(Window {
            labels: self.labels,
            graph: FiniteGraph::new(self.measure, self.edges)?,
            boundary: self.boundary,
        })
    }
}

/// Window of hop radius `radius` around the natural root of each kind.
///
/// Chains use `0..=radius`, two-ray stars `-radius..=radius`, star-like
/// graphs the whole hub plus ray depths `0..=radius`, pendant chains
/// `0..=radius` with their pendants, finite graphs the ball about `root`.
pub fn window(g: &GraphSpec, radius: usize, root: usize) -> Result<Window> {
    let mut w = WindowBuilder::new();
    match g {
        GraphSpec::Chain(c) => {
            for r in 0..=radius {
                w.vertex(Vertex::Chain(r), c.m(r)?, r == radius);
            }
            for r in 0..radius {
                w.edge(Vertex::Chain(r), Vertex::Chain(r + 1), c.b(r)?);
            }
        }
        GraphSpec::TwoRayStar(s) => {
            let r = radius as i64;
            for i in -r..=r {
                w.vertex(Vertex::Star(i), s.m(i)?, i.abs() == r);
            }
            for i in -r..r {
                w.edge(Vertex::Star(i), Vertex::Star(i + 1), s.edge_between(i)?);
            }
        }
        GraphSpec::StarLike(s) => {
            if s.family.is_some() {
                return Err(Error::Unsupported(
                    "finite windows need a locally finite graph; ray families are not".into(),
                ));
            }
            for (h, &m) in s.hub.measure.iter().enumerate() {
                w.vertex(Vertex::Hub(h), m, false);
            }
            for &(x, y, b) in &s.hub.edges {
                w.edge(Vertex::Hub(x), Vertex::Hub(y), b);
            }
            for (i, ray) in s.rays.iter().enumerate() {
                for d in 0..=radius {
                    w.vertex(Vertex::Ray { ray: i, depth: d }, ray.chain.m(d)?, d == radius);
                }
                w.edge(Vertex::Hub(ray.attach), Vertex::Ray { ray: i, depth: 0 }, ray.weight);
                for d in 0..radius {
                    w.edge(
                        Vertex::Ray { ray: i, depth: d },
                        Vertex::Ray { ray: i, depth: d + 1 },
                        ray.chain.b(d)?,
                    );
                }
            }
        }
        GraphSpec::PendantChain(p) => {
            for r in 0..=radius {
                w.vertex(Vertex::Chain(r), p.base.m(r)?, r == radius);
                w.vertex(Vertex::Pendant(r), p.pendant_measure.eval(r)?, false);
                w.edge(Vertex::Chain(r), Vertex::Pendant(r), p.pendant_edge.eval(r)?);
            }
            for r in 0..radius {
                w.edge(Vertex::Chain(r), Vertex::Chain(r + 1), p.base.b(r)?);
            }
        }
        GraphSpec::Finite(f) => {
            if root >= f.len() {
                return Err(Error::InvalidGraph(format!("root {root} is not a vertex")));
            }
            let ball = f.ball(root, radius);
            let inside: std::collections::BTreeSet<usize> = ball.iter().copied().collect();
            for &x in &ball {
                let leaks = f.neighbours(x).iter().any(|(y, _)| !inside.contains(y));
                w.vertex(Vertex::Node(x), f.measure[x], leaks);
            }
            for &(x, y, b) in &f.edges {
                if inside.contains(&x) && inside.contains(&y) {
                    w.edge(Vertex::Node(x), Vertex::Node(y), b);
                }
            }
        }
    }
    w.finish()
}

/// Potential `W` on the vertices of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Potential {
    /// Explicit table then `const`, `power` or `exp` tail (coefficients may be negative).
    Closed {
        #[serde(default)]
        table: Vec<f64>,
        tail: PotentialTail,
    },
    /// `W(r) = Deg(r) * (min over neighbours of m)^(-1/2)` on the given chain.
    EsaForcing { chain: BirthDeath },
}

/// Tail families for potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PotentialTail {
    Const { c: f64 },
    Power { c: f64, p: f64 },
    Exp { c: f64, q: f64 },
    None,
}

impl Potential {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Potential::Closed {
            table: Vec::new(),
            tail: PotentialTail::Const { c },
        }
    }

    pub fn from_table(table: Vec<f64>) -> Self {
        Potential::Closed {
            table,
            tail: PotentialTail::None,
        }
    }

    pub fn eval(&self, r: usize) -> Result<f64> {
        match self {
            Potential::Closed { table, tail } => {
                if let Some(&v) = table.get(r) {
                    return Ok(v);
                }
                let k = r as f64;
                match *tail {
                    PotentialTail::Const { c } => Ok(c),
                    PotentialTail::Power { c, p } => Ok(c * (k + 1.0).powf(p)),
                    PotentialTail::Exp { c, q } => Ok(c * q.powf(k)),
                    PotentialTail::None => Err(Error::IndexBeyondTable {
                        index: r,
                        len: table.len(),
                    }),
                }
            }
            Potential::EsaForcing { chain } => {
                let below = if r == 0 { f64::INFINITY } else { chain.m(r - 1)? };
                let inf_m = below.min(chain.m(r + 1)?);
                Ok(chain.degree(r)? / inf_m.sqrt())
            }
        }
    }

    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|r| self.eval(r)).collect()
    }

    pub fn len_limit(&self) -> Option<usize> {
        match self {
            Potential::Closed {
                table,
                tail: PotentialTail::None,
            } => Some(table.len()),
            Potential::Closed { .. } => None,
            Potential::EsaForcing { chain } => chain.len_limit().map(|l| l.saturating_sub(1)),
        }
    }

    /// Infimum over all vertices when it can be certified.
    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            Potential::Closed { table, tail } => {
                let head = table.iter().copied().fold(f64::INFINITY, f64::min);
                let tail_inf = match *tail {
                    PotentialTail::Const { c } => c,
                    PotentialTail::Power { c, p } => {
                        if c >= 0.0 {
                            if p > 0.0 {
                                c * (table.len() as f64 + 1.0).powf(p)
                            } else {
                                0.0f64.min(c * (table.len() as f64 + 1.0).powf(p))
                            }
                        } else if p <= 0.0 {
                            c * (table.len() as f64 + 1.0).powf(p)
                        } else {
                            return None;
                        }
                    }
                    PotentialTail::Exp { c, q } => {
                        let first = c * q.powf(table.len() as f64);
                        if c >= 0.0 {
                            if q >= 1.0 {
                                first
                            } else {
                                0.0
                            }
                        } else if q <= 1.0 {
                            first
                        } else {
                            return None;
                        }
                    }
                    PotentialTail::None => f64::INFINITY,
                };
                Some(head.min(tail_inf))
            }
            Potential::EsaForcing { .. } => Some(0.0),
        }
    }

    /// Leading behaviour of `W(r)`.
    pub fn asymptotic(&self) -> Option<AsymptoticTerm> {
        match self {
            Potential::Closed { tail, .. } => match *tail {
                PotentialTail::Const { c } => Some(AsymptoticTerm::constant(c)),
                PotentialTail::Power { c, p } => Some(AsymptoticTerm::new(c, p, 0, 1.0)),
                PotentialTail::Exp { c, q } => Some(AsymptoticTerm::new(c, 0.0, 0, q)),
                PotentialTail::None => None,
            },
            Potential::EsaForcing { chain } => {
                let b = chain.edge.asymptotic()?;
                let m = chain.measure.asymptotic()?;
                let deg = b.shift(-1).add(&b)?.div(&m)?;
                let inf_m = m.shift(-1).min(&m.shift(1));
                Some(deg.mul(&inf_m.powf(-0.5)?))
            }
        }
    }
}

/// `sum_y b(x,y)^2 / m(y)` must be finite at every vertex.
pub fn check_condition_a(g: &GraphSpec) -> Result<()> {
    if let GraphSpec::StarLike(s) = g {
        if let Some(fam) = &s.family {
            let w = fam.weight.asymptotic();
            let m = fam.root_measure.asymptotic();
            let ok = match (w, m) {
                (Some(w), Some(m)) => w.powf(2.0).and_then(|w2| w2.div(&m)).map(|t| t.summable()),
                _ => None,
            };
            match ok {
                Some(true) => {}
                Some(false) => {
                    return Err(Error::ConditionAFailure {
                        vertex: Vertex::Hub(fam.attach).to_string(),
                        detail: "sum over family roots of b^2/m diverges".into(),
                    })
                }
                None => {
                    return Err(Error::ConditionAFailure {
                        vertex: Vertex::Hub(fam.attach).to_string(),
                        detail: "cannot certify convergence of sum b^2/m over family roots".into(),
                    })
                }
            }
        }
    }
    Ok(())
}
