//! Explicit harmonic functions on chains, doubled chains and two-ray stars.

use serde::{Deserialize, Serialize};

use crate::criteria::{is_transient, Recurrence};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{window, BirthDeath, End, GraphSpec, TwoRayStar, Vertex};
use crate::numeric::CompensatedSum;
use crate::sequence::SequenceSpec;
use crate::series::{decide, SeriesOptions, SeriesVerdict};

/// Default residual tolerance, relative to the Laplacian row scale.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Values of a harmonic function along one ray, seen from the centre.
///
/// `v(0) = center` and `b(r)(v(r+1) - v(r)) = flux`. A vanishing end has
/// `v(r) = -flux * sum_{k>=r} 1/b(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndValues {
    pub ray: BirthDeath,
    pub center: f64,
    pub flux: f64,
    pub vanishing: bool,
}

/// How a harmonic function behaves towards an end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndBehaviour {
    Constant,
    Unbounded,
    Limit(f64),
    Vanishing,
    Undetermined,
}

impl EndValues {
    /// Values `v(0..=upto)`.
    pub fn values(&self, upto: usize) -> Result<Vec<f64>> {
        if self.vanishing {
            let tail = Expr::TailSum(self.ray.edge.reciprocal()).eval(upto + 1)?;
            return Ok(tail.into_iter().map(|g| -self.flux * g).collect());
        }
        let inv = self.ray.edge.reciprocal().values(upto)?;
        let mut acc = CompensatedSum::new();
        let mut out = Vec::with_capacity(upto + 1);
        out.push(self.center);
        for x in inv {
            acc.add(x);
            out.push(self.center + self.flux * acc.value());
        }
        Ok(out)
    }

    /// Value at depth `r`, computed without caching.
    pub fn value(&self, r: usize) -> Result<f64> {
        Ok(self.values(r)?[r])
    }

    pub fn behaviour(&self, opts: &SeriesOptions) -> Result<EndBehaviour> {
        if self.flux == 0.0 {
            return Ok(EndBehaviour::Constant);
        }
        if self.vanishing {
            return Ok(EndBehaviour::Vanishing);
        }
        Ok(match is_transient(&self.ray, opts)?.0 {
            Recurrence::Recurrent => EndBehaviour::Unbounded,
            Recurrence::Transient => {
                let total = self
                    .ray
                    .edge
                    .reciprocal()
                    .tail_sum(0)?
                    .ok_or(Error::NotTransient)?
                    .value;
                let limit = self.center + self.flux * total;
                if limit.abs() <= 1e-12 * (self.center.abs() + (self.flux * total).abs()) {
                    EndBehaviour::Vanishing
                } else {
                    EndBehaviour::Limit(limit)
                }
            }
            Recurrence::Inconclusive => EndBehaviour::Undetermined,
        })
    }

    /// Terms `v(r)^2 m(r)` of the square sum along the ray.
    pub fn square_terms(&self, opts: &SeriesOptions) -> Result<Expr> {
        let m = Expr::seq(&self.ray.measure);
        let inv = Expr::Seq(self.ray.edge.reciprocal());
        Ok(match self.behaviour(opts)? {
            EndBehaviour::Constant => Expr::Const(self.center * self.center).mul(m),
            EndBehaviour::Vanishing => Expr::Const(self.flux * self.flux)
                .mul(Expr::TailSum(self.ray.edge.reciprocal()).square())
                .mul(m),
            EndBehaviour::Limit(limit) => Expr::Const(limit)
                .add(Expr::Const(-self.flux).mul(Expr::TailSum(self.ray.edge.reciprocal())))
                .square()
                .mul(m),
            EndBehaviour::Unbounded | EndBehaviour::Undetermined => {
                // term j describes vertex j + 1; the centre is left out
                Expr::Const(self.center)
                    .add(Expr::Const(self.flux).mul(inv.partial_sum()))
                    .square()
                    .mul(m.shift(1))
            }
        })
    }

    /// Whether the function is square summable along the ray.
    pub fn l2_verdict(&self, opts: &SeriesOptions) -> Result<SeriesVerdict> {
        decide(&self.square_terms(opts)?, opts)
    }
}

/// Residual of a candidate harmonic function on a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Largest `|Delta v|` over checked vertices.
    pub max_abs: f64,
    /// Largest `|Delta v|` divided by `max(1, row scale)`.
    pub max_relative: f64,
    pub worst: Option<Vertex>,
    /// Largest relative deviation of edge fluxes from the predicted constant.
    pub flux_relative: f64,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative <= tol && self.flux_relative <= tol
    }
}

/// Harmonic function on a chain (harmonic off the root) or a two-ray star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSolution {
    /// `b(0,1)(v(1) - v(0))`.
    pub flux: f64,
    pub positive: EndValues,
    /// Negative side seen from the centre; absent for chains.
    pub negative: Option<EndValues>,
    pub upto: usize,
    /// `v(0..=upto)`.
    pub values_pos: Vec<f64>,
    /// `v(-1), ..., v(-upto)`.
    pub values_neg: Vec<f64>,
}

impl HarmonicSolution {
    fn build(positive: EndValues, negative: Option<EndValues>, upto: usize) -> Result<Self> {
        let values_pos = positive.values(upto)?;
        let values_neg = match &negative {
            Some(n) => n.values(upto)?.split_off(1),
            None => Vec::new(),
        };
        let flux = positive.flux;
        Ok(Self {
            flux,
            positive,
            negative,
            upto,
            values_pos,
            values_neg,
        })
    }

    /// `v(i)`; indices outside the stored window are recomputed.
    pub fn value_at(&self, i: i64) -> Result<f64> {
        if i >= 0 {
            let r = i as usize;
            match self.values_pos.get(r) {
                Some(&v) => Ok(v),
                None => self.positive.value(r),
            }
        } else {
            let neg = self
                .negative
                .as_ref()
                .ok_or_else(|| Error::MissingValue(format!("chain has no vertex {i}")))?;
            let k = (-i) as usize;
            match self.values_neg.get(k - 1) {
                Some(&v) => Ok(v),
                None => neg.value(k),
            }
        }
    }

    pub fn end(&self, end: End) -> Option<&EndValues> {
        match end {
            End::Positive => Some(&self.positive),
            End::Negative => self.negative.as_ref(),
        }
    }

    fn graph(&self) -> Result<GraphSpec> {
        Ok(match &self.negative {
            None => GraphSpec::Chain(self.positive.ray.clone()),
            Some(n) => GraphSpec::TwoRayStar(TwoRayStar::from_rays(&self.positive.ray, &n.ray)?),
        })
    }

    /// Residual on the stored window (the chain root is excluded).
    pub fn residual(&self) -> Result<ResidualReport> {
        let g = self.graph()?;
        let w = window(&g, self.upto, 0)?;
        let f: Vec<f64> = w
            .labels
            .iter()
            .map(|l| match *l {
                Vertex::Chain(r) => Ok(self.values_pos[r]),
                Vertex::Star(i) => self.value_at(i),
                other => Err(Error::MissingValue(other.to_string())),
            })
            .collect::<Result<_>>()?;
        let mut report = ResidualReport {
            max_abs: 0.0,
            max_relative: 0.0,
            worst: None,
            flux_relative: 0.0,
        };
        for x in w.interior() {
            if w.labels[x] == Vertex::Chain(0) {
                continue;
            }
            let (abs, scale) = w.residual(&f, x);
            let rel = abs / scale.max(1.0);
            report.max_abs = report.max_abs.max(abs);
            if rel > report.max_relative {
                report.max_relative = rel;
                report.worst = Some(w.labels[x]);
            }
        }
        let mut check_flux = |ray: &BirthDeath, vals: &[f64], flux: f64| -> Result<()> {
            for r in 0..vals.len() - 1 {
                let b = ray.b(r)?;
                let got = b * (vals[r + 1] - vals[r]);
                let scale = flux.abs().max(b * (vals[r].abs() + vals[r + 1].abs())).max(1.0);
                report.flux_relative = report.flux_relative.max((got - flux).abs() / scale);
            }
            Ok(())
        };
        check_flux(&self.positive.ray, &self.values_pos, self.positive.flux)?;
        if let Some(n) = &self.negative {
            let mut vals = vec![self.values_pos[0]];
            vals.extend_from_slice(&self.values_neg);
            check_flux(&n.ray, &vals, n.flux)?;
        }
        Ok(report)
    }
}

/// Harmonic function on a chain (off the root) with `v(0)`, `v(1)` given.
pub fn chain_harmonic(chain: &BirthDeath, v0: f64, v1: f64, upto: usize) -> Result<HarmonicSolution> {
    let flux = chain.b(0)? * (v1 - v0);
    let end = EndValues {
        ray: chain.clone(),
        center: v0,
        flux,
        vanishing: false,
    };
    HarmonicSolution::build(end, None, upto)
}

/// Harmonic function on a two-ray star with `v(0)`, `v(1)` given.
pub fn star_harmonic(star: &TwoRayStar, v0: f64, v1: f64, upto: usize) -> Result<HarmonicSolution> {
    let flux = star.edge_pos.eval(0)? * (v1 - v0);
    let positive = EndValues {
        ray: star.ray(End::Positive)?,
        center: v0,
        flux,
        vanishing: false,
    };
    let negative = EndValues {
        ray: star.ray(End::Negative)?,
        center: v0,
        flux: -flux,
        vanishing: false,
    };
    HarmonicSolution::build(positive, Some(negative), upto)
}

/// A chain glued to a mirrored copy of itself through a bridge edge.
///
/// Stored as a two-ray star centred at `0`: star vertex `-1` is the copy
/// `0~` of the root and star vertex `-(k+1)` is the mirror `-k` of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledChain {
    pub chain: BirthDeath,
    pub bridge: f64,
    pub star: TwoRayStar,
}

/// Vertex of a doubled chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubledVertex {
    Original(usize),
    RootCopy,
    Mirror(usize),
}

impl DoubledChain {
    pub fn star_index(v: DoubledVertex) -> i64 {
        match v {
            DoubledVertex::Original(k) => k as i64,
            DoubledVertex::RootCopy => -1,
            DoubledVertex::Mirror(k) => -(k as i64) - 1,
        }
    }
}

pub fn doubled_chain(chain: &BirthDeath, bridge: f64) -> Result<DoubledChain> {
    if !(bridge.is_finite() && bridge > 0.0) {
        return Err(Error::InvalidGraph(format!("bridge weight {bridge} must be positive")));
    }
    let star = TwoRayStar {
        edge_pos: chain.edge.clone(),
        measure_pos: chain.measure.clone(),
        edge_neg: chain.edge.prepend(bridge)?,
        measure_neg: chain.measure.clone(),
    };
    Ok(DoubledChain {
        chain: chain.clone(),
        bridge,
        star,
    })
}

/// Harmonic function on the doubled chain with `v(0) = 0` and `v(1) = v1`.
pub fn doubled_harmonic(d: &DoubledChain, v1: f64, upto: usize) -> Result<HarmonicSolution> {
    star_harmonic(&d.star, 0.0, v1, upto)
}

/// Flux making a harmonic function vanish at a transient end, given the
/// value at the vertex next to the centre on that side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanishingEnd {
    /// `b(0,1)(v(1) - v(0))` in the positive orientation of the star.
    pub flux: f64,
    /// `sum_{k>=1} 1/b` along the end.
    pub resistance: f64,
}

pub fn vanishing_end_constant(star: &TwoRayStar, end: End, adjacent: f64) -> Result<VanishingEnd> {
    let edges: &SequenceSpec = match end {
        End::Positive => &star.edge_pos,
        End::Negative => &star.edge_neg,
    };
    let resistance = edges
        .reciprocal()
        .tail_sum(1)?
        .ok_or_else(|| Error::EndNotTransient(end.to_string()))?
        .value;
    let flux = match end {
        End::Positive => -adjacent / resistance,
        End::Negative => adjacent / resistance,
    };
    Ok(VanishingEnd { flux, resistance })
}

/// Harmonic function on a two-ray star vanishing at `end`, with value 1 next
/// to the centre on that side.
pub fn vanishing_harmonic(star: &TwoRayStar, end: End, upto: usize) -> Result<HarmonicSolution> {
    let c = vanishing_end_constant(star, end, 1.0)?;
    let pos_ray = star.ray(End::Positive)?;
    let neg_ray = star.ray(End::Negative)?;
    let (positive, negative) = match end {
        End::Positive => {
            let center = 1.0 - c.flux / pos_ray.b(0)?;
            (
                EndValues {
                    ray: pos_ray,
                    center,
                    flux: c.flux,
                    vanishing: true,
                },
                EndValues {
                    ray: neg_ray,
                    center,
                    flux: -c.flux,
                    vanishing: false,
                },
            )
        }
        End::Negative => {
            let center = 1.0 + c.flux / neg_ray.b(0)?;
            (
                EndValues {
                    ray: pos_ray,
                    center,
                    flux: c.flux,
                    vanishing: false,
                },
                EndValues {
                    ray: neg_ray,
                    center,
                    flux: -c.flux,
                    vanishing: true,
                },
            )
        }
    };
    HarmonicSolution::build(positive, Some(negative), upto)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BirthDeath {
        BirthDeath::new(SequenceSpec::constant(1.0), SequenceSpec::constant(1.0))
    }

    #[test]
    fn unit_chain_harmonic_is_linear() {
        let h = chain_harmonic(&unit(), 0.0, 1.0, 10).unwrap();
        assert_eq!(h.flux, 1.0);
        assert_eq!(h.values_pos[5], 5.0);
        assert!(h.residual().unwrap().passes(RESIDUAL_TOL));
    }

    #[test]
    fn doubled_unit_chain_values() {
        let d = doubled_chain(&unit(), 1.0).unwrap();
        let h = doubled_harmonic(&d, 1.0, 10).unwrap();
        let at = |v| h.value_at(DoubledChain::star_index(v)).unwrap();
        assert_eq!(at(DoubledVertex::RootCopy), -1.0);
        assert_eq!(at(DoubledVertex::Mirror(1)), -2.0);
        assert_eq!(at(DoubledVertex::Original(2)), 2.0);
        assert!(h.residual().unwrap().passes(RESIDUAL_TOL));
    }

    #[test]
    fn star_branch_formula() {
        let star = TwoRayStar {
            edge_pos: SequenceSpec::constant(2.0),
            measure_pos: SequenceSpec::constant(1.0),
            edge_neg: SequenceSpec::constant(4.0),
            measure_neg: SequenceSpec::constant(1.0),
        };
        let h = star_harmonic(&star, 1.0, 2.0, 5).unwrap();
        // C = 2, v(-1) = 1 - 2/4
        assert_eq!(h.value_at(-1).unwrap(), 0.5);
        assert_eq!(h.value_at(-3).unwrap(), -0.5);
        assert_eq!(h.value_at(-20).unwrap(), 1.0 - 20.0 * 0.5);
        assert!(h.residual().unwrap().passes(RESIDUAL_TOL));
    }

    #[test]
    fn vanishing_constant_geometric_edges() {
        let chain = BirthDeath::new(SequenceSpec::exponential(1.0, 2.0), SequenceSpec::constant(1.0));
        let star = TwoRayStar::mirrored(&chain).unwrap();
        let c = vanishing_end_constant(&star, End::Positive, 1.0).unwrap();
        assert!((c.resistance - 1.0).abs() < 1e-15);
        assert!((c.flux + 1.0).abs() < 1e-15);
        let h = vanishing_harmonic(&star, End::Positive, 40).unwrap();
        // v(r) = 2^{1-r}
        assert!((h.value_at(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((h.value_at(0).unwrap() - 2.0).abs() < 1e-15);
        assert!((h.value_at(30).unwrap() - 2f64.powi(-29)).abs() < 1e-22);
        assert!(h.residual().unwrap().passes(RESIDUAL_TOL));
        assert_eq!(
            h.positive.behaviour(&SeriesOptions::default()).unwrap(),
            EndBehaviour::Vanishing
        );
    }

    #[test]
    fn vanishing_requires_transient_end() {
        let star = TwoRayStar::mirrored(&unit()).unwrap();
        assert!(matches!(
            vanishing_end_constant(&star, End::Negative, 1.0),
            Err(Error::EndNotTransient(_))
        ));
    }
}
