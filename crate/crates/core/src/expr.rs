//! Term expressions for series built from chain data.
//!
//! An [`Expr`] describes a sequence `t(0), t(1), ...` that can be evaluated
//! numerically over any prefix and, when every leaf is analytic, carries a
//! leading asymptotic term.

use std::sync::Arc;

use crate::asym::AsymptoticTerm;
use crate::error::{Error, Result};
use crate::graph::Potential;
use crate::numeric::CompensatedSum;
use crate::sequence::SequenceSpec;

/// Number of leading terms used to estimate the constant limit of a
/// convergent partial sum inside an asymptotic term.
const CONSTANT_PROBE: usize = 4096;

#[derive(Debug, Clone)]
pub enum Expr {
    Seq(SequenceSpec),
    Potential(Potential),
    /// Values known only numerically.
    Table(Arc<Vec<f64>>),
    Const(f64),
    /// `e(k + offset)`.
    Shift(Box<Expr>, usize),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    /// `sum_{j <= k} e(j)`.
    PartialSum(Box<Expr>),
    /// `sum_{j >= k} s(j)` for a sequence with a closed-form tail.
    TailSum(SequenceSpec),
}

impl Expr {
    pub fn seq(s: &SequenceSpec) -> Self {
        Expr::Seq(s.clone())
    }

    pub fn table(values: Vec<f64>) -> Self {
        Expr::Table(Arc::new(values))
    }

    pub fn shift(self, offset: usize) -> Self {
        if offset == 0 {
            self
        } else {
            Expr::Shift(Box::new(self), offset)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, other: Expr) -> Self {
        Expr::Div(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(other))
    }

    pub fn min(self, other: Expr) -> Self {
        Expr::Min(Box::new(self), Box::new(other))
    }

    pub fn pow(self, e: f64) -> Self {
        Expr::Pow(Box::new(self), e)
    }

    pub fn square(self) -> Self {
        self.pow(2.0)
    }

    pub fn partial_sum(self) -> Self {
        Expr::PartialSum(Box::new(self))
    }

    /// Largest prefix that can be evaluated, `None` if unbounded.
    pub fn len_limit(&self) -> Option<usize> {
        let both = |a: &Expr, b: &Expr| match (a.len_limit(), b.len_limit()) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        match self {
            Expr::Seq(s) => s.len_limit(),
            Expr::Potential(p) => p.len_limit(),
            Expr::Table(t) => Some(t.len()),
            Expr::Const(_) => None,
            Expr::Shift(e, s) => e.len_limit().map(|l| l.saturating_sub(*s)),
            Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Add(a, b) | Expr::Min(a, b) => both(a, b),
            Expr::Pow(e, _) | Expr::PartialSum(e) => e.len_limit(),
            Expr::TailSum(s) => s.len_limit(),
        }
    }

    /// Values at `0..n`.
    pub fn eval(&self, n: usize) -> Result<Vec<f64>> {
        let zip = |a: &Expr, b: &Expr, f: fn(f64, f64) -> f64| -> Result<Vec<f64>> {
            let (x, y) = (a.eval(n)?, b.eval(n)?);
            Ok(x.iter().zip(&y).map(|(&p, &q)| f(p, q)).collect())
        };
        match self {
            Expr::Seq(s) => s.values(n),
            Expr::Potential(p) => p.values(n),
            Expr::Table(t) => {
                if n > t.len() {
                    Err(Error::IndexBeyondTable {
                        index: t.len(),
                        len: t.len(),
                    })
                } else {
                    Ok(t[..n].to_vec())
                }
            }
            Expr::Const(c) => Ok(vec![*c; n]),
            Expr::Shift(e, s) => Ok(e.eval(n + s)?.split_off(*s)),
            Expr::Mul(a, b) => zip(a, b, |p, q| p * q),
            Expr::Div(a, b) => zip(a, b, |p, q| p / q),
            Expr::Add(a, b) => zip(a, b, |p, q| p + q),
            Expr::Min(a, b) => zip(a, b, f64::min),
            Expr::Pow(e, x) => Ok(e.eval(n)?.into_iter().map(|v| v.powf(*x)).collect()),
            Expr::PartialSum(e) => Ok(crate::numeric::cumulative(&e.eval(n)?)),
            Expr::TailSum(s) => {
                let start = s
                    .tail_sum(n)?
                    .ok_or_else(|| Error::Divergent("tail sum of a non-summable sequence".into()))?;
                let values = s.values(n)?;
                let mut out = vec![0.0; n];
                let mut acc = CompensatedSum::new();
                acc.add(start.value);
                for k in (0..n).rev() {
                    acc.add(values[k]);
                    out[k] = acc.value();
                }
                Ok(out)
            }
        }
    }

    /// Leading asymptotic term, `None` when it cannot be derived.
    pub fn asymptotic(&self) -> Option<AsymptoticTerm> {
        match self {
            Expr::Seq(s) => s.asymptotic(),
            Expr::Potential(p) => p.asymptotic(),
            Expr::Table(_) => None,
            Expr::Const(c) => Some(AsymptoticTerm::constant(*c)),
            Expr::Shift(e, s) => Some(e.asymptotic()?.shift(*s as i64)),
            Expr::Mul(a, b) => Some(a.asymptotic()?.mul(&b.asymptotic()?)),
            Expr::Div(a, b) => a.asymptotic()?.div(&b.asymptotic()?),
            Expr::Add(a, b) => a.asymptotic()?.add(&b.asymptotic()?),
            Expr::Min(a, b) => Some(a.asymptotic()?.min(&b.asymptotic()?)),
            Expr::Pow(e, x) => e.asymptotic()?.powf(*x),
            Expr::PartialSum(e) => {
                let inner = e.asymptotic()?;
                if inner.summable() {
                    // The partial sums settle at a constant; estimate it from a prefix.
                    let probe = e.len_limit().map_or(CONSTANT_PROBE, |l| l.min(CONSTANT_PROBE));
                    let total = crate::numeric::sum(e.eval(probe).ok()?);
                    if total == 0.0 && inner.is_zero() {
                        Some(AsymptoticTerm::zero())
                    } else if total > 0.0 {
                        Some(AsymptoticTerm::constant(total))
                    } else {
                        None
                    }
                } else if inner.coef > 0.0 {
                    inner.partial_sum()
                } else {
                    None
                }
            }
            Expr::TailSum(s) => s.asymptotic()?.tail_sum(),
        }
    }
}
