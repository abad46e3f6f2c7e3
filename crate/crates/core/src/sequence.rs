//! Positive sequences given by a finite table followed by an analytic tail.

use serde::{Deserialize, Serialize};

use crate::asym::AsymptoticTerm;
use crate::error::{Error, Result};
use crate::numeric::{hurwitz_zeta, CompensatedSum};

/// Closed-form continuation of a sequence past its table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Tail {
    /// `c` for every index past the table.
    #[serde(alias = "constant")]
    Const { c: f64 },
    /// `c * (k + 1 + shift)^p`.
    Power {
        c: f64,
        p: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
    },
    /// `c * q^k`.
    #[serde(alias = "exponential")]
    Exp { c: f64, q: f64 },
    /// Table only.
    None,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Tail {
    pub fn power(c: f64, p: f64) -> Self {
        Tail::Power { c, p, shift: 0.0 }
    }

    fn at(&self, k: usize) -> Option<f64> {
        let k = k as f64;
        match *self {
            Tail::Const { c } => Some(c),
            Tail::Power { c, p, shift } => Some(c * (k + 1.0 + shift).powf(p)),
            Tail::Exp { c, q } => Some(c * q.powf(k)),
            Tail::None => None,
        }
    }
}

/// Value `sum_{k >= from}` of a tail sum with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub error: f64,
}

/// A strictly positive sequence: explicit `table` entries followed by `tail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct SequenceSpec {
    table: Vec<f64>,
    tail: Tail,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    #[serde(default)]
    table: Vec<f64>,
    tail: Tail,
}

impl TryFrom<RawSequence> for SequenceSpec {
    type Error = Error;
    fn try_from(raw: RawSequence) -> Result<Self> {
        SequenceSpec::new(raw.table, raw.tail)
    }
}

impl From<SequenceSpec> for RawSequence {
    fn from(s: SequenceSpec) -> Self {
        RawSequence {
            table: s.table,
            tail: s.tail,
        }
    }
}

impl SequenceSpec {
    pub fn new(table: Vec<f64>, tail: Tail) -> Result<Self> {
        if let Some((i, x)) = table.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidSequence(format!(
                "table entry {i} is {x}, expected a finite positive value"
            )));
        }
        let bad = |what: &str| Err(Error::InvalidSequence(what.to_string()));
        match tail {
            Tail::Const { c } if !(c.is_finite() && c > 0.0) => return bad("const tail needs c > 0"),
            Tail::Power { c, p, shift } => {
                if !(c.is_finite() && c > 0.0 && p.is_finite() && shift.is_finite()) {
                    return bad("power tail needs finite c > 0, p and shift");
                }
                if table.len() as f64 + 1.0 + shift <= 0.0 {
                    return bad("power tail base must stay positive past the table");
                }
            }
            Tail::Exp { c, q } if !(c.is_finite() && c > 0.0 && q.is_finite() && q > 0.0) => {
                return bad("exp tail needs c > 0 and q > 0")
            }
            Tail::None if table.is_empty() => return bad("empty table without a tail"),
            _ => {}
        }
        let spec = SequenceSpec { table, tail };
        // Tails must not underflow or overflow at the first index.
        if let Some(v) = spec.tail.at(spec.table.len()) {
            if !(v.is_finite() && v > 0.0) {
                return bad("tail value is not a positive finite number");
            }
        }
        Ok(spec)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Vec::new(), Tail::Const { c }).expect("positive constant")
    }

    pub fn power(c: f64, p: f64) -> Self {
        Self::new(Vec::new(), Tail::power(c, p)).expect("positive power")
    }

    pub fn exponential(c: f64, q: f64) -> Self {
        Self::new(Vec::new(), Tail::Exp { c, q }).expect("positive exponential")
    }

    pub fn from_table(table: Vec<f64>) -> Result<Self> {
        Self::new(table, Tail::None)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Number of available entries, `None` if the sequence is infinite.
    pub fn len_limit(&self) -> Option<usize> {
        match self.tail {
            Tail::None => Some(self.table.len()),
            _ => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.tail, Tail::None)
    }

    pub fn eval(&self, k: usize) -> Result<f64> {
        if let Some(&v) = self.table.get(k) {
            return Ok(v);
        }
        self.tail.at(k).ok_or(Error::IndexBeyondTable {
            index: k,
            len: self.table.len(),
        })
    }

    /// Values at indices `0..n`.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|k| self.eval(k)).collect()
    }

    /// The sequence `1 / s(k)`.
    pub fn reciprocal(&self) -> Self {
        let table = self.table.iter().map(|x| 1.0 / x).collect();
        let tail = match self.tail {
            Tail::Const { c } => Tail::Const { c: 1.0 / c },
            Tail::Power { c, p, shift } => Tail::Power {
                c: 1.0 / c,
                p: -p,
                shift,
            },
            Tail::Exp { c, q } => Tail::Exp { c: 1.0 / c, q: 1.0 / q },
            Tail::None => Tail::None,
        };
        SequenceSpec { table, tail }
    }

    /// The sequence `head, s(0), s(1), ...`.
    pub fn prepend(&self, head: f64) -> Result<Self> {
        let mut table = Vec::with_capacity(self.table.len() + 1);
        table.push(head);
        table.extend_from_slice(&self.table);
        let tail = match self.tail {
            Tail::Power { c, p, shift } => Tail::Power {
                c,
                p,
                shift: shift - 1.0,
            },
            Tail::Exp { c, q } => Tail::Exp { c: c / q, q },
            other => other,
        };
        Self::new(table, tail)
    }

    /// The sequence `s(k + offset)`.
    pub fn skip(&self, offset: usize) -> Result<Self> {
        let table: Vec<f64> = self.table.iter().skip(offset).copied().collect();
        let tail = match self.tail {
            Tail::Power { c, p, shift } => Tail::Power {
                c,
                p,
                shift: shift + offset as f64,
            },
            Tail::Exp { c, q } => Tail::Exp {
                c: c * q.powf(offset as f64),
                q,
            },
            Tail::None if table.is_empty() => {
                return Err(Error::IndexBeyondTable {
                    index: offset,
                    len: self.table.len(),
                })
            }
            other => other,
        };
        Self::new(table, tail)
    }

    /// Multiply every entry by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let table = self.table.iter().map(|x| x * factor).collect();
        let tail = match self.tail {
            Tail::Const { c } => Tail::Const { c: c * factor },
            Tail::Power { c, p, shift } => Tail::Power {
                c: c * factor,
                p,
                shift,
            },
            Tail::Exp { c, q } => Tail::Exp { c: c * factor, q },
            Tail::None => Tail::None,
        };
        Self::new(table, tail)
    }

    /// Leading behaviour of the tail, if the sequence is analytic.
    pub fn asymptotic(&self) -> Option<AsymptoticTerm> {
        match self.tail {
            Tail::Const { c } => Some(AsymptoticTerm::constant(c)),
            Tail::Power { c, p, .. } => Some(AsymptoticTerm::new(c, p, 0, 1.0)),
            Tail::Exp { c, q } => Some(AsymptoticTerm::new(c, 0.0, 0, q)),
            Tail::None => None,
        }
    }

    /// `sum_{k >= from} s(k)` with a certified error bound, or `None` if it diverges.
    pub fn tail_sum(&self, from: usize) -> Result<Option<TailSum>> {
        let mut head = CompensatedSum::new();
        for &x in self.table.iter().skip(from) {
            head.add(x);
        }
        let start = from.max(self.table.len());
        let rest = match self.tail {
            Tail::None => TailSum { value: 0.0, error: 0.0 },
            Tail::Const { .. } => return Ok(None),
            Tail::Exp { c, q } => {
                if q >= 1.0 {
                    return Ok(None);
                }
                let value = c * q.powf(start as f64) / (1.0 - q);
                TailSum {
                    value,
                    error: 4.0 * f64::EPSILON * value,
                }
            }
            Tail::Power { c, p, shift } => {
                if p >= -1.0 {
                    return Ok(None);
                }
                let (z, err) = hurwitz_zeta(-p, start as f64 + 1.0 + shift);
                TailSum {
                    value: c * z,
                    error: c * err,
                }
            }
        };
        let value = head.value() + rest.value;
        Ok(Some(TailSum {
            value,
            error: rest.error + 2.0 * f64::EPSILON * value,
        }))
    }

    /// Total sum, `None` when infinite.
    pub fn total(&self) -> Result<Option<f64>> {
        Ok(self.tail_sum(0)?.map(|t| t.value))
    }
}
