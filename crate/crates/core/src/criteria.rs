//! Series criteria for chains: essential self-adjointness, recurrence,
//! finite measure, the Feller property and uniqueness of the form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BirthDeath, End, TwoRayStar};
use crate::series::{decide_series, Outcome, SeriesOptions, SeriesShape, SeriesVerdict};

/// Three-valued answer to a yes/no property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// `Holds` when the series diverges.
    pub fn on_divergence(v: &SeriesVerdict) -> Self {
        match v.outcome {
            Outcome::Diverges => Verdict::Holds,
            Outcome::Converges => Verdict::Fails,
            Outcome::Inconclusive => Verdict::Inconclusive,
        }
    }

    /// `Holds` when the series converges.
    pub fn on_convergence(v: &SeriesVerdict) -> Self {
        Self::on_divergence(v).negate()
    }

    pub fn negate(self) -> Self {
        match self {
            Verdict::Holds => Verdict::Fails,
            Verdict::Fails => Verdict::Holds,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn or(self, other: Self) -> Self {
        self.negate().and(other.negate()).negate()
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn fails(self) -> bool {
        self == Verdict::Fails
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recurrence {
    Recurrent,
    Transient,
    Inconclusive,
}

/// Essential self-adjointness of the Laplacian on compactly supported functions.
pub fn hamburger_esa(chain: &BirthDeath, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    decide_series(&chain.edge, &chain.measure, SeriesShape::Hamburger, opts)
}

pub fn esa_verdict(chain: &BirthDeath, opts: &SeriesOptions) -> Result<Verdict> {
    Ok(Verdict::on_divergence(&hamburger_esa(chain, opts)?))
}

/// Transient iff `sum 1/b` converges.
pub fn is_transient(chain: &BirthDeath, opts: &SeriesOptions) -> Result<(Recurrence, SeriesVerdict)> {
    let v = decide_series(&chain.edge, &chain.measure, SeriesShape::Recurrence, opts)?;
    let r = match v.outcome {
        Outcome::Converges => Recurrence::Transient,
        Outcome::Diverges => Recurrence::Recurrent,
        Outcome::Inconclusive => Recurrence::Inconclusive,
    };
    Ok((r, v))
}

/// Whether the total mass is finite.
pub fn measure_finite(chain: &BirthDeath, opts: &SeriesOptions) -> Result<(Verdict, SeriesVerdict)> {
    let v = decide_series(&chain.edge, &chain.measure, SeriesShape::Measure, opts)?;
    Ok((Verdict::on_convergence(&v), v))
}

/// Feller property of a recurrent chain; holds iff the Feller series diverges.
pub fn feller(chain: &BirthDeath, opts: &SeriesOptions) -> Result<SeriesVerdict> {
    let (rec, _) = is_transient(chain, opts)?;
    if rec != Recurrence::Recurrent {
        return Err(Error::NotRecurrent);
    }
    decide_series(&chain.edge, &chain.measure, SeriesShape::Feller, opts)
}

/// The three equivalent statements for a transient chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientEquivalence {
    pub esa: Verdict,
    /// Dirichlet and Neumann forms coincide.
    pub form_uniqueness: Verdict,
    pub measure_infinite: Verdict,
    pub hamburger: SeriesVerdict,
    pub measure: SeriesVerdict,
}

impl TransientEquivalence {
    pub fn agree(&self) -> bool {
        self.esa == self.form_uniqueness && self.form_uniqueness == self.measure_infinite
    }
}

/// On a transient chain the constant function lies in the Neumann form
/// domain but not the Dirichlet one exactly when it is square summable, so
/// the forms agree iff the measure is infinite. Essential self-adjointness
/// is decided independently from the Hamburger series; disagreement is
/// reported as an error.
pub fn transient_equivalence(chain: &BirthDeath, opts: &SeriesOptions) -> Result<TransientEquivalence> {
    let (rec, _) = is_transient(chain, opts)?;
    if rec != Recurrence::Transient {
        return Err(Error::NotTransient);
    }
    let hamburger = hamburger_esa(chain, opts)?;
    let (finite, measure) = measure_finite(chain, opts)?;
    let eq = TransientEquivalence {
        esa: Verdict::on_divergence(&hamburger),
        form_uniqueness: finite.negate(),
        measure_infinite: finite.negate(),
        hamburger,
        measure,
    };
    if eq.esa != Verdict::Inconclusive && eq.measure_infinite != Verdict::Inconclusive && !eq.agree() {
        return Err(Error::AssertionFailure(format!(
            "transient chain: ESA {:?} but measure infinite {:?}",
            eq.esa, eq.measure_infinite
        )));
    }
    Ok(eq)
}

/// Essential self-adjointness on a two-ray star: both ends must be ESA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarEsa {
    pub verdict: Verdict,
    pub positive: SeriesVerdict,
    pub negative: SeriesVerdict,
}

pub fn star_esa(star: &TwoRayStar, opts: &SeriesOptions) -> Result<StarEsa> {
    let positive = hamburger_esa(&star.ray(End::Positive)?, opts)?;
    let negative = hamburger_esa(&star.ray(End::Negative)?, opts)?;
    Ok(StarEsa {
        verdict: Verdict::on_divergence(&positive).and(Verdict::on_divergence(&negative)),
        positive,
        negative,
    })
}
