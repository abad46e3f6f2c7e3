//! Full classification of a graph: every applicable criterion, its series
//! evidence, a citation anchor, and cross-checks between the verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity, CapacityKind, CapacityOptions, CapacityRecord, Dichotomy};
use crate::constructions::{boundary_degree_bound, pendant_certificate, star_like_esa, Split, DEFAULT_PROBE_DEPTH};
use crate::criteria::{feller, hamburger_esa, is_transient, measure_finite, star_esa, Recurrence, Verdict};
use crate::error::{Error, Result};
use crate::graph::{check_condition_a, BirthDeath, End, GraphSpec};
use crate::green::{liouville_two_ray, starlike_liouville_witness, LiouvilleVerdict, StarLikeWitness};
use crate::series::{decide_series, Outcome, SeriesOptions, SeriesShape, SeriesVerdict};

pub const SCHEMA: &str = "chainspec/1";

/// Citation anchors, one per criterion.
pub mod cite {
    pub const CONDITION_A: &str = "condition-a";
    pub const HAMBURGER: &str = "hamburger-criterion";
    pub const TRANSIENCE: &str = "transience-series";
    pub const MEASURE: &str = "finite-measure";
    pub const FELLER: &str = "feller-criterion";
    pub const TRANSIENT_EQUIVALENCE: &str = "transient-chain-equivalence";
    pub const ESA_FORM_UNIQUENESS: &str = "esa-implies-form-uniqueness";
    pub const TWO_RAY: &str = "two-ray-star-esa";
    pub const STAR_LIKE: &str = "star-like-characterization";
    pub const PENDANT: &str = "pendant-completion";
    pub const STABILITY: &str = "boundary-degree-stability";
    pub const CHAIN_HARMONIC: &str = "chain-harmonic-recursion";
    pub const LIOUVILLE_TWO_RAY: &str = "two-ray-liouville-classification";
    pub const LIOUVILLE_STAR_LIKE: &str = "star-like-liouville-witness";
    pub const ESA_LIOUVILLE: &str = "esa-implies-liouville";
    pub const CAPACITY: &str = "capacity-dichotomy";
    pub const FINITE_GRAPH: &str = "finite-graph";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesVerdict>,
    pub citation: String,
    /// Short human-readable reason.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl PropertyEntry {
    fn new(verdict: Verdict, citation: &str, note: impl Into<String>) -> Self {
        Self {
            verdict,
            series: None,
            citation: citation.into(),
            note: note.into(),
        }
    }

    fn with_series(mut self, s: SeriesVerdict) -> Self {
        self.series = Some(s);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub schema: String,
    pub kind: String,
    pub properties: BTreeMap<String, PropertyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liouville: Option<LiouvilleVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_like_witness: Option<StarLikeWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityRecord>,
    pub consistency: Vec<ConsistencyCheck>,
}

impl PropertyReport {
    pub fn verdict(&self, property: &str) -> Option<Verdict> {
        self.properties.get(property).map(|p| p.verdict)
    }

    pub fn consistent(&self) -> bool {
        self.consistency.iter().all(|c| c.ok)
    }

    /// `(property, citation)` for every decided property.
    pub fn citations(&self) -> Vec<(String, String)> {
        self.properties
            .iter()
            .filter(|(_, p)| p.verdict != Verdict::Inconclusive)
            .map(|(k, p)| (k.clone(), p.citation.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub series: SeriesOptions,
    /// Run the capacity minimisation for chains.
    pub capacity: Option<CapacityOptions>,
}

struct Builder {
    report: PropertyReport,
}

impl Builder {
    fn new(kind: &str) -> Self {
        Self {
            report: PropertyReport {
                schema: SCHEMA.into(),
                kind: kind.into(),
                properties: BTreeMap::new(),
                liouville: None,
                star_like_witness: None,
                capacity: None,
                consistency: Vec::new(),
            },
        }
    }

    fn set(&mut self, key: impl Into<String>, entry: PropertyEntry) {
        self.report.properties.insert(key.into(), entry);
    }

    fn get(&self, key: &str) -> Verdict {
        self.report.verdict(key).unwrap_or(Verdict::Inconclusive)
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.report.consistency.push(ConsistencyCheck {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }

    /// `premise ⇒ conclusion` on decided verdicts.
    fn implication(&mut self, name: &str, premise: &str, conclusion: &str) {
        let (p, c) = (self.get(premise), self.get(conclusion));
        if p.holds() {
            let ok = c != Verdict::Fails;
            self.check(
                name,
                ok,
                if ok {
                    String::new()
                } else {
                    format!("{premise} holds but {conclusion} fails")
                },
            );
        }
    }
}

fn outcome_note(v: &SeriesVerdict, name: &str) -> String {
    let word = match v.outcome {
        Outcome::Diverges => "diverges",
        Outcome::Converges => "converges",
        Outcome::Inconclusive => "inconclusive",
    };
    format!("{name} {word}")
}

/// Properties of one chain-like end; keys get `suffix` appended.
fn chain_properties(b: &mut Builder, chain: &BirthDeath, suffix: &str, opts: &SeriesOptions) -> Result<()> {
    let key = |k: &str| format!("{k}{suffix}");
    let ham = hamburger_esa(chain, opts)?;
    b.set(
        key("esa"),
        PropertyEntry::new(
            Verdict::on_divergence(&ham),
            cite::HAMBURGER,
            outcome_note(&ham, "Hamburger"),
        )
        .with_series(ham),
    );
    let (rec, series) = is_transient(chain, opts)?;
    let transient = match rec {
        Recurrence::Transient => Verdict::Holds,
        Recurrence::Recurrent => Verdict::Fails,
        Recurrence::Inconclusive => Verdict::Inconclusive,
    };
    b.set(
        key("transient"),
        PropertyEntry::new(transient, cite::TRANSIENCE, outcome_note(&series, "sum 1/b")).with_series(series),
    );
    let (finite, series) = measure_finite(chain, opts)?;
    b.set(
        key("measure_finite"),
        PropertyEntry::new(finite, cite::MEASURE, outcome_note(&series, "sum m")).with_series(series),
    );
    match rec {
        Recurrence::Recurrent => {
            let f = feller(chain, opts)?;
            b.set(
                key("feller"),
                PropertyEntry::new(
                    Verdict::on_divergence(&f),
                    cite::FELLER,
                    outcome_note(&f, "Feller series"),
                )
                .with_series(f),
            );
            let esa = b.get(&key("esa"));
            let form = if esa.holds() {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            };
            b.set(
                key("form_uniqueness"),
                PropertyEntry::new(form, cite::ESA_FORM_UNIQUENESS, "decided only when ESA holds"),
            );
            b.implication(
                &format!("feller implies hamburger{suffix}"),
                &key("feller"),
                &key("esa"),
            );
        }
        Recurrence::Transient => {
            b.set(
                key("form_uniqueness"),
                PropertyEntry::new(finite.negate(), cite::TRANSIENT_EQUIVALENCE, "equals infinite measure"),
            );
            let (esa, inf) = (b.get(&key("esa")), finite.negate());
            if esa != Verdict::Inconclusive && inf != Verdict::Inconclusive {
                let ok = esa == inf;
                b.check(
                    format!("transient equivalence{suffix}"),
                    ok,
                    if ok {
                        String::new()
                    } else {
                        format!("ESA {esa:?} but infinite measure {inf:?}")
                    },
                );
            }
        }
        Recurrence::Inconclusive => {}
    }
    Ok(())
}

fn capacity_property(b: &mut Builder, chain: &BirthDeath, opts: &CapacityOptions) -> Result<()> {
    let rec = capacity(chain, opts)?;
    let verdict = match (&rec.kind, rec.dichotomy) {
        (CapacityKind::Infinite { .. }, _) | (_, Dichotomy::Zero | Dichotomy::Infinite) => Verdict::Holds,
        (_, Dichotomy::PositiveFinite) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let note = format!("capacity {:?}", rec.dichotomy).to_lowercase();
    b.set("esa_by_capacity", PropertyEntry::new(verdict, cite::CAPACITY, note));
    let (a, c) = (b.get("esa"), verdict);
    if a != Verdict::Inconclusive && c != Verdict::Inconclusive {
        b.check(
            "capacity agrees with hamburger",
            a == c,
            if a == c {
                String::new()
            } else {
                format!("{a:?} vs {c:?}")
            },
        );
    }
    b.report.capacity = Some(rec);
    Ok(())
}

/// Run every applicable criterion on `g`.
pub fn classify(g: &GraphSpec, opts: &ReportOptions) -> Result<PropertyReport> {
    let so = &opts.series;
    let mut b = Builder::new(g.kind());
    match check_condition_a(g) {
        Ok(()) => b.set("condition_a", PropertyEntry::new(Verdict::Holds, cite::CONDITION_A, "")),
        Err(e @ Error::ConditionAFailure { .. }) => {
            b.set(
                "condition_a",
                PropertyEntry::new(Verdict::Fails, cite::CONDITION_A, e.to_string()),
            );
            return Ok(b.report);
        }
        Err(e) => return Err(e),
    }
    match g {
        GraphSpec::Chain(c) => {
            chain_properties(&mut b, c, "", so)?;
            b.set(
                "liouville",
                PropertyEntry::new(
                    Verdict::Holds,
                    cite::CHAIN_HARMONIC,
                    "harmonic functions on a chain are constant",
                ),
            );
            if let Some(copts) = &opts.capacity {
                capacity_property(&mut b, c, copts)?;
            }
        }
        GraphSpec::TwoRayStar(s) => {
            for (end, suffix) in [(End::Positive, "+"), (End::Negative, "-")] {
                chain_properties(&mut b, &s.ray(end)?, suffix, so)?;
            }
            let esa = star_esa(s, so)?;
            b.set("esa", PropertyEntry::new(esa.verdict, cite::TWO_RAY, "both ends"));
            let liou = liouville_two_ray(s, so)?;
            b.set(
                "liouville",
                PropertyEntry::new(liou.verdict, cite::LIOUVILLE_TWO_RAY, liou.reason.clone()),
            );
            b.report.liouville = Some(liou);
        }
        GraphSpec::StarLike(s) => {
            for (i, ray) in s.rays.iter().enumerate() {
                chain_properties(&mut b, &ray.chain, &format!("[ray {i}]"), so)?;
            }
            if let Some(fam) = &s.family {
                chain_properties(&mut b, &fam.member(0)?, "[family]", so)?;
            }
            let esa = match star_like_esa(s, so) {
                Ok(r) => PropertyEntry::new(r.verdict, cite::STAR_LIKE, "every ray"),
                Err(Error::BoundaryDegreeUnbounded(i)) => PropertyEntry::new(
                    Verdict::Inconclusive,
                    cite::STAR_LIKE,
                    format!("boundary degree unbounded at index {i}"),
                ),
                Err(e) => return Err(e),
            };
            let esa_holds = esa.verdict.holds();
            b.set("esa", esa);
            if esa_holds {
                b.set(
                    "liouville",
                    PropertyEntry::new(Verdict::Holds, cite::ESA_LIOUVILLE, "ESA"),
                );
            } else {
                match starlike_liouville_witness(s, so) {
                    Ok(w) => {
                        b.set(
                            "liouville",
                            PropertyEntry::new(
                                Verdict::Fails,
                                cite::LIOUVILLE_STAR_LIKE,
                                format!("l2 witness on ray {}", w.ray),
                            ),
                        );
                        b.report.star_like_witness = Some(w);
                    }
                    Err(
                        e @ (Error::NoNonEsaRay
                        | Error::Unsupported(_)
                        | Error::EndNotTransient(_)
                        | Error::NotTransient
                        | Error::GreenNotL2
                        | Error::SolverFailure(_)),
                    ) => {
                        b.set(
                            "liouville",
                            PropertyEntry::new(Verdict::Inconclusive, cite::LIOUVILLE_STAR_LIKE, e.to_string()),
                        );
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        GraphSpec::PendantChain(p) => {
            chain_properties(&mut b, &p.base, "[base]", so)?;
            let cert = pendant_certificate(&p.pendant_edge, &p.pendant_measure, so)?;
            let bound = boundary_degree_bound(g, &Split::Spine, DEFAULT_PROBE_DEPTH)?;
            let entry = if cert.diverges() {
                PropertyEntry::new(Verdict::Holds, cite::PENDANT, "pendant certificate diverges")
            } else if bound.is_bounded() {
                PropertyEntry::new(
                    b.get("esa[base]"),
                    cite::STABILITY,
                    "bounded boundary degree; spine decides",
                )
            } else {
                PropertyEntry::new(
                    Verdict::Inconclusive,
                    cite::PENDANT,
                    "no certificate and unbounded boundary degree",
                )
            };
            b.set("esa", entry.with_series(cert));
            b.set(
                "transient",
                PropertyEntry::new(b.get("transient[base]"), cite::TRANSIENCE, "pendants are dead ends"),
            );
            let pm = decide_series(&p.pendant_edge, &p.pendant_measure, SeriesShape::Measure, so)?;
            let finite = b.get("measure_finite[base]").and(Verdict::on_convergence(&pm));
            b.set(
                "measure_finite",
                PropertyEntry::new(finite, cite::MEASURE, "spine and pendants").with_series(pm),
            );
            b.set(
                "liouville",
                PropertyEntry::new(
                    Verdict::Holds,
                    cite::CHAIN_HARMONIC,
                    "pendant values copy the spine, which is constant",
                ),
            );
        }
        GraphSpec::Finite(f) => {
            b.set(
                "esa",
                PropertyEntry::new(Verdict::Holds, cite::FINITE_GRAPH, "bounded operator"),
            );
            b.set(
                "measure_finite",
                PropertyEntry::new(Verdict::Holds, cite::FINITE_GRAPH, ""),
            );
            let connected = f.is_connected();
            let liou = if connected { Verdict::Holds } else { Verdict::Fails };
            b.set(
                "liouville",
                PropertyEntry::new(
                    liou,
                    cite::FINITE_GRAPH,
                    if connected { "connected" } else { "disconnected" },
                ),
            );
        }
    }
    b.implication("esa implies liouville", "esa", "liouville");
    Ok(b.report)
}

pub fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "YES",
        Verdict::Fails => "NO",
        Verdict::Inconclusive => "UNKNOWN",
    }
}

fn label(key: &str) -> String {
    let (base, rest) = key.split_at(key.find(['[', '+', '-']).unwrap_or(key.len()));
    let name = match base {
        "esa" => "ESA",
        "esa_by_capacity" => "ESA (capacity)",
        "transient" => "Transient",
        "measure_finite" => "Finite measure",
        "feller" => "Feller",
        "form_uniqueness" => "Form uniqueness",
        "liouville" => "l2-Liouville",
        "condition_a" => "Condition (A)",
        other => other,
    };
    format!("{name}{rest}")
}

/// One line per property: `ESA: YES (Hamburger diverges) [hamburger-criterion]`.
pub fn render_text(report: &PropertyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} graph", report.kind);
    for (key, p) in &report.properties {
        let note = if p.note.is_empty() {
            String::new()
        } else {
            format!(" ({})", p.note)
        };
        let _ = writeln!(
            out,
            "{}: {}{} [{}]",
            label(key),
            verdict_word(p.verdict),
            note,
            p.citation
        );
    }
    if let Some(c) = &report.capacity {
        for (n, v) in &c.minima {
            let _ = writeln!(out, "  capacity n={n}: {v:.6e}");
        }
    }
    for c in report.consistency.iter().filter(|c| !c.ok) {
        let _ = writeln!(out, "INCONSISTENT {}: {}", c.name, c.detail);
    }
    out
}
