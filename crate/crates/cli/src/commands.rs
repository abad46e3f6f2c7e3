use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use chainspec::capacity::{capacity, CapacityKind, CapacityOptions, CapacityRecord};
use chainspec::constructions::{assemble_star, attach_pendants, stability_break_example, RayAttachment};
use chainspec::criteria::Verdict;
use chainspec::graph::{BirthDeath, End, GraphSpec, Potential, Vertex};
use chainspec::green::{green_closed_form, green_exhaustion};
use chainspec::harmonic::{chain_harmonic, doubled_chain, doubled_harmonic, star_harmonic, HarmonicSolution};
use chainspec::report::{classify, render_text, verdict_word, ReportOptions};
use chainspec::schrodinger::{make_esa_potential, schrodinger_esa};
use chainspec::sequence::SequenceSpec;
use chainspec::series::SeriesOptions;
use serde::Serialize;
use serde_json::json;

use crate::{Command, Common, ConstructOp, Outcome};

/// Exhaustion radii when no schedule is given.
const GREEN_RADII: [usize; 4] = [10, 20, 40, 80];
/// Closed-form Green values printed for transient chains.
const GREEN_SHOWN: usize = 6;
const HARMONIC_SHOWN: usize = 8;

pub fn dispatch(cmd: &Command, g: &GraphSpec, opts: &SeriesOptions) -> Result<Outcome> {
    match cmd {
        Command::Classify(c) => report(g, c, opts, false),
        Command::Report(c) => report(g, c, opts, true),
        Command::Capacity { common, k } => capacity_cmd(g, common, opts, *k),
        Command::Harmonic { common, v0, v1, upto } => harmonic(g, common, *v0, *v1, *upto),
        Command::Green(c) => green(g, c),
        Command::Liouville(_) => liouville(g, opts),
        Command::Schrodinger {
            common,
            potential,
            forcing,
        } => schrodinger(g, common, opts, potential.as_deref(), *forcing),
        Command::Construct {
            common,
            op,
            pendant_edge,
            pendant_measure,
        } => construct(
            g,
            common,
            opts,
            *op,
            pendant_edge.as_deref(),
            pendant_measure.as_deref(),
        ),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn chain_of(g: &GraphSpec, what: &str) -> Result<BirthDeath> {
    match g {
        GraphSpec::Chain(c) => Ok(c.clone()),
        other => bail!("{what} needs a chain, got a {} graph", other.kind()),
    }
}

/// Inline JSON, or the contents of `@path`.
fn json_arg<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => arg.to_owned(),
    };
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{what}:{}:{}: parse error: {e}", e.line(), e.column()))
}

fn capacity_options(c: &Common, opts: &SeriesOptions, k: Option<usize>) -> CapacityOptions {
    let mut o = CapacityOptions {
        k,
        series: *opts,
        ..CapacityOptions::default()
    };
    if let Some(s) = &c.schedule {
        o.schedule = s.0.clone();
    }
    if let Some(t) = c.zero_tol {
        o.zero_tol = t;
    }
    o
}

fn report(g: &GraphSpec, c: &Common, opts: &SeriesOptions, full: bool) -> Result<Outcome> {
    let ro = ReportOptions {
        series: *opts,
        capacity: (full && matches!(g, GraphSpec::Chain(_))).then(|| capacity_options(c, opts, None)),
    };
    let r = classify(g, &ro)?;
    Ok(Outcome {
        json: to_json(&r)?,
        text: render_text(&r),
        headline: r.verdict("esa"),
    })
}

fn capacity_text(rec: &CapacityRecord) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "capacity (k = {})", rec.k.map_or("none".into(), |k| k.to_string()));
    if let CapacityKind::Infinite { reason } = &rec.kind {
        let _ = writeln!(t, "  infinite: {reason}");
    }
    for (n, v) in &rec.minima {
        let _ = writeln!(t, "  n={n:<6} {v:.9e}");
    }
    if let Some(x) = rec.extrapolated {
        let _ = writeln!(t, "extrapolated limit: {x:.6e}");
    }
    if let Some(lb) = rec.lower_bound {
        let _ = writeln!(t, "lower bound 1/(C(k) C^2): {lb:.6e}");
    }
    let _ = writeln!(t, "Dichotomy: {:?} [capacity-dichotomy]", rec.dichotomy);
    t
}

fn capacity_cmd(g: &GraphSpec, c: &Common, opts: &SeriesOptions, k: Option<usize>) -> Result<Outcome> {
    let chain = chain_of(g, "capacity")?;
    let rec = capacity(&chain, &capacity_options(c, opts, k))?;
    let headline = Some(match rec.dichotomy {
        chainspec::capacity::Dichotomy::Inconclusive => Verdict::Inconclusive,
        _ => Verdict::Holds,
    });
    Ok(Outcome {
        json: to_json(&rec)?,
        text: capacity_text(&rec),
        headline,
    })
}

fn harmonic_text(sol: &HarmonicSolution, opts: &SeriesOptions) -> Result<String> {
    let mut t = String::new();
    let _ = writeln!(t, "flux b(0,1)(v(1)-v(0)): {:.12e}", sol.flux);
    for end in [End::Positive, End::Negative] {
        if let Some(e) = sol.end(end) {
            let _ = writeln!(t, "end {end}: {:?}", e.behaviour(opts)?);
        }
    }
    let res = sol.residual()?;
    let _ = writeln!(
        t,
        "residual on depth {}: max |Lv| = {:.3e}, relative {:.3e}, flux deviation {:.3e}",
        sol.upto, res.max_abs, res.max_relative, res.flux_relative
    );
    let shown: Vec<String> = sol
        .values_pos
        .iter()
        .take(HARMONIC_SHOWN)
        .map(|v| format!("{v:.6}"))
        .collect();
    let _ = writeln!(t, "v(0..): {}", shown.join(" "));
    if !sol.values_neg.is_empty() {
        let shown: Vec<String> = sol
            .values_neg
            .iter()
            .take(HARMONIC_SHOWN)
            .map(|v| format!("{v:.6}"))
            .collect();
        let _ = writeln!(t, "v(-1..): {}", shown.join(" "));
    }
    Ok(t)
}

fn harmonic(g: &GraphSpec, c: &Common, v0: f64, v1: f64, upto: usize) -> Result<Outcome> {
    let opts = c.series()?;
    let sol = match (g, c.bridge) {
        (GraphSpec::Chain(ch), Some(bridge)) => doubled_harmonic(&doubled_chain(ch, bridge)?, v1, upto)?,
        (GraphSpec::Chain(ch), None) => chain_harmonic(ch, v0, v1, upto)?,
        (GraphSpec::TwoRayStar(s), _) => star_harmonic(s, v0, v1, upto)?,
        (other, _) => bail!("harmonic needs a chain or two-ray star, got a {} graph", other.kind()),
    };
    let residual = sol.residual()?;
    Ok(Outcome {
        text: harmonic_text(&sol, &opts)?,
        json: json!({ "solution": to_json(&sol)?, "residual": to_json(&residual)? }),
        headline: None,
    })
}

fn green(g: &GraphSpec, c: &Common) -> Result<Outcome> {
    let pole = match g {
        GraphSpec::Chain(_) | GraphSpec::PendantChain(_) => Vertex::Chain(0),
        GraphSpec::TwoRayStar(_) => Vertex::Star(0),
        GraphSpec::StarLike(_) => Vertex::Hub(0),
        GraphSpec::Finite(_) => Vertex::Node(0),
    };
    let radii = c.schedule.as_ref().map_or(GREEN_RADII.to_vec(), |s| s.0.clone());
    let ex = green_exhaustion(g, pole, &radii)?;
    let closed: Option<Vec<(usize, f64, f64)>> = match g {
        GraphSpec::Chain(ch) => (0..GREEN_SHOWN)
            .map(|r| green_closed_form(ch, r).map(|s| (r, s.value, s.error)))
            .collect::<chainspec::Result<Vec<_>>>()
            .ok(),
        _ => None,
    };
    let mut t = String::new();
    let _ = writeln!(t, "pole {}", ex.pole);
    for (r, v) in radii.iter().zip(ex.pole_values()) {
        let _ = writeln!(t, "  g_{r}(pole) = {v:.12e}");
    }
    match &closed {
        Some(vals) => {
            for (r, v, e) in vals {
                let _ = writeln!(t, "  g({r}) = {v:.12e} (+/- {e:.1e})");
            }
        }
        None if matches!(g, GraphSpec::Chain(_)) => {
            let _ = writeln!(t, "  recurrent: approximants grow without bound");
        }
        None => {}
    }
    Ok(Outcome {
        json: json!({ "exhaustion": to_json(&ex)?, "closed_form": closed }),
        text: t,
        headline: None,
    })
}

fn liouville(g: &GraphSpec, opts: &SeriesOptions) -> Result<Outcome> {
    let r = classify(
        g,
        &ReportOptions {
            series: *opts,
            capacity: None,
        },
    )?;
    let entry = r.properties.get("liouville").cloned();
    let verdict = entry.as_ref().map_or(Verdict::Inconclusive, |e| e.verdict);
    let mut t = String::new();
    match &entry {
        Some(e) => {
            let _ = writeln!(
                t,
                "l2-Liouville: {} ({}) [{}]",
                verdict_word(verdict),
                e.note,
                e.citation
            );
        }
        None => {
            let _ = writeln!(t, "l2-Liouville: UNKNOWN (condition (A) fails) [condition-a]");
        }
    }
    if let Some(res) = r.liouville.as_ref().and_then(|l| l.residual) {
        let _ = writeln!(
            t,
            "witness residual: {:.3e} (relative {:.3e})",
            res.max_abs, res.max_relative
        );
    }
    if let Some(w) = &r.star_like_witness {
        let _ = writeln!(t, "witness on ray {}", w.ray);
    }
    let json = json!({
        "verdict": verdict,
        "entry": entry,
        "liouville": r.liouville,
        "star_like_witness": r.star_like_witness,
    });
    Ok(Outcome {
        json,
        text: t,
        headline: Some(verdict),
    })
}

fn schrodinger(
    g: &GraphSpec,
    c: &Common,
    opts: &SeriesOptions,
    potential: Option<&str>,
    forcing: bool,
) -> Result<Outcome> {
    if forcing {
        let p = make_esa_potential(g, opts)?;
        let mut t = String::new();
        for cert in &p.certificates {
            let _ = writeln!(t, "path {}: {:?}", cert.path, cert.verdict.outcome);
        }
        if let Some(table) = p.table()? {
            let _ = writeln!(t, "W = {table:?}");
        }
        let all = p.certificates.iter().all(|c| c.verdict.diverges());
        let headline = if all { Verdict::Holds } else { Verdict::Inconclusive };
        return Ok(Outcome {
            json: to_json(&p)?,
            text: t,
            headline: Some(headline),
        });
    }
    let chain = chain_of(g, "schrodinger")?;
    let w: Potential = match potential {
        Some(p) => json_arg(p, "potential")?,
        None => Potential::zero(),
    };
    let rep = schrodinger_esa(&chain, &w, c.lambda, opts)?;
    let mut t = String::new();
    let _ = writeln!(t, "lambda = {}", rep.lambda);
    let _ = writeln!(
        t,
        "Berezanskii: {} [berezanskii-test]",
        verdict_word(rep.berezanskii.verdict)
    );
    if let Some(b) = &rep.bounded_potential {
        let _ = writeln!(
            t,
            "Bounded potential: {} [bounded-potential-comparison]",
            verdict_word(b.verdict)
        );
    }
    if let Some(b) = &rep.bounded_v {
        let _ = writeln!(
            t,
            "Bounded eigenfunction: {} [bounded-eigenfunction]",
            verdict_word(b.verdict)
        );
    }
    if let Some(s) = &rep.ground_state {
        let _ = writeln!(t, "Ground-state series: {:?} [ground-state-transform]", s.outcome);
    }
    let _ = writeln!(t, "ESA: {}", verdict_word(rep.verdict));
    Ok(Outcome {
        json: to_json(&rep)?,
        text: t,
        headline: Some(rep.verdict),
    })
}

fn construct(
    g: &GraphSpec,
    c: &Common,
    opts: &SeriesOptions,
    op: ConstructOp,
    pendant_edge: Option<&str>,
    pendant_measure: Option<&str>,
) -> Result<Outcome> {
    let seq = |arg: Option<&str>, what: &str| -> Result<SequenceSpec> {
        arg.map_or(Ok(SequenceSpec::constant(1.0)), |a| json_arg(a, what))
    };
    let (graph, record, headline) = match op {
        ConstructOp::Double => {
            let d = doubled_chain(&chain_of(g, "doubling")?, c.bridge.unwrap_or(1.0))?;
            let graph = GraphSpec::TwoRayStar(d.star.clone());
            (graph, to_json(&d)?, None)
        }
        ConstructOp::Pendants => {
            let att = attach_pendants(
                g,
                &seq(pendant_edge, "pendant-edge")?,
                &seq(pendant_measure, "pendant-measure")?,
                opts,
            )?;
            let v = att.verdict;
            (att.graph.clone(), to_json(&att)?, Some(v))
        }
        ConstructOp::Stability => {
            let chain = chain_of(g, "stability")?;
            let brk = stability_break_example(
                &chain,
                &seq(pendant_edge, "pendant-edge")?,
                &seq(pendant_measure, "pendant-measure")?,
                opts,
            )?;
            let v = if brk.breaks {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            };
            (brk.graph.clone(), to_json(&brk)?, Some(v))
        }
        ConstructOp::Star => {
            let GraphSpec::StarLike(s) = g else {
                bail!("star assembly needs a star_like spec, got {}", g.kind())
            };
            let rays = s
                .rays
                .iter()
                .map(|r| RayAttachment {
                    edges: vec![(r.attach, r.weight)],
                    chain: r.chain.clone(),
                })
                .collect();
            let graph = assemble_star(s.hub.clone(), rays, s.family.clone())?;
            (graph.clone(), to_json(&graph)?, None)
        }
    };
    let json = if c.json { record } else { to_json(&graph)? };
    let text = serde_json::to_string_pretty(&graph)? + "\n";
    Ok(Outcome { json, text, headline })
}
