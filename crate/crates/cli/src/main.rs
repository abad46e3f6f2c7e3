use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use chainspec::corpus::random_graph;
use chainspec::criteria::Verdict;
use chainspec::graph::GraphSpec;
use chainspec::series::SeriesOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod commands;
mod params;

use params::{grid, Param};

#[derive(Debug, Parser)]
#[command(
    name = "chainspec",
    version,
    about = "Decide analytic properties of Laplacians on weighted chains, stars and star-like graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every criterion that applies to the graph
    Classify(Common),
    /// Classification plus capacity evidence for chains
    Report(Common),
    /// Capacity minima and the zero/infinite dichotomy of a chain
    Capacity {
        #[command(flatten)]
        common: Common,
        /// Minimise over functions vanishing on the first `k` vertices
        #[arg(long)]
        k: Option<usize>,
    },
    /// Harmonic function on a chain, doubled chain or two-ray star
    Harmonic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        v0: f64,
        #[arg(long, default_value_t = 1.0)]
        v1: f64,
        /// Window depth for stored values and residuals
        #[arg(long, default_value_t = 200)]
        upto: usize,
    },
    /// Green's function by exhaustion (radii from --schedule)
    Green(Common),
    /// Square-integrable Liouville property
    Liouville(Common),
    /// Essential self-adjointness of a chain Laplacian plus a potential
    Schrodinger {
        #[command(flatten)]
        common: Common,
        /// Potential as JSON, or @file
        #[arg(long)]
        potential: Option<String>,
        /// Build the potential that forces ESA on any graph instead
        #[arg(long)]
        forcing: bool,
    },
    /// Build a new graph spec from the input
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        op: ConstructOp,
        /// Pendant edge weights as a sequence JSON (default constant 1)
        #[arg(long)]
        pendant_edge: Option<String>,
        /// Pendant masses as a sequence JSON (default constant 1)
        #[arg(long)]
        pendant_measure: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructOp {
    /// Glue a chain to a mirrored copy through a bridge edge
    Double,
    /// Hang a pendant vertex off every vertex
    Pendants,
    /// Pendant supergraph of a non-ESA chain, with both certificates
    Stability,
    /// Validate a star-like spec and rebuild it
    Star,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Graph spec JSON file
    #[arg(value_name = "SPEC")]
    spec: Option<PathBuf>,
    #[arg(short, long, conflicts_with = "spec")]
    input: Option<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
    /// Exit with status 2 when the headline verdict is inconclusive
    #[arg(long)]
    strict: bool,
    /// Numeric series budget (terms)
    #[arg(long, default_value_t = SeriesOptions::default().budget)]
    budget: usize,
    /// Partial sums above this count as divergence
    #[arg(long, default_value_t = SeriesOptions::default().blow_threshold)]
    blow_threshold: f64,
    /// Comma-separated, strictly increasing sizes
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
    /// Capacity values below this count as zero
    #[arg(long)]
    zero_tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Bridge weight for doubling
    #[arg(long)]
    bridge: Option<f64>,
    /// name=value or name=start:step:end, substituted for "$name" in the graph file
    #[arg(long)]
    param: Vec<String>,
    /// Generate random graphs instead of reading a spec
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random graphs drawn with --seed
    #[arg(long, default_value_t = 1, requires = "seed")]
    count: usize,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Schedule(Vec<usize>);

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err("schedule must be non-empty and strictly increasing".into());
    }
    Ok(Schedule(v))
}

impl Common {
    fn series(&self) -> Result<SeriesOptions> {
        ensure!(self.blow_threshold > 0.0, "--blow-threshold must be positive");
        if let Some(t) = self.zero_tol {
            ensure!(t > 0.0, "--zero-tol must be positive");
        }
        if let Some(b) = self.bridge {
            ensure!(b > 0.0 && b.is_finite(), "--bridge must be positive");
        }
        Ok(SeriesOptions {
            budget: self.budget,
            blow_threshold: self.blow_threshold,
        })
    }

    fn path(&self) -> Option<&PathBuf> {
        self.spec.as_ref().or(self.input.as_ref())
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Classify(c) | Command::Report(c) | Command::Green(c) | Command::Liouville(c) => c,
            Command::Capacity { common, .. }
            | Command::Harmonic { common, .. }
            | Command::Schrodinger { common, .. }
            | Command::Construct { common, .. } => common,
        }
    }
}

/// Result of one command on one graph.
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
    /// Verdict consulted by `--strict`.
    pub headline: Option<Verdict>,
}

struct Run {
    label: Option<(String, serde_json::Value)>,
    graph: GraphSpec,
}

/// Parse a graph spec, reporting the location of the first error.
fn parse_spec(text: &str, origin: &str) -> Result<GraphSpec> {
    serde_json::from_str(text).map_err(|e| anyhow::anyhow!("{origin}:{}:{}: parse error: {e}", e.line(), e.column()))
}

fn load_runs(c: &Common) -> Result<Vec<Run>> {
    let params = c.param.iter().map(|p| Param::parse(p)).collect::<Result<Vec<_>>>()?;
    if let Some(seed) = c.seed {
        ensure!(
            c.path().is_none(),
            "--seed replaces the graph file; give one or the other"
        );
        ensure!(params.is_empty(), "--param needs a spec file");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..c.count)
            .map(|i| Run {
                label: (c.count > 1).then(|| (format!("sample {i}"), serde_json::json!({ "seed": seed, "sample": i }))),
                graph: random_graph(&mut rng),
            })
            .collect());
    }
    let Some(path) = c.path() else {
        bail!("no graph spec given (pass a file, -i, or --seed)")
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let origin = path.display().to_string();
    if params.is_empty() {
        return Ok(vec![Run {
            label: None,
            graph: parse_spec(&text, &origin)?,
        }]);
    }
    grid(&params)
        .into_iter()
        .map(|a| {
            let graph = parse_spec(&a.apply(&text), &origin)?;
            Ok(Run {
                label: Some((a.to_string(), a.to_json())),
                graph,
            })
        })
        .collect()
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let c = cli.command.common();
    let opts = c.series()?;
    let runs = load_runs(c)?;
    let mut outcomes = Vec::with_capacity(runs.len());
    for r in &runs {
        let out = commands::dispatch(&cli.command, &r.graph, &opts).with_context(|| {
            r.label
                .as_ref()
                .map_or_else(|| "analysis failed".into(), |(l, _)| format!("analysis failed at {l}"))
        })?;
        outcomes.push(out);
    }
    let labelled = runs.iter().any(|r| r.label.is_some());
    let body = if c.json {
        let value = if labelled {
            serde_json::Value::Array(
                runs.iter()
                    .zip(&outcomes)
                    .map(|(r, o)| serde_json::json!({ "params": r.label.as_ref().map(|l| &l.1), "result": o.json }))
                    .collect(),
            )
        } else {
            outcomes[0].json.clone()
        };
        serde_json::to_string_pretty(&value)? + "\n"
    } else {
        runs.iter()
            .zip(&outcomes)
            .map(|(r, o)| match &r.label {
                Some((l, _)) => format!("## {l}\n{}", o.text),
                None => o.text.clone(),
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    match &c.out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    let inconclusive = outcomes.iter().any(|o| o.headline == Some(Verdict::Inconclusive));
    Ok(if c.strict && inconclusive {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
