//! Batch command-line front end for the eigenray library.
//!
//! Subcommands:
//!
//! - `validate` — report rule violations in a diagram file;
//! - `apply` — run an operation script transactionally, writing the result;
//! - `render` — deterministic SVG of a diagram with optional overlays;
//! - `trace` / `holonomy` / `seed` / `exact` — atlas and diagram analysis;
//! - `torsion` — homology invariants of a Novikov-coefficient complex;
//! - `ksval` — polygon valuation of a completed algebra element;
//! - `localcheck` — floating-point local-model suites;
//! - `fivecharts` — eigenray-pair enumeration on the standard two-node
//!   diagram.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition failure, 4 I/O
//! error.  Failures print a one-line machine-readable JSON object to stderr.
//! No command ever modifies its input files.

use clap::{Parser, Subcommand};
use eigenray::affine::Vec2Q;
use eigenray::atlas::{ChartAtlas, GeodesicPath, Loop};
use eigenray::diagram::{five_charts_report, DiagramDoc, EigenrayDiagram};
use eigenray::exact::{fmt_rat, parse_rat, Rat};
use eigenray::ks::{ks_val, ks_val_minimizers, KSElement, RationalPolygon};
use eigenray::novikov::NovikovComplex;
use eigenray::render::render_svg;
use eigenray::script::{
    exactness_to_json, map_to_json, run_script, seed_to_json, OperationScript,
};
use eigenray::{Error, Result};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "eigenray", version, about = "Eigenray diagram calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram file against the diagram rules and report violations.
    Validate {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Also write the report JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an operation script against a diagram, all-or-nothing.
    Apply {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Script JSON file.
        script: PathBuf,
        /// Output file for the resulting diagram JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a diagram to a deterministic SVG.
    Render {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Output SVG file.
        #[arg(long)]
        out: PathBuf,
        /// Traced-geodesic JSON files to draw over the diagram (repeatable).
        #[arg(long = "overlay")]
        overlays: Vec<PathBuf>,
    },
    /// Trace an affine geodesic through the diagram's chart atlas.
    Trace {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Start point as "x,y" with rational components.
        #[arg(allow_hyphen_values = true)]
        start: String,
        /// Initial direction as "x,y" with rational components.
        #[arg(allow_hyphen_values = true)]
        dir: String,
        /// Total length budget (rational, positive).
        #[arg(long, default_value = "1000000")]
        budget: String,
        /// Also write the traced path JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Holonomy of the nodal integral affine structure around a loop.
    Holonomy {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Loop vertices as "x,y" pairs (at least three).
        #[arg(num_args = 3.., required = true, allow_hyphen_values = true)]
        vertices: Vec<String>,
        /// Also write the holonomy JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the seed data: ray directions with their flux parameters.
    Seed {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Also write the seed JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide exactness and print the common base point when one exists.
    Exact {
        /// Diagram JSON file.
        diagram: PathBuf,
        /// Also write the verdict JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homology invariants of a Novikov-coefficient complex.
    Torsion {
        /// Complex JSON file.
        complex: PathBuf,
        /// Truncation level "p/q"; adds invariants of the truncated homology.
        #[arg(long)]
        precision: Option<String>,
        /// Also write the invariants JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polygon valuation of a completed algebra element.
    Ksval {
        /// Input JSON file with "polygon" and "element" fields.
        input: PathBuf,
        /// Re-truncate the element at this precision "p/q" first.
        #[arg(long)]
        precision: Option<String>,
        /// Also write the valuation JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the floating-point local-model check suites.
    Localcheck {
        /// Suite name: all, hopf, lagrangian, slide, flux, or probe.
        #[arg(default_value = "all")]
        suite: String,
        /// Tolerance for the symplectic-form checks.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Seed for the randomized sample points.
        #[arg(long = "seed-rng", default_value_t = 0x5317_C11)]
        seed_rng: u64,
        /// Also write the suite report JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate disjoint eigenray pairs on the standard two-node diagram.
    Fivecharts {
        /// Also write the enumeration report JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e)))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e)))
    })
}

fn load_diagram(path: &Path) -> Result<EigenrayDiagram> {
    EigenrayDiagram::from_json_str(&read_file(path)?)
}

fn parse_rational(s: &str) -> Result<Rat> {
    parse_rat(s).map_err(Error::parse)
}

fn parse_point(s: &str) -> Result<Vec2Q> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::parse(format!("expected \"x,y\", got {s:?}")))?;
    Ok(Vec2Q::new(parse_rational(x.trim())?, parse_rational(y.trim())?))
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).unwrap_or_else(|_| value.to_string());
    text.push('\n');
    text
}

/// Print the report to stdout and mirror it to `out` when requested.
fn emit(report: &Value, out: Option<&Path>) -> Result<()> {
    let text = pretty(report);
    print!("{text}");
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { diagram, out } => {
            let doc: DiagramDoc = serde_json::from_str(&read_file(&diagram)?)
                .map_err(|e| Error::parse(e.to_string()))?;
            let report = doc.validate();
            let ok = report.violations.is_empty();
            let value =
                serde_json::to_value(&report).map_err(|e| Error::parse(e.to_string()))?;
            emit(&json!({ "valid": ok, "report": value }), out.as_deref())?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Apply { diagram, script, out } => {
            let input = load_diagram(&diagram)?;
            let script = OperationScript::from_json_str(&read_file(&script)?)?;
            let outcome = run_script(&input, &script)?;
            write_file(&out, &outcome.diagram.to_json_string())?;
            print!("{}", pretty(&Value::from(outcome.reports)));
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { diagram, out, overlays } => {
            let input = load_diagram(&diagram)?;
            let mut paths = Vec::new();
            for overlay in &overlays {
                paths.push(GeodesicPath::from_json_str(&read_file(overlay)?)?);
            }
            write_file(&out, &render_svg(&input, &paths))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace { diagram, start, dir, budget, out } => {
            let atlas = ChartAtlas::new(load_diagram(&diagram)?);
            let path = atlas.trace_geodesic(
                &parse_point(&start)?,
                &parse_point(&dir)?,
                &parse_rational(&budget)?,
            )?;
            let value: Value = serde_json::from_str(&path.to_json_string())
                .map_err(|e| Error::parse(e.to_string()))?;
            emit(&value, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Holonomy { diagram, vertices, out } => {
            let atlas = ChartAtlas::new(load_diagram(&diagram)?);
            let vertices = vertices
                .iter()
                .map(|v| parse_point(v))
                .collect::<Result<Vec<_>>>()?;
            let map = atlas.holonomy(&Loop { vertices })?;
            emit(&map_to_json(&map), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Seed { diagram, out } => {
            let input = load_diagram(&diagram)?;
            emit(&seed_to_json(&input), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Exact { diagram, out } => {
            let input = load_diagram(&diagram)?;
            emit(&exactness_to_json(&input), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Torsion { complex, precision, out } => {
            let complex: NovikovComplex = serde_json::from_str(&read_file(&complex)?)
                .map_err(|e| Error::parse(e.to_string()))?;
            emit(&torsion_report(&complex, precision.as_deref())?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ksval { input, precision, out } => {
            let parsed: KsvalInput = serde_json::from_str(&read_file(&input)?)
                .map_err(|e| Error::parse(e.to_string()))?;
            emit(&ksval_report(parsed, precision.as_deref())?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Localcheck { suite, tol, seed_rng, out } => {
            let report = localcheck::run(&suite, tol, seed_rng)?;
            let ok = report["ok"].as_bool().unwrap_or(false);
            emit(&report, out.as_deref())?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Fivecharts { out } => {
            let report = five_charts_report()?;
            let value =
                serde_json::to_value(&report).map_err(|e| Error::parse(e.to_string()))?;
            println!(
                "{} direct + {} after slides = {}",
                report.direct_disjoint, report.additional, report.total
            );
            emit(&value, out.as_deref())?;
            Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}

#[derive(Deserialize)]
struct KsvalInput {
    polygon: RationalPolygon,
    element: KSElement,
}

fn torsion_report(complex: &NovikovComplex, precision: Option<&str>) -> Result<Value> {
    let mut degrees = Vec::new();
    let mut truncated = Vec::new();
    let level = precision.map(parse_rational).transpose()?;
    if let Some((lo, hi)) = complex.degree_span() {
        for k in lo..=hi {
            let inv = complex.homology_invariants(k);
            degrees.push(json!({
                "degree": k,
                "free_rank": inv.free_rank,
                "torsion": inv.torsion.iter().map(fmt_rat).collect::<Vec<_>>(),
            }));
            if let Some(level) = &level {
                let inv = complex.truncated_homology(level, k)?.invariants();
                truncated.push(json!({
                    "degree": k,
                    "free_rank": inv.free_rank,
                    "torsion": inv.torsion.iter().map(fmt_rat).collect::<Vec<_>>(),
                }));
            }
        }
    }
    let mut report = json!({ "degrees": degrees });
    if let Some(level) = &level {
        report["precision"] = Value::from(fmt_rat(level));
        report["truncated"] = Value::from(truncated);
    }
    Ok(report)
}

fn ksval_report(input: KsvalInput, precision: Option<&str>) -> Result<Value> {
    let KsvalInput { polygon, element } = input;
    let element = match precision {
        Some(p) => element.truncate_on(&polygon, &parse_rational(p)?),
        None => element,
    };
    let val = ks_val(&element, &polygon);
    let minimizers = ks_val_minimizers(&element, &polygon);
    Ok(json!({
        "val": val.as_ref().map(fmt_rat),
        "minimizers": minimizers,
        "precision": fmt_rat(element.precision()),
    }))
}

mod localcheck;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let kind = match &e {
                Error::Parse(_) => "parse",
                Error::Precondition(_) => "precondition",
                Error::Io(_) => "io",
            };
            eprintln!("{}", json!({ "kind": kind, "error": e.to_string() }));
            ExitCode::from(match &e {
                Error::Parse(_) => 2,
                Error::Precondition(_) => 3,
                Error::Io(_) => 4,
            })
        }
    }
}
