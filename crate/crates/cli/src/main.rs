//! `octa`: validate, reconstruct and compare octahedra from the command line.
//!
//! Data goes to standard output (or `-o PATH`, written atomically);
//! diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 `not_equivalent` and 4 `indeterminate` (only
//! with `decide --exit-on-verdict`), 2 invalid input, 3 reconstruction
//! failure.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use octa_core::genkit::random_convex_octahedron_at;
use octa_core::io::{
    decision_to_json, development_to_json, geometry_to_json, parse_development, parse_geometry, reconstruction_to_json,
};
use octa_core::{
    align_labelings, decide, develop, is_convex, perturb_development, reconstruct, Convexity, Error, GenConfig,
    Status, Tolerances, Verdict,
};
use serde_json::{json, Value};

const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RECONSTRUCTION: u8 = 3;
const EXIT_INDETERMINATE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "octa", version, about = "Convex octahedra from their natural developments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Write data to this file instead of standard output.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Bound on dimensionless equality residuals.
    #[arg(long, global = true, value_name = "EPS")]
    tol_rel: Option<f64>,
    /// Width of the marginal band for strict inequalities.
    #[arg(long, global = true, value_name = "EPS")]
    tol_geom: Option<f64>,
    /// Largest volume-ratio spread accepted as equivalent.
    #[arg(long, global = true, value_name = "EPS")]
    alpha_yes: Option<f64>,
    /// Smallest volume-ratio spread rejected as not equivalent.
    #[arg(long, global = true, value_name = "EPS")]
    alpha_no: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an octa-dev/1 development file.
    Validate { path: PathBuf },
    /// Reconstruct the convex octahedron with a given development.
    Reconstruct { path: PathBuf },
    /// Decide whether two developments belong to affinely equivalent octahedra.
    Decide {
        first: PathBuf,
        second: PathBuf,
        /// Try the 48 octahedral relabelings of the second development.
        #[arg(long)]
        search_labelings: bool,
        /// Exit 1 for not_equivalent and 4 for indeterminate.
        #[arg(long)]
        exit_on_verdict: bool,
    },
    /// Extract the development of an octa-geom/1 octahedron.
    Develop {
        path: PathBuf,
        /// Fail unless the octahedron is strictly convex.
        #[arg(long)]
        require_convex: bool,
    },
    /// Generate a random convex octahedron (octa-geom/1).
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.25)]
        noise: f64,
        /// Instance number within the seed's stream.
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Emit the development (octa-dev/1) instead of the geometry.
        #[arg(long)]
        development: bool,
    },
    /// Scale one edge of a development.
    Perturb {
        path: PathBuf,
        /// Edge key such as "01".
        #[arg(long)]
        edge: String,
        #[arg(long)]
        factor: f64,
    },
}

/// A failed command: exit code and message for standard error.
struct Failure {
    code: u8,
    message: String,
    /// Data still worth writing, such as a validation report.
    output: Option<Value>,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into(), output: None }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoRealization(_) => EXIT_RECONSTRUCTION,
            _ => EXIT_INVALID,
        };
        Self { code, message: e.to_string(), output: None }
    }
}

struct Success {
    output: Value,
    code: u8,
}

impl From<Value> for Success {
    fn from(output: Value) -> Self {
        Self { output, code: 0 }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn tolerances(g: &Global) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for (flag, value) in [("--tol-rel", g.tol_rel), ("--tol-geom", g.tol_geom), ("--alpha-yes", g.alpha_yes), ("--alpha-no", g.alpha_no)]
    {
        if let Some(v) = value {
            if !(v > 0.0 && v < 1.0) {
                return Err(Failure::invalid(format!("{flag} must lie in (0, 1), got {v}")));
            }
        }
    }
    tol.eps_rel = g.tol_rel.unwrap_or(tol.eps_rel);
    tol.eps_geom = g.tol_geom.unwrap_or(tol.eps_geom);
    tol.alpha_yes = g.alpha_yes.unwrap_or(tol.alpha_yes);
    tol.alpha_no = g.alpha_no.unwrap_or(tol.alpha_no);
    tol.validate()?;
    Ok(tol)
}

fn validate(path: &Path) -> Result<Success, Failure> {
    let text = read_input(path)?;
    match parse_development(&text) {
        Ok(dev) => Ok(json!({"valid": true, "development": development_to_json(&dev)}).into()),
        Err(Error::InvalidDevelopment(violations)) => {
            let message = Error::InvalidDevelopment(violations.clone()).to_string();
            Err(Failure {
                code: EXIT_INVALID,
                message,
                output: Some(json!({"valid": false, "violations": violations})),
            })
        }
        Err(e) => Err(Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
            output: Some(json!({"valid": false, "error": e.to_string()})),
        }),
    }
}

fn cmd_reconstruct(path: &Path, tol: &Tolerances) -> Result<Success, Failure> {
    let dev = parse_development(&read_input(path)?)?;
    let r = reconstruct(&dev, tol)?;
    let output = reconstruction_to_json(&r);
    if r.status == Status::Unique {
        return Ok(output.into());
    }
    Err(Failure {
        code: EXIT_RECONSTRUCTION,
        message: format!("reconstruction status {:?}: {}", r.status, r.diagnostics.join("; ")),
        output: Some(output),
    })
}

fn cmd_decide(first: &Path, second: &Path, search: bool, exit_on_verdict: bool, tol: &Tolerances) -> Result<Success, Failure> {
    let a = parse_development(&read_input(first)?)?;
    let mut b = parse_development(&read_input(second)?)?;
    let mut labeling = None;
    if search {
        let hits = align_labelings(&a, &b, tol)?;
        if let Some(best) = hits.first() {
            b = b.relabeled(&best.perm);
            labeling = Some(best.perm);
        }
        eprintln!("labeling search: {} relabeling(s) pass the volume-ratio screen", hits.len());
    }
    let d = decide(&a, &b, tol)?;
    let mut output = decision_to_json(&d);
    if search {
        output["details"]["labeling"] = json!(labeling);
    }
    for line in &d.diagnostics {
        eprintln!("{line}");
    }
    let unresolved = d.verdict == Verdict::Indeterminate && d.reconstructions.iter().any(|r| r.status != Status::Unique);
    if unresolved {
        return Err(Failure {
            code: EXIT_RECONSTRUCTION,
            message: "a development could not be reconstructed".into(),
            output: Some(output),
        });
    }
    let code = match (exit_on_verdict, d.verdict) {
        (true, Verdict::NotEquivalent) => EXIT_NOT_EQUIVALENT,
        (true, Verdict::Indeterminate) => EXIT_INDETERMINATE,
        _ => 0,
    };
    Ok(Success { output, code })
}

fn cmd_develop(path: &Path, require_convex: bool, tol: &Tolerances) -> Result<Success, Failure> {
    let oct = parse_geometry(&read_input(path)?)?;
    if require_convex {
        match is_convex(&oct, tol)? {
            Convexity::Convex => {}
            other => return Err(Failure::invalid(format!("octahedron is not strictly convex: {other:?}"))),
        }
    }
    Ok(development_to_json(&develop(&oct)).into())
}

fn cmd_generate(seed: u64, noise: f64, index: u64, development: bool) -> Result<Success, Failure> {
    let cfg = GenConfig { noise, ..GenConfig::with_seed(seed) };
    let oct = random_convex_octahedron_at(&cfg, index)?;
    Ok(if development { development_to_json(&develop(&oct)) } else { geometry_to_json(&oct) }.into())
}

fn cmd_perturb(path: &Path, edge: &str, factor: f64) -> Result<Success, Failure> {
    let dev = parse_development(&read_input(path)?)?;
    Ok(development_to_json(&perturb_development(&dev, edge, factor)?).into())
}

fn render(v: &Value, pretty: bool) -> String {
    let mut s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) }.expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, data: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(v: &Value, g: &Global) -> Result<(), Failure> {
    let text = render(v, g.pretty);
    match &g.output {
        Some(path) => write_atomic(path, &text).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::invalid(format!("cannot write to standard output: {e}"))),
    }
}

fn run(cli: &Cli) -> Result<Success, Failure> {
    let tol = tolerances(&cli.global)?;
    match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Reconstruct { path } => cmd_reconstruct(path, &tol),
        Command::Decide { first, second, search_labelings, exit_on_verdict } => {
            cmd_decide(first, second, *search_labelings, *exit_on_verdict, &tol)
        }
        Command::Develop { path, require_convex } => cmd_develop(path, *require_convex, &tol),
        Command::Generate { seed, noise, index, development } => cmd_generate(*seed, *noise, *index, *development),
        Command::Perturb { path, edge, factor } => cmd_perturb(path, edge, *factor),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(s) => match emit(&s.output, &cli.global) {
            Ok(()) => ExitCode::from(s.code),
            Err(f) => {
                eprintln!("error: {}", f.message);
                ExitCode::from(f.code)
            }
        },
        Err(f) => {
            if let Some(v) = &f.output {
                if let Err(e) = emit(v, &cli.global) {
                    eprintln!("error: {}", e.message);
                }
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
