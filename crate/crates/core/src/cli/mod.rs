//! The `zygflow` command line: registry browsing, flow and transport runs,
//! estimator sweeps on arbitrary inputs, and the verification suites.
//!
//! Exit codes: 0 success, 1 a verification report failed, 2 usage error,
//! 3 computation failure, 4 nonpositive weight.

mod config;
mod output;

pub use config::{RunConfig, KEYS_HELP};
pub use output::{sha256_hex, OutputDir, OutputFile, RunManifest};

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{FieldNorms, FieldSpec, CATALOG};
use crate::flow::{backward_flow, forward_flow, lattice};
use crate::report::to_json_string;
use crate::sampled::SampledFunction;
use crate::transport::{characteristic_residual, solution_bmo_growth, transport_solve, InitialDatum};
use crate::verify::{run_suite, Suite};
use crate::weights::{ainfty_constant, ap_constant, bmo_norm, star_norm};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "zygflow", version, about = "Flows, transport and BMO estimators for Zygmund vector fields", after_help = KEYS_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Grid half width (`grid.L`).
    #[arg(long = "L", global = true, value_name = "L")]
    half_width: Option<f64>,
    /// Grid node count (`grid.n`).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Interval family: dyadic, sliding or exhaustive.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Shortest family interval, in nodes.
    #[arg(long = "min-len", global = true)]
    min_len: Option<usize>,
    #[arg(long, global = true)]
    rtol: Option<f64>,
    #[arg(long, global = true)]
    atol: Option<f64>,
    /// Any config key, e.g. `--set ledger.C3=6`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, short = 'o', global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List registry ids, or describe one field on the configured grid.
    Fields { id: Option<String> },
    /// Flow map and log-derivative from the grid nodes (or --x).
    Flow(FlowArgs),
    /// Transport u(t, x) = u0(φ(t, x)) with a characteristic residual check.
    Transport(TransportArgs),
    /// BMO (and optionally A_p, A_inf, starred) estimates of one input.
    Bmo(BmoArgs),
    /// Run a verification suite: sharp-example, weights-lemmas, zygmund,
    /// flow, transport, partition or all.
    Verify { suite: String },
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long)]
    field: String,
    /// End time.
    #[arg(long)]
    t: f64,
    /// Start time.
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    /// Number of lattice steps between s and t.
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Integrate the backward flow from t down to s.
    #[arg(long)]
    backward: bool,
    /// Comma-separated initial points instead of the grid nodes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct TransportArgs {
    #[arg(long)]
    field: String,
    /// Initial datum expression, e.g. `logabs` or `sin:freq=2`.
    #[arg(long)]
    u0: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Seeds of the characteristic residual check.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-0.5,0.5,2")]
    seeds: Vec<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["csv", "expr", "field_dx"])))]
struct BmoArgs {
    /// `x,value` CSV on a staggered uniform grid (the grid is read from it).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Expression sampled on the configured grid.
    #[arg(long)]
    expr: Option<String>,
    /// Spatial derivative of a registry field, sampled on the configured grid.
    #[arg(long = "field-dx")]
    field_dx: Option<String>,
    /// Also estimate the A_inf constant (input must be positive).
    #[arg(long)]
    ainfty: bool,
    /// Also estimate the A_p constant for this p > 1.
    #[arg(long)]
    ap: Option<f64>,
    /// Also compute the starred norm (grid must cover [-1, 1]).
    #[arg(long)]
    star: bool,
}

/// Exit code for an error surfaced by a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::UnknownField(_)
        | Error::UnknownExpression(_)
        | Error::UnknownSuite(_)
        | Error::Parse(_)
        | Error::InvalidGrid(_)
        | Error::InvalidFamily(_) => EXIT_USAGE,
        Error::NonPositiveWeight { .. } => EXIT_DOMAIN,
        _ => EXIT_COMPUTE,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("ZYGFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::param("ZYGFLOW_THREADS", format!("not a thread count: `{raw}`")))?;
    // A pool may already exist when the CLI runs twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::param("--config", format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for pair in &c.set {
        cfg.apply_pair(pair)?;
    }
    if let Some(v) = c.half_width {
        cfg.grid.half_width = v;
    }
    if let Some(v) = c.n {
        cfg.grid.n = v;
    }
    if let Some(v) = &c.family {
        cfg.family.strategy = v.parse()?;
    }
    if let Some(v) = c.min_len {
        cfg.family.min_len = v;
    }
    if let Some(v) = c.rtol {
        cfg.solver.rtol = v;
    }
    if let Some(v) = c.atol {
        cfg.solver.atol = v;
    }
    cfg.finish()
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let command_line = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(&cli, command_line) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, command_line: Vec<String>) -> Result<i32> {
    configure_threads()?;
    let cfg = build_config(&cli.common)?;
    let started = Instant::now();
    let mut out = OutputDir::create(&cli.common.out)?;
    let code = match &cli.command {
        Command::Fields { id } => cmd_fields(id.as_deref(), &cfg, &mut out)?,
        Command::Flow(a) => cmd_flow(a, &cfg, &mut out)?,
        Command::Transport(a) => cmd_transport(a, &cfg, &mut out)?,
        Command::Bmo(a) => cmd_bmo(a, &cfg, &mut out)?,
        Command::Verify { suite } => cmd_verify(suite, &cfg, &mut out)?,
    };
    out.finish(command_line, cfg, started.elapsed().as_secs_f64())?;
    Ok(code)
}

fn cmd_fields(id: Option<&str>, cfg: &RunConfig, out: &mut OutputDir) -> Result<i32> {
    let Some(id) = id else {
        for (template, what) in CATALOG {
            println!("{template:<46} {what}");
        }
        let list: Vec<_> = CATALOG.iter().map(|(t, w)| json!({"id": t, "description": w})).collect();
        out.write("fields.json", &to_json_string(&list)?)?;
        return Ok(EXIT_PASS);
    };
    let b: FieldSpec = id.parse()?;
    let grid = cfg.grid()?;
    let norms = FieldNorms::compute(&b, &grid, &cfg.family(&grid)?)?;
    println!("{}: bmo(dx) = {:.6}, pins origin: {}", b.id(), norms.bmo, b.pins_origin());
    let doc = json!({
        "id": b.id(),
        "field": &b,
        "pins_origin": b.pins_origin(),
        "singular_points": b.spatial().singular_points(),
        "norms": &norms,
    });
    out.write("fields.json", &to_json_string(&doc)?)?;
    Ok(EXIT_PASS)
}

fn cmd_flow(a: &FlowArgs, cfg: &RunConfig, out: &mut OutputDir) -> Result<i32> {
    let b: FieldSpec = a.field.parse()?;
    let x = match &a.x {
        Some(x) => x.clone(),
        None => cfg.grid()?.nodes(),
    };
    let fr = if a.backward {
        backward_flow(&b, &lattice(a.t, a.s, a.steps), &x, &cfg.solver)?
    } else {
        forward_flow(&b, &lattice(a.s, a.t, a.steps), &x, &cfg.solver)?
    };
    out.write("flow.csv", &fr.to_csv())?;
    out.write("flow.json", &to_json_string(&fr.summary())?)?;
    println!(
        "flow of {} from {} to {}: {} trajectories, {} steps",
        fr.field,
        fr.start(),
        fr.end(),
        fr.x.len(),
        fr.stats.steps
    );
    Ok(EXIT_PASS)
}

fn cmd_transport(a: &TransportArgs, cfg: &RunConfig, out: &mut OutputDir) -> Result<i32> {
    let b: FieldSpec = a.field.parse()?;
    let u0 = InitialDatum::from(a.u0.parse::<Expr>()?);
    let grid = cfg.grid()?;
    let family = cfg.family(&grid)?;
    let tr = transport_solve(&b, &u0, &lattice(0.0, a.t, a.steps), &grid, &family, &cfg.solver)?;
    let residual = characteristic_residual(&tr, &b, &u0, &a.seeds, &cfg.solver)?;
    let norms = FieldNorms::compute(&b, &grid, &family)?;
    let growth = solution_bmo_growth(&tr, &norms, &cfg.ledger)?;
    println!("{}", residual.one_line());
    println!("{}", growth.one_line());
    out.write("transport.csv", &tr.to_csv())?;
    let doc = json!({ "summary": tr.summary(Some(growth)), "residual": residual });
    out.write("transport.json", &to_json_string(&doc)?)?;
    Ok(EXIT_PASS)
}

fn read_csv(path: &Path) -> Result<SampledFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::param("--csv", format!("{}: {e}", path.display())))?;
    SampledFunction::from_csv(&text).map_err(|e| match e {
        Error::NonFinite { index } => Error::Parse(format!("non-finite value in row {}", index + 2)),
        Error::InvalidGrid(m) => Error::Parse(m),
        other => other,
    })
}

fn cmd_bmo(a: &BmoArgs, cfg: &RunConfig, out: &mut OutputDir) -> Result<i32> {
    let (input, f) = if let Some(p) = &a.csv {
        (p.display().to_string(), read_csv(p)?)
    } else if let Some(e) = &a.expr {
        let e: Expr = e.parse()?;
        (e.to_string(), e.sample(&cfg.grid()?)?)
    } else {
        let id = a.field_dx.as_deref().expect("clap requires one input");
        let b: FieldSpec = id.parse()?;
        (format!("dx {}", b.id()), b.sample_dx(0.0, &cfg.grid()?)?)
    };
    let family = cfg.family(f.grid())?;
    let bmo = bmo_norm(&f, &family)?;
    println!("bmo = {:.9}", bmo.value);
    let mut doc = json!({ "input": input, "grid": f.grid().descriptor(), "family": family.descriptor(), "bmo": bmo });
    if a.star {
        let s = star_norm(&f, &family)?;
        println!("star = {s:.9}");
        doc["star"] = json!(s);
    }
    if let Some(p) = a.ap {
        let e = ap_constant(&f, p, &family)?;
        println!("A_{p} = {:.9}", e.value);
        doc["ap"] = json!({ "p": p, "estimate": e });
    }
    if a.ainfty {
        let e = ainfty_constant(&f, &family)?;
        println!("A_inf = {:.9}", e.value);
        doc["ainfty"] = json!(e);
    }
    out.write("bmo.json", &to_json_string(&doc)?)?;
    Ok(EXIT_PASS)
}

fn cmd_verify(suite: &str, cfg: &RunConfig, out: &mut OutputDir) -> Result<i32> {
    let suite: Suite = suite.parse()?;
    let reports = run_suite(suite, &cfg.ledger)?;
    for r in &reports {
        println!("{}", r.one_line());
    }
    out.write("reports.json", &to_json_string(&reports)?)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{suite}: {} reports, {failed} failed", reports.len());
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_FAIL })
}
