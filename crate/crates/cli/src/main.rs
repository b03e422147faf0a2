//! `deligne`: run, verify and list scenario files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use deligne::scenario::{emit_outputs, run_scenario, RunOptions, ScenarioConfig, ScenarioReport};
use deligne::Error;

const BUNDLED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");

#[derive(Parser)]
#[command(name = "deligne", version, about = "Discrete Deligne–Beilinson scenarios on meshes with good covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run(RunArgs),
    /// Run a scenario and fail on any failed check, numeric ones included.
    Verify(RunArgs),
    /// List bundled scenarios.
    ListScenarios {
        /// Directory to list instead of the bundled one.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: String,
    /// Comma separated refinement levels, replacing the configured series.
    #[arg(long, value_delimiter = ',')]
    refine: Option<Vec<usize>>,
    /// Numeric tolerance for residuals and equations of motion.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory for report.json, CSV series and timings.json.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Only exact invariants: skip charges and convergence series.
    #[arg(long)]
    exact_only: bool,
}

fn resolve(scenario: &str) -> PathBuf {
    let path = Path::new(scenario);
    if path.exists() {
        return path.to_path_buf();
    }
    let bundled = Path::new(BUNDLED).join(format!("{scenario}.json"));
    if bundled.exists() {
        bundled
    } else {
        path.to_path_buf()
    }
}

fn load(args: &RunArgs) -> deligne::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(&resolve(&args.scenario))?;
    if let Some(levels) = &args.refine {
        cfg.refinement = levels.clone();
    }
    if let Some(t) = args.tolerance {
        cfg.tolerances.numeric = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(report: &ScenarioReport) {
    println!("scenario {} : {:?}", report.scenario, report.status);
    if let Some(q) = &report.quantization {
        match q.winding {
            Some(w) => println!("  quantization k={} p={} n={} winding {w}", q.k, q.p, q.n),
            None => println!("  quantization k={} p={} n={} infeasible, required winding {}", q.k, q.p, q.n, q.required_winding),
        }
    }
    for s in &report.convergence {
        let last = s.rows.last().map(|r| r.value).unwrap_or(f64::NAN);
        match s.fitted_order {
            Some(o) => println!("  {:<22} {last:+.10e}  order {o:.3}", s.observable),
            None => println!("  {:<22} {last:+.10e}", s.observable),
        }
    }
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("  [{mark}] {:?} {}: {}", c.mode, c.name, c.detail);
    }
}

fn execute(args: &RunArgs, strict: bool) -> anyhow::Result<ExitCode> {
    let cfg = match load(args) {
        Ok(cfg) => cfg,
        Err(e @ (Error::Config { .. } | Error::Io(_) | Error::Json(_))) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    let (report, timings) = run_scenario(&cfg, RunOptions { exact_only: args.exact_only })
        .with_context(|| format!("running scenario {}", cfg.name))?;
    summarize(&report);
    let dir = args.emit.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        let files = emit_outputs(&report, &timings, &dir).with_context(|| format!("writing to {}", dir.display()))?;
        for f in files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(ExitCode::from(report.exit_code(strict) as u8))
}

fn list(dir: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let dir = dir.unwrap_or_else(|| PathBuf::from(BUNDLED));
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    for path in entries {
        match ScenarioConfig::load(&path) {
            Ok(cfg) => println!("{:<28} {}", cfg.name, cfg.description),
            Err(e) => println!("{:<28} invalid: {e}", path.display()),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => execute(&args, false),
        Command::Verify(args) => execute(&args, true),
        Command::ListScenarios { dir } => list(dir),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
