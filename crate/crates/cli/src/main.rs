use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use tractlab_core::geometry::SurfaceSpec;
use tractlab_core::harness::{compare_reports, run_with_artifacts, GridSpec, Report, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "tractlab", version, about = "Numerical checks of tract and volume bounds on minimal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured suites and write report.json plus per-suite CSVs.
    Run(RunArgs),
    /// Print the numeric differences between two reports as JSON.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    surface: Option<SurfaceSpec>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Suites to run, repeatable or comma separated.
    #[arg(long = "suite", value_delimiter = ',')]
    suites: Vec<Suite>,
    /// Threshold grid, e.g. `2,4,8` or `log:1:16:5`.
    #[arg(long)]
    tau_grid: Option<GridSpec>,
    #[arg(long)]
    t_grid: Option<GridSpec>,
    /// Slab half-width for the hump count.
    #[arg(long)]
    slab: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the sampled chart as surface.obj.
    #[arg(long)]
    obj: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = self.surface {
            cfg.surface = s;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if !self.suites.is_empty() {
            cfg.suites = Some(self.suites);
        }
        if let Some(g) = self.tau_grid {
            cfg.tau_grid = g;
        }
        if let Some(g) = self.t_grid {
            cfg.t_grid = g;
        }
        if let Some(a) = self.slab {
            cfg.slab = a;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.output {
            cfg.output_dir = o;
        }
        cfg.export_obj |= self.obj;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("TRACTLAB_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().with_context(|| format!("TRACTLAB_THREADS={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    Ok(())
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let cfg = args.into_config()?;
    let out = run_with_artifacts(&cfg)?;
    out.write(&cfg.output_dir)?;
    let report = &out.report;
    for rec in &report.suites {
        let failed = rec.checks.iter().filter(|c| !c.satisfied).count();
        println!(
            "{:<18} checks {:>4}  failed {:>3}  errors {}",
            rec.suite.name(),
            rec.checks.len(),
            failed,
            rec.errors.len()
        );
        for e in &rec.errors {
            println!("    error: {e}");
        }
    }
    for (suite, c) in report.failed_checks() {
        println!("FAIL {suite} {}: lhs {} rhs {} ({:?})", c.name, c.lhs, c.rhs, c.relation);
    }
    info!("wrote {}", cfg.output_dir.display());
    Ok(if report.all_satisfied { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn compare(a: PathBuf, b: PathBuf) -> Result<ExitCode> {
    let load = |p: &PathBuf| -> Result<Report> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Ok(Report::from_json(&text)?)
    };
    let diff = compare_reports(&load(&a)?, &load(&b)?)?;
    println!("{}", serde_json::to_string_pretty(&diff)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = configure_threads().and_then(|()| match cli.command {
        Command::Run(args) => run(args),
        Command::Compare { a, b } => compare(a, b),
    });
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
