//! The `decarb` command line: generate sample data, run baselines and
//! scenarios, compare runs and sweep behavioral parameters.
//!
//! Exit codes: 0 success, 1 parse, config or I/O error, 2 stock-flow audit
//! failure, 3 infeasible input-output table, 4 horizon mismatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use decarb_core::calibration::{self, SweepError, SweepSpec};
use decarb_core::config::RunConfig;
use decarb_core::population::generate_sample;
use decarb_core::runner::{self, Fault, LoadedScenario, RunError};

#[derive(Parser)]
#[command(
    name = "decarb",
    version,
    about = "Agent-based macro simulator for decarbonisation scenarios"
)]
struct Cli {
    /// Worker threads for parallel agent evaluation and sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic micro-record CSV.
    GenSample {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        sectors: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run the baseline, or a scenario when --scenario is given.
    Run(RunArgs),
    /// Scenario run minus baseline run.
    Compare {
        baseline: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid sweep of behavioral parameters against target moments.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep spec JSON; defaults to the config's `sweep` block.
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Results and cache directory (default: the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory (default: the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Adds one unbooked cent in the given quarter.
    #[arg(long, hide = true)]
    inject_audit_fault: Option<u32>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let mut message = e.to_string();
        if let Some(a) = e.audit() {
            message = format!("stock-flow audit failed: {message}\n{a:#?}");
        }
        Failure {
            code: e.exit_code() as u8,
            message,
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        let code = match &e {
            SweepError::Audit { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(fail(e)),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenSample {
            out,
            rows,
            sectors,
            seed,
        } => {
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(fail)?;
            }
            generate_sample(&out, rows, sectors, seed).map_err(fail)?;
            println!("wrote {rows} records to {}", out.display());
            Ok(())
        }
        Command::Run(args) => cmd_run(args),
        Command::Compare {
            baseline,
            scenario,
            out,
        } => {
            let c = runner::compare_dirs(&baseline, &scenario, &out)?;
            for w in &c.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(w) = &c.report.window_average {
                println!(
                    "window average: green_investment_share {:+.4}pp, gdp {:+.2}, debt_ratio {:+.4}",
                    100.0 * w.green_investment_share,
                    w.gdp,
                    w.debt_ratio
                );
            }
            println!("wrote deltas to {}", out.display());
            Ok(())
        }
        Command::Sweep { config, sweep, out } => cmd_sweep(&config, sweep.as_deref(), out),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(&args.config).map_err(RunError::from)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    let scenario = args
        .scenario
        .as_deref()
        .map(LoadedScenario::load)
        .transpose()?;
    let fault = args
        .inject_audit_fault
        .map(|quarter| Fault { quarter, cents: 1 });
    let manifest = runner::execute(
        &cfg,
        Some(&args.config),
        scenario.as_ref(),
        &cfg.output_dir,
        fault,
    )?;
    println!(
        "{} quarters, seed {}, config {}: wrote {}",
        manifest.horizon_quarters,
        manifest.seed,
        &manifest.config_hash[..12],
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_sweep(config: &Path, sweep: Option<&Path>, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::load(config).map_err(RunError::from)?;
    let spec: SweepSpec = match sweep {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| fail(format!("{}: {e}", p.display())))?;
            calibration::parse_sweep_spec(&text)?
        }
        None => cfg
            .sweep
            .clone()
            .ok_or_else(|| fail("no --sweep file and no `sweep` block in the config"))?,
    };
    let out = out.unwrap_or_else(|| cfg.output_dir.clone());
    let results = calibration::sweep(&cfg, &spec, Some(&out))?;
    let path = out.join(calibration::RESULTS_FILE);
    calibration::write_results(&path, &results)?;
    let cached = results.iter().filter(|r| r.cached).count();
    if let Some(best) = results.first() {
        println!(
            "best grid point {} {:?}: loss {:.6e}",
            best.index, best.params, best.loss
        );
    }
    println!(
        "{} points ({cached} from cache): wrote {}",
        results.len(),
        path.display()
    );
    Ok(())
}
