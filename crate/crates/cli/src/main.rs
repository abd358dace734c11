//! `cst`: acquire measurement records, estimate observables, verify the
//! statistical machinery, benchmark the two pipelines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shadow_core::{RecordFile, Scheme};

use shadow_cli::config::{ExperimentConfig, Mode};
use shadow_cli::{bench, runner, verify, CliError};

/// Fixed fallback so verify and bench runs replay without flags.
const DEFAULT_TOOL_SEED: u64 = 0xC57_5EED;

#[derive(Parser)]
#[command(
    name = "cst",
    version,
    about = "classical-shadow acquisition and estimation toolkit",
    after_help = "exit codes: 0 pass, 1 runtime error, 2 verification failure, 3 config error"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment config (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Root seed; mandatory for run/acquire (no wall-clock seeding)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config's mode (baseline|qcqc)
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Override the config's scheme (pauli|clifford)
    #[arg(long, global = true)]
    scheme: Option<Scheme>,
    /// Output path (report JSON, record archive, or bench CSV)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for the phase-2 stage
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Largest register the dense baseline path may materialize
    #[arg(long, global = true, value_name = "N")]
    dense_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Phase 1 only: sample unitaries, measure, write the record archive
    Acquire,
    /// Phase 2 over an existing record archive, then aggregate
    Estimate {
        /// Record archive produced by `acquire`
        records: PathBuf,
    },
    /// Full pipeline: acquire, estimate, report
    Run,
    /// Run a verification suite (channel|unbiased|variance|mom|records|all)
    Verify { suite: String },
    /// Baseline-vs-replay cost grid with fitted log-log slopes
    Bench {
        /// Register sizes, either a..b (inclusive) or comma-separated
        #[arg(long, default_value = "4..10")]
        grid: String,
        /// Records acquired and timed per grid point
        #[arg(long, default_value_t = 6)]
        records: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not errors; everything else is a
            // config-class failure
            let code = if e.exit_code() == 0 { 0u8 } else { 3u8 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Acquire => cmd_acquire(cli),
        Cmd::Estimate { records } => cmd_estimate(cli, records),
        Cmd::Run => cmd_run(cli),
        Cmd::Verify { suite } => cmd_verify(cli, suite),
        Cmd::Bench { grid, records } => cmd_bench(cli, grid, *records),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config <PATH> is required for this command"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(s) = cli.scheme {
        cfg.scheme = s;
    }
    if let Some(c) = cli.dense_cap {
        cfg.dense_cap = c;
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

fn require_seed(cfg: &ExperimentConfig) -> Result<u64, CliError> {
    cfg.seed.ok_or_else(|| {
        CliError::config("an explicit seed is required: pass --seed or set \"seed\" in the config")
    })
}

fn out_path(cli: &Cli, cfg: &ExperimentConfig, fallback: &str) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn cmd_acquire(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let seed = require_seed(&cfg)?;
    let (state, observables) = cfg.materialize()?;
    let plan = runner::plan_for(&cfg, &observables)?;
    let file = runner::acquire_records(&state, cfg.scheme, plan.records, seed)?;
    let path = out_path(cli, &cfg, "records.json");
    std::fs::write(&path, file.to_json()?)?;
    println!(
        "wrote {} {} records (n = {}) to {}; copies consumed {}",
        file.records.len(),
        cfg.scheme,
        cfg.n,
        path.display(),
        file.copies_consumed
    );
    Ok(())
}

fn cmd_estimate(cli: &Cli, records: &PathBuf) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let text = std::fs::read_to_string(records)
        .map_err(|e| CliError::config(format!("{}: {e}", records.display())))?;
    let file = RecordFile::from_json(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", records.display())))?;
    // phase 2 reuses the archive's seed unless one is given explicitly
    let seed = cfg.seed.unwrap_or(file.seed);
    let report = runner::estimate_experiment(&cfg, &file, seed, cli.threads)?;
    print!("{}", report.render_text());
    if let Some(path) = cli.out.clone().or_else(|| cfg.output.clone()) {
        std::fs::write(&path, report.to_json())?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let seed = require_seed(&cfg)?;
    let out = runner::run_experiment(&cfg, seed, cli.threads)?;
    print!("{}", out.report.render_text());
    if let Some(path) = cli.out.clone().or_else(|| cfg.output.clone()) {
        std::fs::write(&path, out.report.to_json())?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, suite: &str) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_TOOL_SEED);
    let names: Vec<&str> = if suite == "all" {
        verify::SUITES.to_vec()
    } else {
        vec![suite]
    };
    let mut failed = Vec::new();
    for name in names {
        let outcome = verify::run_suite(name, seed)?;
        print!("{}", outcome.render());
        if !outcome.passed() {
            failed.push(name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "suite(s) with failing checks: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_bench(cli: &Cli, grid: &str, records: usize) -> Result<(), CliError> {
    let grid = parse_grid(grid)?;
    let scheme = cli.scheme.unwrap_or(Scheme::Clifford);
    let seed = cli.seed.unwrap_or(DEFAULT_TOOL_SEED);
    let dense_cap = cli.dense_cap.unwrap_or(10);
    let table = bench::bench_compare(&grid, records, scheme, seed, dense_cap)?;
    print!("{}", table.render());
    if let Some(path) = &cli.out {
        std::fs::write(path, table.to_csv())?;
        println!("csv written to {}", path.display());
    }
    Ok(())
}

/// Accepts "4..10" (inclusive) or "2,4,6".
fn parse_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |t: &str| CliError::config(format!("cannot parse grid '{t}' (use a..b or a,b,c)"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad(text))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad(text))?;
        if lo > hi {
            return Err(bad(text));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|part| part.trim().parse().map_err(|_| bad(text)))
        .collect()
}
