//! Command-line front end: `run`, `ensemble` and `sweep`.
//!
//! Every subcommand writes its tables into `--out` alongside a
//! `metadata.json` recording the parameters, seeds and tool version.
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use service_economy::config::{self, ParamValue};
use service_economy::harness::{self, ParamGrid};
use service_economy::{report, run_simulation, PriceMode, SimParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "service-econ",
    version,
    about = "Random-transaction service economy simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Market,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one seed and write weekly tables (and charts with --svg).
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
        /// Overrides `price_mode` from the config.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Run consecutive seeds starting at --base-seed and summarise.
    Ensemble {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        base_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an ensemble at each value of one parameter.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Parameter name or short alias, e.g. `loanlimit`.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. `-5,-15`.
        #[arg(
            long,
            allow_hyphen_values = true,
            value_delimiter = ',',
            required = true
        )]
        values: Vec<String>,
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        base_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure category, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

fn config_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn load_params(path: Option<&Path>) -> Result<SimParams, Failure> {
    let Some(path) = path else {
        return Ok(SimParams::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    config::load_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn metadata(command: &str, params: &SimParams, extra: serde_json::Value, files: &[&str]) -> String {
    let mut meta = json!({
        "tool": "service-econ",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": params,
        "files": files,
    });
    if let (Some(m), serde_json::Value::Object(extra)) = (meta.as_object_mut(), extra) {
        m.extend(extra);
    }
    let mut s = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    s.push('\n');
    s
}

fn run_cmd(
    config: Option<&Path>,
    seed: u64,
    out: &Path,
    svg: bool,
    mode: Option<Mode>,
) -> Result<(), Failure> {
    let mut params = load_params(config)?;
    if let Some(mode) = mode {
        params.price_mode = match mode {
            Mode::Fixed => PriceMode::Fixed,
            Mode::Market => PriceMode::Market,
        };
    }
    let result = run_simulation(&params, seed).map_err(config_failure)?;
    prepare_out(out)?;

    let mut files = vec!["weeks.csv", "accounts.csv"];
    write_file(out, "weeks.csv", &report::write_weeks_csv(&result))?;
    write_file(out, "accounts.csv", &report::write_accounts_csv(&result))?;
    if svg {
        let charts = report::run_charts(&result).map_err(|e| Failure::Runtime(e.to_string()))?;
        for (name, body) in &charts {
            write_file(out, name, body)?;
            files.push(name);
        }
    }
    files.push("metadata.json");
    let extra = json!({
        "seed": seed,
        "average_weekly_sales": result.average_weekly_sales,
        "average_bank_account": result.average_bank_account,
    });
    write_file(
        out,
        "metadata.json",
        &metadata("run", &params, extra, &files),
    )?;
    println!(
        "seed {seed}: average weekly sales {:.4}, average bank account {:.4}, defaults {}",
        result.average_weekly_sales,
        result.average_bank_account,
        result.defaults().count()
    );
    Ok(())
}

fn ensemble_cmd(
    config: Option<&Path>,
    seeds: usize,
    base_seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let params = load_params(config)?;
    let seed_list = harness::consecutive_seeds(base_seed, seeds);
    let summary = harness::run_ensemble(&params, &seed_list).map_err(config_failure)?;
    prepare_out(out)?;
    write_file(
        out,
        "ensemble_runs.csv",
        &report::write_ensemble_runs_csv(&summary),
    )?;
    write_file(
        out,
        "ensemble_summary.csv",
        &report::write_ensemble_summary_csv(&summary),
    )?;
    let extra =
        json!({ "base_seed": base_seed, "seed_count": seeds, "seed_rule": "base_seed + i" });
    write_file(
        out,
        "metadata.json",
        &metadata(
            "ensemble",
            &params,
            extra,
            &["ensemble_runs.csv", "ensemble_summary.csv", "metadata.json"],
        ),
    )?;
    println!(
        "{} seeds: mean weekly sales {:.4} (sd {:.4}, p01 {:.4}, p99 {:.4}), runs with a default {:.3}, ending insolvent {:.3}",
        summary.seed_count,
        summary.mean_sales,
        summary.std_sales,
        summary.p01_sales,
        summary.p99_sales,
        summary.frac_any_default,
        summary.frac_terminal_insolvent
    );
    Ok(())
}

fn sweep_cmd(
    config: Option<&Path>,
    param: &str,
    values: &[String],
    seeds: usize,
    base_seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let params = load_params(config)?;
    if config::canonical_key(param).is_none() {
        return Err(Failure::Config(format!(
            "--param `{param}`: unknown parameter"
        )));
    }
    let values: Vec<ParamValue> = values.iter().map(|v| ParamValue::parse(v)).collect();
    let grid = ParamGrid::new().axis(param, values.clone());
    let table = harness::sweep(&params, &grid, seeds, base_seed).map_err(config_failure)?;
    prepare_out(out)?;
    write_file(out, "sweep.csv", &report::write_sweep_csv(&table))?;
    let extra = json!({
        "param": param,
        "values": values,
        "seeds_per_point": seeds,
        "base_seed": base_seed,
        "seed_rule": "base_seed * 1000003 + point_index * 10007 + replicate",
    });
    write_file(
        out,
        "metadata.json",
        &metadata("sweep", &params, extra, &["sweep.csv", "metadata.json"]),
    )?;
    for row in &table.rows {
        println!(
            "{}: mean weekly sales {:.4}, runs with >=2 defaults {:.3}, ending insolvent {:.3}",
            row.label(),
            row.summary.mean_sales,
            row.summary.frac_two_plus_defaults,
            row.summary.frac_terminal_insolvent
        );
    }
    Ok(())
}

/// Parse arguments (program name first) and execute. Returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Run {
            config,
            seed,
            out,
            svg,
            mode,
        } => run_cmd(config.as_deref(), *seed, out, *svg, *mode),
        Command::Ensemble {
            config,
            seeds,
            base_seed,
            out,
        } => ensemble_cmd(config.as_deref(), *seeds, *base_seed, out),
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            base_seed,
            out,
        } => sweep_cmd(config.as_deref(), param, values, *seeds, *base_seed, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
