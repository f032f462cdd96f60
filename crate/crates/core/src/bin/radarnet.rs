//! `radarnet` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use radarnet::bandits::Policy;
use radarnet::sim::io::{
    read_records, write_ecdf, write_error_by_cpi, write_records, write_regret,
};
use radarnet::sim::metrics::{
    ecdf, error_by_cpi, errors, mean_cum_regret, median, policies_in, EcdfPoint,
};
use radarnet::sim::{load_config, run_monte_carlo, CpiRecord, Overrides, ScenarioConfig};
use radarnet::Error;

#[derive(Parser, Debug)]
#[command(
    name = "radarnet",
    version,
    about = "Cognitive radar network channel-selection simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct OverrideArgs {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo runs per policy.
    #[arg(long)]
    runs: Option<usize>,
    /// Comma-separated subset of oracle,etp,etc,random.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<Policy>>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            seed: self.seed,
            n_runs: self.runs,
            policies: self.policies,
            output_dir: self.out_dir,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every configured policy and write CSV logs to the output directory.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Load and check a config, then print it with defaults filled in.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Empirical CDF of localization error from a records log.
    Ecdf {
        records: PathBuf,
        /// Only the last K CPIs of each run.
        #[arg(long)]
        tail: Option<usize>,
        /// Defaults to ecdf.csv next to the records file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean cumulative regret per CPI from a records log.
    Regret {
        records: PathBuf,
        /// Defaults to regret.csv next to the records file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sibling(records: &Path, name: &str) -> PathBuf {
    records.with_file_name(name)
}

fn ecdf_curves(
    records: &[CpiRecord],
    tail: Option<usize>,
) -> radarnet::Result<Vec<(Policy, &'static str, Vec<EcdfPoint>)>> {
    let mut curves = Vec::new();
    for policy in policies_in(records) {
        curves.push((policy, "all", ecdf(&errors(records, policy, None))?));
        if let Some(k) = tail {
            curves.push((policy, "tail", ecdf(&errors(records, policy, Some(k)))?));
        }
    }
    Ok(curves)
}

fn regret_curves(records: &[CpiRecord]) -> Vec<(Policy, Vec<f64>)> {
    policies_in(records)
        .into_iter()
        .map(|p| (p, mean_cum_regret(records, p)))
        .collect()
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

/// Anything that goes wrong here, including a missing file, is a
/// configuration error.
fn load(config: &Path, overrides: OverrideArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = load_config(config).map_err(Failure::Config)?;
    cfg.apply(&overrides.into_overrides());
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn simulate(cfg: &ScenarioConfig) -> radarnet::Result<()> {
    let records = run_monte_carlo(cfg)?;
    let dir = &cfg.output_dir;
    write_records(dir.join("records.csv"), &records)?;
    write_ecdf(
        dir.join("ecdf.csv"),
        &ecdf_curves(&records, Some(cfg.tail_window))?,
    )?;
    let by_cpi = policies_in(&records)
        .into_iter()
        .map(|p| Ok((p, error_by_cpi(&records, p)?)))
        .collect::<radarnet::Result<Vec<_>>>()?;
    write_error_by_cpi(dir.join("error_by_cpi.csv"), &by_cpi)?;
    write_regret(dir.join("regret.csv"), &regret_curves(&records))?;

    println!("{} records -> {}", records.len(), dir.display());
    println!(
        "{:<8} {:>16} {:>16} {:>16}",
        "policy", "median_err_m", "tail_median_m", "mean_cum_regret"
    );
    for policy in policies_in(&records) {
        let all = median(&errors(&records, policy, None))?;
        let tail = median(&errors(&records, policy, Some(cfg.tail_window)))?;
        let regret = mean_cum_regret(&records, policy)
            .last()
            .copied()
            .unwrap_or(0.0);
        println!(
            "{:<8} {all:>16.6e} {tail:>16.6e} {regret:>16.4}",
            policy.name()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, overrides } => Ok(simulate(&load(&config, overrides)?)?),
        Command::Validate { config, overrides } => {
            print!("{}", load(&config, overrides)?.to_toml_string());
            Ok(())
        }
        Command::Ecdf { records, tail, out } => {
            if tail == Some(0) {
                return Err(Failure::Config(Error::InvalidConfig(
                    "--tail must be at least 1".into(),
                )));
            }
            let recs = read_records(&records)?;
            let out = out.unwrap_or_else(|| sibling(&records, "ecdf.csv"));
            write_ecdf(&out, &ecdf_curves(&recs, tail)?)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Regret { records, out } => {
            let recs = read_records(&records)?;
            let curves = regret_curves(&recs);
            let out = out.unwrap_or_else(|| sibling(&records, "regret.csv"));
            write_regret(&out, &curves)?;
            for (policy, c) in &curves {
                println!(
                    "{:<8} {:>16.4}",
                    policy.name(),
                    c.last().copied().unwrap_or(0.0)
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
