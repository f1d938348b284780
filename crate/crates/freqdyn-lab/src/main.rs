use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use freqdyn_lab::config::{parse_count, parse_list, parse_window};
use freqdyn_lab::{run_scenario, ExperimentConfig, LabError, Overrides, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "freqdyn",
    version,
    about = "Run a frequent-hypercyclicity experiment and write CSV/SVG artifacts"
)]
struct Cli {
    /// Scenario to run; may instead come from the config file.
    #[arg(value_enum)]
    scenario: Option<Scenario>,
    /// Weight spec, e.g. `const:1`, `rational2`, `fourblock:1,2,3,4`.
    #[arg(long)]
    weight: Option<String>,
    /// Comma-separated multiples.
    #[arg(long)]
    lambdas: Option<String>,
    /// Treat the multiples as a sample of an unbounded set.
    #[arg(long)]
    unbounded: bool,
    /// Density spec, e.g. `logL:1`, `pow:2`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, value_parser = count)]
    horizon: Option<u64>,
    /// Window `n0,H`.
    #[arg(long, value_parser = window)]
    window: Option<(u64, u64)>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Exponent of the sequence space.
    #[arg(long)]
    p: Option<f64>,
    /// Operator norm used by the density-gap demo.
    #[arg(long)]
    norm_t: Option<f64>,
    /// `pow2` or `factorial`.
    #[arg(long)]
    pk: Option<String>,
    /// Levels of the reference C-type operator.
    #[arg(long)]
    levels: Option<u32>,
    /// C-type parameter file.
    #[arg(long)]
    ctype_params: Option<PathBuf>,
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn count(s: &str) -> Result<u64, String> {
    parse_count(s).ok_or_else(|| format!("expected a non-negative integer, got `{s}`"))
}

fn window(s: &str) -> Result<(u64, u64), String> {
    parse_window(s).ok_or_else(|| format!("expected `n0,H`, got `{s}`"))
}

fn overrides(cli: Cli) -> Result<Overrides, LabError> {
    let file = match &cli.config {
        Some(path) => Overrides::from_kv_str(&std::fs::read_to_string(path)?)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        scenario: cli.scenario,
        weight: cli.weight,
        lambda_set: cli
            .lambdas
            .map(|s| {
                parse_list(&s)
                    .ok_or_else(|| LabError::Config(format!("bad value `{s}` for `--lambdas`")))
            })
            .transpose()?,
        unbounded: cli.unbounded.then_some(true),
        alpha: cli.alpha,
        horizon: cli.horizon,
        window: cli.window,
        output_dir: cli.out,
        seed: cli.seed,
        p: cli.p,
        norm_t: cli.norm_t,
        pk: cli.pk.map(|s| s.parse()).transpose()?,
        levels: cli.levels,
        ctype_params: cli.ctype_params,
    };
    Ok(file.merged(flags))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let cfg = match overrides(cli).and_then(ExperimentConfig::resolve) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_scenario(&cfg) {
        Ok(outcome) => {
            for line in &outcome.log {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} assertion(s) failed:", outcome.failures.len());
                for f in &outcome.failures {
                    eprintln!("  {f}");
                }
                ExitCode::from(outcome.exit_code() as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
