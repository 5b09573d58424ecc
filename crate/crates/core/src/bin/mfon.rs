use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfon::runner::{self, parse_usize_list, Command, ExperimentConfig, OutputFormat};
use mfon::{Error, InitialState};

#[derive(Parser)]
#[command(name = "mfon", version, about = "Mean-field O(N) spin model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run heat-bath chains and write per-record CSV plus a summary.
    Simulate(Common),
    /// Distances and bound terms across system sizes, with a log-log fit.
    Rate(Common),
    /// Stein bound terms per system size.
    SteinTerms(Common),
    /// Exact radial law and Kolmogorov distance per system size.
    Oracle(Common),
    /// Check the Bessel-ratio inequalities on a log grid.
    VerifyLemmas(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spin dimension, a list "2,3" or a range "2..10".
    #[arg(long = "N")]
    dims: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// System sizes, comma separated.
    #[arg(long = "n")]
    n_values: Option<String>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    init: Option<InitialState>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    cells_per_unit: Option<usize>,
    /// rate: include exact oracle distances.
    #[arg(long)]
    oracle: bool,
    /// rate: also run chains when --oracle is given.
    #[arg(long)]
    simulate: bool,
}

fn build(command: Command, c: Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::for_command(command),
    };
    cfg.command = command;
    if let Some(d) = c.dims {
        cfg.dims = parse_usize_list(&d)?;
    }
    if let Some(n) = c.n_values {
        cfg.n_values = parse_usize_list(&n)?;
    }
    macro_rules! set {
        ($($field:ident <- $flag:expr),*) => { $(if let Some(v) = $flag { cfg.$field = v; })* };
    }
    set!(beta <- c.beta, sweeps <- c.sweeps, burn_in <- c.burn_in, thin <- c.thin,
         chains <- c.chains, master_seed <- c.seed, init <- c.init, format <- c.format,
         grid_points <- c.grid_points, cells_per_unit <- c.cells_per_unit);
    if c.output_dir.is_some() {
        cfg.output_dir = c.output_dir;
    }
    cfg.oracle |= c.oracle;
    cfg.simulate |= c.simulate;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Rate(c) => (Command::Rate, c),
        Cmd::SteinTerms(c) => (Command::SteinTerms, c),
        Cmd::Oracle(c) => (Command::Oracle, c),
        Cmd::VerifyLemmas(c) => (Command::VerifyLemmas, c),
    };
    match build(command, common).and_then(|cfg| runner::run(&cfg)) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            println!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mfon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
