use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod commands;
mod config;
mod presets;

use commands::Failure;
use config::Config;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Exact closed evolution of the partial Wigner field and its negativity.
    Closed,
    /// Exact open evolution with both dephasing channels.
    Master,
    /// Deterministic mean-field semi-classics.
    Meanfield,
    /// Monte Carlo ensemble of classical-quantum trajectories.
    Ensemble,
    /// Trade-off check and mean-field validity window.
    Validity,
    /// Mean-field, trajectories and exact dynamics side by side.
    Compare,
}

fn reference_page() -> String {
    format!(
        "Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 precondition or guard failure, \
         4 internal invariant breach.\n\nPresets: {}\n\nDefault configuration:\n\n{}",
        presets::NAMES.join(", "),
        Config::default().to_toml()
    )
}

#[derive(Parser, Debug)]
#[command(
    name = "cqsim",
    version,
    about = "Hybrid classical-quantum dynamics of a qubit coupled to a heavy particle"
)]
#[command(after_long_help = reference_page())]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration; overrides the preset key by key.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Embedded base configuration.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Overrides [sde] seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "cqsim-out")]
    out: PathBuf,
    /// Worker threads for the trajectory ensemble. Results do not depend on it.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = Config::load(cli.config.as_deref(), cli.preset.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.sde.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Failure::Config("--threads must be >= 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| Failure::Io(e.to_string()))?;
    let out = cli.out.as_path();
    pool.install(|| match cli.command {
        Command::Closed => commands::closed(&cfg, out),
        Command::Master => commands::master(&cfg, out),
        Command::Meanfield => commands::meanfield(&cfg, out),
        Command::Ensemble => commands::ensemble(&cfg, out),
        Command::Validity => commands::validity(&cfg, out),
        Command::Compare => commands::compare(&cfg, out),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cqsim: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
