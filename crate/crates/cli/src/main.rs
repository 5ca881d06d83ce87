use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use risctl_cli::commands;
use risctl_cli::grid::parse_range;
use risctl_cli::{defaults_text, load_config, parse_config, CliError, CliResult, Settings};
use risctl_core::{CcKind, Paradigm};

/// Simulator for RIS-aided uplink: paradigm overhead, algorithmic errors and control reliability.
#[derive(Debug, Parser)]
#[command(name = "risctl", version)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point (overrides `n_trials`).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output CSV path (overrides `output_path`); stdout when unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print every configuration key with its default and exit.
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sorted actual and estimated SNR samples of the configured paradigm.
    SnrCdf,
    /// Mean goodput against frame length.
    GoodputSweep {
        /// Frame lengths in ms, `start:stop:step`.
        #[arg(long, default_value = "10:200:10", allow_hyphen_values = true)]
        tau_ms: String,
        /// Paradigms to compare; all when omitted.
        #[arg(long, value_delimiter = ',')]
        paradigm: Vec<Paradigm>,
        /// Control architectures; the configured one when omitted.
        #[arg(long, value_delimiter = ',')]
        cc_kind: Vec<CcKind>,
    },
    /// Mean goodput against the sweep target SNR.
    Calibrate {
        /// Target SNRs in dB, `start:stop:step`.
        #[arg(long, default_value = "-13:30:0.5", allow_hyphen_values = true)]
        gamma0_db: String,
    },
    /// Utility against the erroneous-control probability.
    Utility {
        /// Values of 1 - p_cc, `start:stop:step`.
        #[arg(long, default_value = "0:0.5:0.01", allow_hyphen_values = true)]
        one_minus_pcc: String,
    },
    /// Control-channel SNRs needed for the target correct-control probability.
    Reliability {
        /// UE control SNR grid in dB (in-band control only), `start:stop:step`.
        #[arg(long, default_value = "10:40:0.5", allow_hyphen_values = true)]
        lambda_u_db: String,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("RISCTL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "RISCTL_THREADS must be a positive integer, got '{value}'"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.into()))
}

fn settings(cli: &Cli) -> CliResult<Settings> {
    let mut s = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(seed) = cli.seed {
        s.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            return Err(CliError::Config("--trials must be >= 1".into()));
        }
        s.n_trials = trials;
    }
    if let Some(out) = &cli.out {
        s.output_path = Some(out.clone());
    }
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    Ok(s)
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.print_defaults {
        print!("{}", defaults_text());
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Config("no command given (see --help)".into()));
    };
    configure_threads()?;
    let s = settings(&cli)?;
    let table = match command {
        Command::SnrCdf => commands::snr_cdf(&s)?,
        Command::GoodputSweep {
            tau_ms,
            paradigm,
            cc_kind,
        } => {
            let grid = parse_range("--tau-ms", tau_ms)?;
            let paradigms = if paradigm.is_empty() {
                Paradigm::ALL.to_vec()
            } else {
                paradigm.clone()
            };
            let ccs = if cc_kind.is_empty() {
                vec![s.cc_kind]
            } else {
                cc_kind.clone()
            };
            commands::goodput_sweep(&s, &grid, &paradigms, &ccs)?
        }
        Command::Calibrate { gamma0_db } => {
            let grid = parse_range("--gamma0-db", gamma0_db)?;
            let (table, best) = commands::calibrate(&s, &grid)?;
            eprintln!("best gamma0: {best} dB");
            table
        }
        Command::Utility { one_minus_pcc } => {
            commands::utility(&s, &parse_range("--one-minus-pcc", one_minus_pcc)?)?
        }
        Command::Reliability { lambda_u_db } => {
            let grid = match s.cc_kind {
                CcKind::Obcc => Vec::new(),
                CcKind::Ibcc => parse_range("--lambda-u-db", lambda_u_db)?,
            };
            commands::reliability(&s, &grid)?
        }
    };
    commands::emit(&table, s.output_path.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("risctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
