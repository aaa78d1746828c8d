use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twosrc::config::{Command, OutputFormat, RunConfig, Settings};
use twosrc::CliError;

#[derive(Parser)]
#[command(name = "twosrc", version, about = "One-versus-two point source discrimination exponents and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Chernoff exponents over a separation sweep.
    Exponents(Flags),
    /// Monte Carlo error rates of a receiver.
    Simulate(Flags),
    /// Helstrom minimum error probabilities.
    Helstrom(Flags),
    /// Closed-form overlap against quadrature.
    PsfCheck(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Flags {
    /// gaussian, rect or circ.
    #[arg(long)]
    psf: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Second rect width; defaults to --sigma.
    #[arg(long)]
    sigma_y: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Single separation.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    d_steps: Option<usize>,
    /// Prior probabilities p1,p2.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    priors: Option<Vec<f64>>,
    /// Sample counts M, comma separated.
    #[arg(long, value_delimiter = ',')]
    samples: Option<Vec<u64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// lrt or simplified.
    #[arg(long)]
    rule: Option<String>,
    /// bspade, sliver or di.
    #[arg(long)]
    measurement: Option<String>,
    /// Fock cutoff; enables thermal rows in `helstrom`.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Largest photon number for conditional Helstrom rows.
    #[arg(long = "L-max")]
    l_max: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with the same settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Append the exact direct-imaging exponent column.
    #[arg(long)]
    include_di_exact: bool,
}

fn settings(cli: Cli) -> Result<Settings, CliError> {
    let (command, f) = match cli.command {
        Sub::Exponents(f) => (Command::Exponents, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Helstrom(f) => (Command::Helstrom, f),
        Sub::PsfCheck(f) => (Command::PsfCheck, f),
    };
    let file = match &f.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let flags = Settings {
        command: Some(command),
        psf: f.psf,
        sigma: f.sigma,
        sigma_y: f.sigma_y,
        epsilon: f.epsilon,
        d: f.d,
        d_min: f.d_min,
        d_max: f.d_max,
        d_steps: f.d_steps,
        priors: f.priors.map(|p| [p[0], p[1]]),
        samples: f.samples,
        trials: f.trials,
        seed: f.seed,
        rule: f.rule,
        measurement: f.measurement,
        cutoff: f.cutoff,
        l_max: f.l_max,
        out: f.out,
        format: f.format.map(|x| match x {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
        include_di_exact: f.include_di_exact.then_some(true),
    };
    Ok(flags.over(file))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings(cli)
        .and_then(RunConfig::resolve)
        .and_then(|config| twosrc::execute(&config, &mut std::io::stdout().lock()));
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => {
            eprintln!("twosrc: one or more rows failed; see the error column");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("twosrc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
