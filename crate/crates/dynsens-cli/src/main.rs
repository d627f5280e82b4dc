//! Command-line front end: loads model and evidence files, dispatches the
//! analyses, and writes reports and plot-ready data.
//!
//! Exit codes: 0 success, 1 validation or parse error, 2 computation error,
//! 3 I/O error.

mod commands;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "dynsens",
    version,
    about = "Sensitivity and decision-robustness analysis for dynamic network models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file against the stochasticity invariants.
    Validate(ValidateArgs),
    /// Filter the model through the evidence and print the posterior
    /// trajectory and log-likelihood.
    Filter(FilterArgs),
    /// Fit the sensitivity function of a filtered probability in one
    /// parameter.
    Sens(SensArgs),
    /// Derive the parameter intervals on which the threshold decision is
    /// unchanged.
    Regions(RegionsArgs),
    /// Trace threshold boundary curves over a two-parameter CPT variation
    /// and classify a grid of the unit square.
    Cpt2d(Cpt2dArgs),
    /// Compute the backward acceptable window certificate.
    Window(WindowArgs),
    /// Run filter, sens, regions, and window, bundled into one document.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Evidence file (JSON); an unobserved horizon when omitted.
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    /// Time step of interest (1-based).
    #[arg(long)]
    pub time: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct SensArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub time: usize,
    /// Target hidden state (label or index).
    #[arg(long)]
    pub state: String,
    /// Parameter: initial:<state>, transition:<from>:<to>, or
    /// observation:<state>:<value>:<stream>.
    #[arg(long)]
    pub param: String,
    /// Accuracy for a windowed analysis; exact full-history analysis when
    /// omitted.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct RegionsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub time: usize,
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub param: String,
    /// Threshold probabilities: p_minus,p_star,p_plus.
    #[arg(long)]
    pub thresholds: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct Cpt2dArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub time: usize,
    #[arg(long)]
    pub state: String,
    /// First varied parameter (sensitivity rate), observation kind.
    #[arg(long)]
    pub param: String,
    /// Second varied parameter (specificity rate), observation kind.
    #[arg(long)]
    pub param2: String,
    #[arg(long)]
    pub thresholds: String,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct WindowArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub time: usize,
    /// Requested accuracy of the windowed posterior.
    #[arg(long)]
    pub epsilon: f64,
    /// Sweep resolution for the CSV output format.
    #[arg(long, default_value_t = 99)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub time: usize,
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub thresholds: String,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate(args) => commands::validate(args),
        Command::Filter(args) => commands::filter(args),
        Command::Sens(args) => commands::sens(args),
        Command::Regions(args) => commands::regions(args),
        Command::Cpt2d(args) => commands::cpt2d(args),
        Command::Window(args) => commands::window(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
