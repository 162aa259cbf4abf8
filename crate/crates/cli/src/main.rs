use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stlcbf_cli::{bench_command, check_command, run_command, sequences_command, CliError, Overrides, ScenarioFile};

/// Runs signal temporal logic missions on a bounded-input single integrator.
#[derive(Debug, Parser)]
#[command(name = "stlcbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario (a JSON file or a bundled scenario name).
    Run {
        scenario: String,
        /// Trajectory CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run report JSON output.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Score a trajectory CSV against a specification.
    Check { trajectory: PathBuf, spec: String },
    /// List the candidate subtask orders at the initial state.
    Sequences {
        scenario: String,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Run the bundled scenarios and print a summary table.
    Bench {
        #[command(flatten)]
        tuning: Tuning,
        /// Extra case-study runs from jittered initial states.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        /// Largest per-axis jitter of those starts.
        #[arg(long, default_value_t = 0.25)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct Tuning {
    #[arg(long)]
    dt: Option<f64>,
    /// Sharpness of the smooth min/max.
    #[arg(long)]
    beta: Option<f64>,
    /// Gain of the linear class-K function.
    #[arg(long)]
    alpha_gain: Option<f64>,
    /// Facets of the polygon inscribed in the input disc.
    #[arg(long)]
    facets: Option<usize>,
    /// Relax the secondary constraint with a penalized slack.
    #[arg(long)]
    relax: bool,
}

impl From<Tuning> for Overrides {
    fn from(t: Tuning) -> Self {
        Overrides { dt: t.dt, beta: t.beta, alpha_gain: t.alpha_gain, facets: t.facets, relax: t.relax }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Run { scenario, out, report, tuning } => {
            let s = ScenarioFile::load(&scenario)?;
            run_command(&s, &tuning.into(), out.as_deref(), report.as_deref(), &mut stdout)
        }
        Command::Check { trajectory, spec } => {
            let text = std::fs::read_to_string(&trajectory).map_err(|source| CliError::Read { path: trajectory, source })?;
            check_command(&text, &spec, &mut stdout)
        }
        Command::Sequences { scenario, tuning } => sequences_command(&ScenarioFile::load(&scenario)?, &tuning.into(), &mut stdout),
        Command::Bench { tuning, trials, jitter, seed } => bench_command(&tuning.into(), trials, jitter, seed, &mut stdout),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
