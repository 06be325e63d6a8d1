use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use submig_cli::{load_config, pipeline, PipelineError, RunConfig, Setup};

#[derive(Parser)]
#[command(name = "submig", version, about = "Subspace-migration imaging of small cracks from far-field data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the multistatic response matrix for every frequency.
    Simulate(RunArgs),
    /// Build single- and multi-frequency maps, oracle maps and metrics.
    Image(RunArgs),
    /// Run the analytic checks and write a JSON report.
    Verify(RunArgs),
    /// Simulate, image and verify.
    All(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Use directions spread over the whole circle.
    #[arg(long)]
    full_view: bool,
    /// Override the signal-subspace threshold.
    #[arg(long)]
    tau: Option<f64>,
    /// Override the relative noise level.
    #[arg(long)]
    noise: Option<f64>,
    /// Override the noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap the Bessel power series at this many terms.
    #[arg(long, hide = true)]
    debug_truncate_bessel: Option<usize>,
}

impl RunArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(dir) = &self.output {
            config.output.directory = dir.clone();
        }
        if self.full_view {
            config.array.full_view = true;
        }
        if let Some(tau) = self.tau {
            config.tau = Some(tau);
        }
        if let Some(level) = self.noise {
            config.noise.level = level;
        }
        if let Some(seed) = self.seed {
            config.noise.seed = seed;
        }
    }
}

type Verb = fn(&Setup) -> Result<Vec<PathBuf>, PipelineError>;

fn run(command: &Command) -> Result<Vec<PathBuf>, PipelineError> {
    let (args, verb): (&RunArgs, Verb) = match command {
        Command::Simulate(a) => (a, pipeline::run_simulate),
        Command::Image(a) => (a, pipeline::run_image),
        Command::Verify(a) => (a, pipeline::run_verify),
        Command::All(a) => (a, pipeline::run_all),
    };
    if args.debug_truncate_bessel.is_some() {
        submig_core::bessel::set_series_term_limit(args.debug_truncate_bessel);
    }
    let mut config = load_config(&args.config)?;
    args.apply(&mut config);
    verb(&Setup::new(config)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
