use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use signed_balance::metrics::{CorrelationMethod, MissingPolicy};
use signed_balance::nullmodel::DEFAULT_REPLICATES;
use signed_balance::report::{
    load_network, load_responses, manifest, render_reports, write_reports, RunConfig, Stage,
};
use signed_balance::responses::{ControlMode, PValueMethod, PartialOptions};
use signed_balance::triads::Averaging;
use signed_balance::{Error, ErrorKind};

/// Structural balance and dynamics of episode-indexed signed networks.
#[derive(Parser)]
#[command(name = "signed-balance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the inputs, print a summary; writes nothing.
    IngestCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        responses: Option<PathBuf>,
    },
    /// Degree, betweenness, presence, assortativity and metric correlations.
    Metrics(RunArgs),
    /// Triad census and balance per episode.
    Triads(RunArgs),
    /// Edge changes, triad transitions, imbalance attribution, unpredictability.
    Dynamics(RunArgs),
    /// Sign-shuffle null model for per-entity imbalance.
    Nullmodel(RunArgs),
    /// Partial rank correlation of network properties against responses.
    Correlate(RunArgs),
    /// Every stage; response-based reports only with --responses.
    All(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pearson,
    Spearman,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    #[value(name = "zero_fill", alias = "zero-fill")]
    ZeroFill,
    #[value(name = "mark_missing", alias = "mark-missing")]
    MarkMissing,
}

#[derive(Clone, Copy, ValueEnum)]
enum AveragingArg {
    Presence,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControlsArg {
    Simultaneous,
    Pairwise,
}

#[derive(Args)]
struct RunArgs {
    /// Edge list (`.csv` or `.json`).
    #[arg(long)]
    input: PathBuf,
    /// Per-episode responses CSV (`season,episode,votes,rating`).
    #[arg(long)]
    responses: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Null-model replicates.
    #[arg(long, default_value_t = DEFAULT_REPLICATES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,
    /// Correlation method for metric matrices.
    #[arg(long, value_enum, default_value = "pearson")]
    method: MethodArg,
    /// Value used for entities absent from an episode.
    #[arg(long, value_enum, default_value = "zero_fill")]
    missing: MissingArg,
    /// Denominator for per-entity imbalance averages.
    #[arg(long, value_enum, default_value = "presence")]
    averaging: AveragingArg,
    /// Control set for partial correlations.
    #[arg(long, value_enum, default_value = "simultaneous")]
    controls: ControlsArg,
    /// Use permutation p-values with this many permutations (seeded by --seed).
    #[arg(long)]
    permutations: Option<usize>,
    /// Replace existing report files.
    #[arg(long)]
    overwrite: bool,
    /// Keep files already written when a run fails.
    #[arg(long)]
    keep_partial: bool,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        RunConfig {
            input_network_path: self.input,
            input_response_path: self.responses,
            output_directory: self.out,
            seed: self.seed,
            replicates: self.replicates as usize,
            correlation_method: match self.method {
                MethodArg::Pearson => CorrelationMethod::Pearson,
                MethodArg::Spearman => CorrelationMethod::Spearman,
            },
            missing_policy: match self.missing {
                MissingArg::ZeroFill => MissingPolicy::ZeroFill,
                MissingArg::MarkMissing => MissingPolicy::MarkMissing,
            },
            averaging: match self.averaging {
                AveragingArg::Presence => Averaging::PresenceEpisodes,
                AveragingArg::All => Averaging::AllEpisodes,
            },
            partial: PartialOptions {
                controls: match self.controls {
                    ControlsArg::Simultaneous => ControlMode::Simultaneous,
                    ControlsArg::Pairwise => ControlMode::Pairwise,
                },
                p_value: match self.permutations {
                    Some(permutations) => PValueMethod::Permutation {
                        permutations,
                        seed: self.seed,
                    },
                    None => PValueMethod::TApproximation,
                },
            },
            overwrite: self.overwrite,
            keep_partial: self.keep_partial,
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.kind() {
        ErrorKind::Parse => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numerical => 4,
        ErrorKind::Io => 5,
    }
}

fn ingest_check(input: PathBuf, responses: Option<PathBuf>) -> signed_balance::Result<()> {
    let ingested = load_network(&input)?;
    for w in &ingested.warnings {
        eprintln!("warning: {}: {w}", input.display());
    }
    let series = &ingested.series;
    let edges: usize = series.snapshots().iter().map(|g| g.edge_count()).sum();
    println!(
        "{}: {} episodes, {} entities, {} edges",
        input.display(),
        series.len(),
        series.entity_universe().len(),
        edges
    );
    if let Some(path) = responses {
        let r = load_responses(&path)?;
        r.check_aligned(series)?;
        println!("{}: {} episodes aligned", path.display(), r.records().len());
    }
    Ok(())
}

fn run(args: RunArgs, stage: Stage) -> signed_balance::Result<()> {
    let config = args.config();
    let ingested = load_network(&config.input_network_path)?;
    for w in &ingested.warnings {
        eprintln!("warning: {}: {w}", config.input_network_path.display());
    }
    let responses = config
        .input_response_path
        .as_deref()
        .map(load_responses)
        .transpose()?;
    let files = render_reports(&ingested.series, responses.as_ref(), &config, stage)?;
    let manifest = manifest(&files, &config);
    write_reports(
        &config.output_directory,
        &files,
        &manifest,
        config.overwrite,
        config.keep_partial,
    )?;
    println!(
        "wrote {} report files to {}",
        manifest.files.len(),
        config.output_directory.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::IngestCheck { input, responses } => ingest_check(input, responses),
        Command::Metrics(a) => run(a, Stage::Metrics),
        Command::Triads(a) => run(a, Stage::Triads),
        Command::Dynamics(a) => run(a, Stage::Dynamics),
        Command::Nullmodel(a) => run(a, Stage::NullModel),
        Command::Correlate(a) => run(a, Stage::Correlate),
        Command::All(a) => run(a, Stage::All),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
