use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vqc_core::ansatz::Architecture;
use vqc_core::optimize::CostKind;
use vqc_harness::config::{parse_enum, parse_f64_list, parse_usize_list, ConfigSource, EnsembleFamily, ExperimentKind, Measurement, Overrides};
use vqc_harness::run::{run, RunOptions};
use vqc_harness::{HarnessError, CONFIG_SCHEMA};

#[derive(Parser)]
#[command(name = "vqc", version, about = "Variational-circuit state discrimination experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and/or flags.
    Run(RunArgs),
    /// Statically check a config file; prints nothing when it is valid.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print the config file's JSON schema.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// discriminate, generate, gradvar, opsize, helstrom-stats, dc-scan, tfim or arch-bench.
    #[arg(value_parser = parse_enum::<ExperimentKind>)]
    experiment: Option<ExperimentKind>,
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
    /// Omit the leading timestamp line so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
    /// Suppress per-unit progress on stderr.
    #[arg(short, long)]
    quiet: bool,
}

/// Overrides for config-file fields.
// Aliases keep clap from treating a parsed list as a multi-value flag.
type UsizeList = Vec<usize>;
type F64List = Vec<f64>;
type ArchList = Vec<Architecture>;

#[derive(Args)]
struct Flags {
    #[arg(long, value_parser = parse_enum::<Architecture>)]
    arch: Option<Architecture>,
    /// Comma-separated architectures (arch-bench).
    #[arg(long, value_parser = parse_arch_list)]
    archs: Option<ArchList>,
    /// Qubit counts, e.g. `6` or `4,6,8`.
    #[arg(long, value_parser = parse_usize_list)]
    n: Option<UsizeList>,
    /// Circuit depths, e.g. `1..8` or `1,2,4`.
    #[arg(long, value_parser = parse_usize_list)]
    depths: Option<UsizeList>,
    /// haar, local-random, ti-local-random or tfim-pair.
    #[arg(long, value_parser = parse_enum::<EnsembleFamily>)]
    ensemble: Option<EnsembleFamily>,
    /// Preparation depths of the circuit ensembles.
    #[arg(long, value_parser = parse_usize_list)]
    d0: Option<UsizeList>,
    /// Transverse fields, e.g. `1,10`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_f64_list)]
    g: Option<F64List>,
    /// Input pairs (tasks or targets) per ensemble point.
    #[arg(long)]
    pairs: Option<usize>,
    /// Parameter points per task (gradvar) or circuits per depth (opsize).
    #[arg(long)]
    samples: Option<usize>,
    /// discrimination or generation (gradvar).
    #[arg(long, value_parser = parse_enum::<CostKind>)]
    cost: Option<CostKind>,
    /// full or single-qubit.
    #[arg(long, value_parser = parse_enum::<Measurement>)]
    measurement: Option<Measurement>,
    /// Critical-depth threshold as a multiple of the mean Helstrom limit.
    #[arg(long)]
    multiplier: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Directory for sampled-ensemble files shared between runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "VQC_WORKERS")]
    workers: Option<usize>,
}

fn parse_arch_list(s: &str) -> Result<Vec<Architecture>, String> {
    s.split(',').map(|a| parse_enum(a.trim())).collect()
}

impl Flags {
    fn overrides(self, experiment: Option<ExperimentKind>) -> Overrides {
        Overrides {
            experiment,
            arch: self.arch,
            archs: self.archs,
            n: self.n,
            depths: self.depths,
            ensemble: self.ensemble,
            d0: self.d0,
            g: self.g,
            pairs: self.pairs,
            samples: self.samples,
            cost: self.cost,
            measurement: self.measurement,
            multiplier: self.multiplier,
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            fd_step: self.fd_step,
            seed: self.seed,
            output: self.output,
            cache_dir: self.cache_dir,
            workers: self.workers,
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let mut source = match &args.config {
                Some(path) => ConfigSource::load(path)?,
                None => ConfigSource::default(),
            };
            source.apply(args.flags.overrides(args.experiment));
            let config = source.resolve()?;
            run(&config, &RunOptions { timestamp: !args.no_timestamp, progress: !args.quiet })?;
            Ok(())
        }
        Command::Validate { config, flags } => {
            let mut source = ConfigSource::load(&config)?;
            source.apply(flags.overrides(None));
            source.resolve()?;
            Ok(())
        }
        Command::Schema => {
            print!("{CONFIG_SCHEMA}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vqc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
