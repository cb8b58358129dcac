use std::path::PathBuf;
use std::process::ExitCode;

use chanforecast::channel::Partition;
use chanforecast::predictors::{ModelKind, Precision};
use chanforecast_cli::commands::{self, AdfOptions, Common, EvaluateOptions, TrainOptions};
use chanforecast_cli::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chanforecast", version, about = "Channel prediction workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config; desk-scale NLOS defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the wall-clock time out of manifests so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sample type of the dataset file (default f64) or of training (default f32).
    #[arg(long, value_enum)]
    dtype: Option<Dtype>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dtype {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionArg {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write the dataset file.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// ADF p-values of sliding segments of antenna 0.
    Adf {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
        /// Lag order; Schwert's rule for the segment length when omitted.
        #[arg(long)]
        lags: Option<usize>,
        #[arg(long, default_value_t = 100)]
        segment_len: usize,
        #[arg(long, default_value_t = 50)]
        stride: usize,
    },
    /// Train a neural predictor.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
        /// LSTM, LPCNet or JLPCNet; the config's model when omitted.
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated: no-diff, no-adjuster, no-residual, diff, adjuster, residual.
        #[arg(long)]
        flags: Option<String>,
        /// Prediction horizon, e.g. 4ms.
        #[arg(long)]
        horizon: Option<String>,
        /// Output file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Score SH, AR and trained models; writes report.csv and report.json.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "model")]
        models: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "test")]
        partition: PartitionArg,
    },
    /// Parameter count of the configured model next to its closed form.
    Paramcount {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        flags: Option<String>,
    },
}

fn common(a: CommonArgs) -> Common {
    Common {
        config: a.config,
        seed: a.seed,
        deterministic: a.deterministic,
        out: a.out,
        dtype: a.dtype.map(|d| match d {
            Dtype::F32 => Precision::F32,
            Dtype::F64 => Precision::F64,
        }),
    }
}

fn kind(s: Option<String>) -> Result<Option<ModelKind>, CliError> {
    s.map(|s| ModelKind::parse(&s).ok_or_else(|| CliError::Config(format!("unknown model kind {s:?}")))).transpose()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { common: c } => {
            let s = commands::generate(&common(c))?;
            println!(
                "trajectories {} (train {}, test {}), regenerated scatterers {}",
                s.trajectories, s.train_trajectories, s.test_trajectories, s.regenerated
            );
            for (h, n) in s.windows {
                println!("horizon {h}: {n} windows");
            }
        }
        Command::Adf { common: c, data, lags, segment_len, stride } => {
            let opts = AdfOptions { data, lags, segment_len, stride };
            let (rows, medians) = commands::adf(&common(c), &opts)?;
            println!("{} segments", rows.len());
            for (speed, p) in medians {
                println!("speed {speed} km/h: median p {p:.4e}");
            }
        }
        Command::Train { common: c, data, kind: k, flags, horizon, name } => {
            let opts = TrainOptions { data, kind: kind(k)?, flags, horizon, name };
            let s = commands::train_model(&common(c), &opts)?;
            println!(
                "{}: {} parameters, {} windows, loss {:.6e} -> {:.6e}, wrote {}",
                s.method, s.parameters, s.train_windows, s.initial_loss, s.final_loss, s.model_file
            );
        }
        Command::Evaluate { common: c, data, models, partition } => {
            let partition = match partition {
                PartitionArg::Train => Partition::Train,
                PartitionArg::Test => Partition::Test,
            };
            let r = commands::evaluate(&common(c), &EvaluateOptions { data, models, partition })?;
            print!("{}", chanforecast_cli::report::to_csv(&r.rows));
        }
        Command::Paramcount { common: c, kind: k, flags } => {
            let (count, formula) = commands::paramcount(&common(c), kind(k)?, flags.as_deref())?;
            println!("{count} / {formula}");
            if count != formula {
                return Err(CliError::Numeric(format!("parameter count {count} differs from closed form {formula}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CHANFORECAST_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
