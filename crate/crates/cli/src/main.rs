use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use transmon_cli::config::{Experiment, OutputFormat, RunConfig, SweepAxis, SweepConfig};
use transmon_cli::error::{CliError, Result};
use transmon_cli::output::{default_path, write_result};
use transmon_cli::sweep::{sweep, write_manifest, write_sweep};

#[derive(Parser)]
#[command(name = "transmon", version, about = "Transmon chain couplings, transfer, OTOC and level statistics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set chain.cc=15`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output file. Defaults to `$TRANSMON_OUT_DIR/<experiment>.<ext>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Couplings from one reference qubit versus Manhattan distance.
    CouplingProfile,
    /// Charging-energy detuning along the chain for each ratio.
    FreqProfile,
    /// Population arriving on the last qubit after exciting the first.
    Transfer,
    /// Transfer maxima versus C_C/C_q, calibrated and bare.
    TransferSweep,
    /// Infinite-temperature OTOC between the first and last qubit.
    Otoc,
    /// Mean level-spacing ratio versus C_C/C_q.
    LevelStats,
    /// Run the experiment named in the configuration.
    Run,
    /// Repeat the configured experiment along one parameter axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<SweepAxis>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Option<Vec<f64>>,
        /// Experiment to repeat; defaults to the configured one.
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref(), &common.overrides)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(format) = common.format {
        cfg.output.format = format;
    }
    if let Some(out) = &common.out {
        cfg.output.path = Some(out.clone());
    }
    Ok(cfg)
}

fn output_path(cfg: &RunConfig, stem: &str) -> PathBuf {
    cfg.output
        .path
        .clone()
        .unwrap_or_else(|| default_path(stem, cfg.output.format))
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = load(&cli.common)?;
    let single = match cli.command {
        Command::CouplingProfile => Some(Experiment::CouplingProfile),
        Command::FreqProfile => Some(Experiment::FreqProfile),
        Command::Transfer => Some(Experiment::Transfer),
        Command::TransferSweep => Some(Experiment::TransferSweep),
        Command::Otoc => Some(Experiment::Otoc),
        Command::LevelStats => Some(Experiment::LevelStats),
        Command::Run => Some(cfg.experiment),
        Command::Sweep {
            axis,
            values,
            experiment,
        } => {
            if let Some(e) = experiment {
                cfg.experiment = e;
            }
            let mut spec = cfg.sweep.clone();
            if let Some(axis) = axis {
                let values = values.clone().unwrap_or_else(|| spec.as_ref().map(|s| s.values.clone()).unwrap_or_default());
                spec = Some(SweepConfig { axis, values });
            } else if let (Some(s), Some(v)) = (spec.as_mut(), values) {
                s.values = v;
            }
            let spec = spec.ok_or_else(|| CliError::config("sweep.axis", "no sweep axis given (use --axis or [sweep])"))?;
            cfg.sweep = Some(spec.clone());
            let path = output_path(&cfg, &format!("sweep-{}-{}", cfg.experiment.name(), spec.axis.name()));
            return match sweep(&cfg, spec.axis, &spec.values) {
                Ok(points) => {
                    for f in write_sweep(&cfg, spec.axis, &spec.values, &points, &path, cfg.output.format)? {
                        log::info!("wrote {}", f.display());
                    }
                    Ok(())
                }
                Err(failure) => {
                    if !failure.completed.is_empty() || failure.failed.0 > 0 {
                        let manifest = write_manifest(spec.axis, &spec.values, &failure, &path)?;
                        log::error!("partial results listed in {}", manifest.display());
                    }
                    Err(failure.error)
                }
            };
        }
    };
    if let Some(e) = single {
        cfg.experiment = e;
    }
    let result = transmon_cli::run(&cfg)?;
    let path = output_path(&cfg, cfg.experiment.name());
    for f in write_result(&result, &path, cfg.output.format)? {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.common.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(CliError::config("--workers", e.to_string())),
        },
        None => execute(cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
