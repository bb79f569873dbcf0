mod config;
mod counts;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use swapchain::analysis::{witness_from_counts, MleOptions, SettingOutcome};
use swapchain::experiment::{
    parse_grid, run, sweep, tomography_from_counts, Events, ExperimentPreset, Measurement, SweepParameter,
};
use swapchain::rng::GENERATOR;

use config::RunConfig;
use error::CliError;
use output::{Format, SweepReport, TomoReport};

/// Simulate multistage entanglement swapping and certify the result.
#[derive(Parser)]
#[command(name = "swapchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset end to end and write its report.
    Run {
        #[command(flatten)]
        source: Source,
        /// Also write the sampled counts as CSV.
        #[arg(long, value_name = "PATH")]
        counts_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Vary one parameter over a grid.
    Sweep {
        /// visibility, source-whiteness, background-fraction or n-pairs.
        parameter: String,
        /// start:stop:step (inclusive), start:stop, or a comma list.
        #[arg(allow_hyphen_values = true)]
        grid: String,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reconstruct the end-photon state from nine-setting counts.
    Tomo {
        #[command(flatten)]
        source: Source,
        /// Counts file (setting,outcome,count) instead of a preset.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["preset", "config"])]
        counts: Option<PathBuf>,
        /// Bootstrap resamples for the correlation error bars.
        #[arg(long, value_name = "N")]
        bootstrap: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct Source {
    /// Built-in preset: ideal, paper or pre-swap.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML or JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    events_per_setting: Option<u64>,
    /// Exact probabilities instead of sampled counts.
    #[arg(long)]
    analytic: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format [default: json].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; defaults to $SWAPCHAIN_OUT_DIR/<name>, else stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Timing and notes on stderr.
    #[arg(short, long)]
    verbose: bool,
}

/// Output choices after merging flags over the config file.
struct Sink {
    format: Format,
    out: Option<PathBuf>,
    verbose: bool,
}

impl Sink {
    fn write(&self, stem: &str, json: impl FnOnce() -> Result<String, CliError>, csv: impl FnOnce() -> Result<String, CliError>) -> Result<(), CliError> {
        let text = match self.format {
            Format::Json => json()?,
            Format::Csv => csv()?,
        };
        let dest = output::destination(self.out.as_deref(), stem, self.format);
        output::emit(&text, dest.as_deref())
    }
}

fn resolve(source: &Source, output: &OutputArgs, fallback: &str) -> Result<(ExperimentPreset, Sink), CliError> {
    let config = match &source.config {
        Some(path) => config::load(path)?,
        None => RunConfig {
            base: source.preset.clone(),
            ..RunConfig::default()
        },
    };
    let mut preset = config.resolve(fallback)?;
    if let Some(seed) = source.seed {
        preset.seed = seed;
    }
    if let Some(n) = source.events_per_setting {
        preset.events = Events::PerSetting(n);
    }
    if source.analytic {
        preset.analytic = true;
    }
    preset.validate()?;
    let sink = Sink {
        format: output.format.or(config.format).unwrap_or(Format::Json),
        out: output.out.clone().or(config.out.map(PathBuf::from)),
        verbose: output.verbose || config.verbose,
    };
    Ok((preset, sink))
}

fn cmd_run(source: &Source, counts_out: Option<&Path>, output: &OutputArgs) -> Result<(), CliError> {
    let (preset, sink) = resolve(source, output, "ideal")?;
    let start = Instant::now();
    let report = run(&preset)?;
    if sink.verbose {
        eprintln!("run '{}' seed {} in {:.1?}", preset.name, preset.seed, start.elapsed());
        for note in &report.notes {
            eprintln!("note: {note}");
        }
    }
    if let Some(path) = counts_out {
        let outcomes: Vec<SettingOutcome> = report
            .settings
            .iter()
            .map(|s| {
                s.counts.map(|counts| SettingOutcome {
                    setting: s.setting,
                    counts,
                })
            })
            .collect::<Option<_>>()
            .ok_or_else(|| CliError::Usage("--counts-out needs sampled counts; analytic runs have none".into()))?;
        let file = std::fs::File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        counts::write(file, &outcomes)?;
    }
    let stem = format!("run-{}-seed{}", preset.name, preset.seed);
    sink.write(&stem, || output::json(&report), || output::run_csv(&report))
}

fn cmd_sweep(parameter: &str, grid: &str, source: &Source, output: &OutputArgs) -> Result<(), CliError> {
    let parameter: SweepParameter = parameter.parse()?;
    let grid = parse_grid(grid)?;
    let (base, sink) = resolve(source, output, "ideal")?;
    let start = Instant::now();
    let rows = sweep(parameter, &grid, &base)?;
    if sink.verbose {
        eprintln!("{} points in {:.1?}", rows.len(), start.elapsed());
    }
    let stem = format!("sweep-{parameter}-{}", base.name);
    let report = SweepReport {
        parameter,
        grid,
        base,
        rows,
    };
    sink.write(&stem, || output::json(&report), || output::sweep_csv(&report))
}

fn cmd_tomo(source: &Source, counts_path: Option<&Path>, bootstrap: Option<usize>, output: &OutputArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (report, sink, stem) = match counts_path {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            let outcomes = counts::read(file)?;
            let seed = source.seed.unwrap_or(0);
            let options = MleOptions {
                bootstrap_resamples: bootstrap.unwrap_or(200),
                seed,
                ..MleOptions::default()
            };
            let tomography = tomography_from_counts(&outcomes, &options)?;
            let sink = Sink {
                format: output.format.unwrap_or(Format::Json),
                out: output.out.clone(),
                verbose: output.verbose,
            };
            let report = TomoReport {
                source: format!("counts:{}", path.display()),
                generator: GENERATOR.to_string(),
                seed,
                preset: None,
                witness: Some(witness_from_counts(&outcomes)?),
                tomography,
            };
            let stem = format!(
                "tomo-{}",
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            );
            (report, sink, stem)
        }
        None => {
            if source.preset.is_none() && source.config.is_none() {
                return Err(CliError::Usage("tomo needs --preset, --config or --counts".into()));
            }
            let (mut preset, sink) = resolve(source, output, "pre-swap")?;
            preset.measurement = Measurement::Tomography;
            if let Some(n) = bootstrap {
                preset.bootstrap_resamples = n;
            }
            let run_report = run(&preset)?;
            let tomography = run_report.tomography.clone().expect("tomography measurement yields a summary");
            let stem = format!("tomo-{}-seed{}", preset.name, preset.seed);
            let report = TomoReport {
                source: format!("preset:{}", preset.name),
                generator: GENERATOR.to_string(),
                seed: preset.seed,
                witness: Some(run_report.witness),
                preset: Some(preset),
                tomography,
            };
            (report, sink, stem)
        }
    };
    if sink.verbose {
        eprintln!(
            "tomography in {:.1?}: concurrence {} (argument {:.4})",
            start.elapsed(),
            report.tomography.concurrence,
            report.tomography.concurrence_argument
        );
    }
    sink.write(&stem, || output::json(&report), || output::tomo_csv(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            source,
            counts_out,
            output,
        } => cmd_run(source, counts_out.as_deref(), output),
        Command::Sweep {
            parameter,
            grid,
            source,
            output,
        } => cmd_sweep(parameter, grid, source, output),
        Command::Tomo {
            source,
            counts,
            bootstrap,
            output,
        } => cmd_tomo(source, counts.as_deref(), *bootstrap, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
