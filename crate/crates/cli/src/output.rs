use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swapchain::experiment::{ExperimentPreset, RunReport, SweepParameter, SweepRow, TomographySummary};
use swapchain::analysis::WitnessEstimate;

use crate::error::CliError;

/// Environment variable naming the directory for reports when `--out` is
/// not given. Without either, reports go to stdout.
pub const OUT_DIR_ENV: &str = "SWAPCHAIN_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

pub const RUN_COLUMNS: [&str; 11] = [
    "preset",
    "seed",
    "n_pairs",
    "events_per_setting",
    "analytic",
    "witness",
    "witness_stderr",
    "witness_model",
    "success_probability",
    "success_probability_sampled",
    "concurrence_model",
];

pub const SWEEP_COLUMNS: [&str; 6] = ["parameter", "value", "witness", "stderr", "success_probability", "concurrence"];

pub const TOMO_COLUMNS: [&str; 3] = ["correlation", "value", "stderr"];

/// Sweep output document.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub base: ExperimentPreset,
    pub rows: Vec<SweepRow>,
}

/// Tomography output document.
#[derive(Debug, Serialize, Deserialize)]
pub struct TomoReport {
    /// `preset:<name>` or `counts:<path>`.
    pub source: String,
    pub generator: String,
    pub seed: u64,
    /// Preset that produced the counts; absent for counts files.
    pub preset: Option<ExperimentPreset>,
    /// Witness from the `ZZ`, `XX`, `YY` counts.
    pub witness: Option<WitnessEstimate>,
    pub tomography: TomographySummary,
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Usage(format!("writing CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("writing CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(format!("writing JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn run_csv(r: &RunReport) -> Result<String, CliError> {
    let row = vec![
        r.preset.name.clone(),
        r.seed.to_string(),
        r.preset.n_pairs.to_string(),
        r.events_per_setting.to_string(),
        r.preset.analytic.to_string(),
        r.witness.value.to_string(),
        r.witness.stderr.to_string(),
        r.witness_model.to_string(),
        r.success_probability.analytic.to_string(),
        opt(r.success_probability.sampled),
        r.concurrence_model.to_string(),
    ];
    csv_text(&RUN_COLUMNS, [row])
}

pub fn sweep_csv(report: &SweepReport) -> Result<String, CliError> {
    let rows = report.rows.iter().map(|r| {
        vec![
            report.parameter.to_string(),
            r.value.to_string(),
            r.witness.to_string(),
            r.stderr.to_string(),
            r.success_probability.to_string(),
            r.concurrence.to_string(),
        ]
    });
    csv_text(&SWEEP_COLUMNS, rows)
}

pub fn tomo_csv(report: &TomoReport) -> Result<String, CliError> {
    let rows = report
        .tomography
        .correlations
        .iter()
        .map(|c| vec![c.label.clone(), c.value.to_string(), c.stderr.to_string()]);
    csv_text(&TOMO_COLUMNS, rows)
}

/// Where a document goes: `--out`, else `$SWAPCHAIN_OUT_DIR/<stem>.<ext>`,
/// else stdout (`None`).
pub fn destination(out: Option<&Path>, stem: &str, format: Format) -> Option<PathBuf> {
    if let Some(path) = out {
        return Some(path.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|dir| Path::new(&dir).join(format!("{stem}.{}", format.extension())))
}

pub fn emit(text: &str, dest: Option<&Path>) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Io(parent.display().to_string(), e))?;
            }
            std::fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io("stdout".into(), e))
        }
    }
}
