use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, ExperimentPreset};
use crate::noise::PerStage;
use crate::rng::subseed;
use crate::{Error, Result};

/// Preset field varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Shared visibility of every BSM.
    Visibility,
    /// Shared white-noise fraction of every source.
    SourceWhiteness,
    BackgroundFraction,
    NPairs,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 4] = [
        SweepParameter::Visibility,
        SweepParameter::SourceWhiteness,
        SweepParameter::BackgroundFraction,
        SweepParameter::NPairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Visibility => "visibility",
            SweepParameter::SourceWhiteness => "source-whiteness",
            SweepParameter::BackgroundFraction => "background-fraction",
            SweepParameter::NPairs => "n-pairs",
        }
    }

    fn apply(self, base: &ExperimentPreset, value: f64) -> Result<ExperimentPreset> {
        let mut p = base.clone();
        match self {
            SweepParameter::Visibility => p.noise.bsm_visibility = PerStage::Shared(value),
            SweepParameter::SourceWhiteness => p.noise.source_whiteness = PerStage::Shared(value),
            SweepParameter::BackgroundFraction => p.noise.background_fraction = value,
            SweepParameter::NPairs => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::out_of_range("n_pairs", value, "integers in [2, 16]"));
                }
                p.n_pairs = value as usize;
            }
        }
        Ok(p)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.replace('_', "-");
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == normalized)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep parameter '{s}'")))
    }
}

/// Parses `start:stop:step` (inclusive), `start:stop` (step 1) or a
/// comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidParameter(format!("grid '{spec}': {what}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{}' is not a number", s.trim())));
    let spec_trim = spec.trim();
    if spec_trim.is_empty() {
        return Err(bad("empty"));
    }
    let values = if spec_trim.contains(':') {
        let parts: Vec<&str> = spec_trim.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (number(a)?, number(b)?, 1.0),
            [a, b, c] => (number(a)?, number(b)?, number(c)?),
            _ => return Err(bad("expected start:stop or start:stop:step")),
        };
        if !(step.is_finite() && step > 0.0) {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop is below start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if n > 100_000 {
            return Err(bad("more than 100000 points"));
        }
        (0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        spec_trim
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(number)
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(bad(&format!("{v} is not finite")));
    }
    Ok(values)
}

/// One grid point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub witness: f64,
    pub stderr: f64,
    /// Sampled estimate, or the exact value in analytic runs.
    pub success_probability: f64,
    /// Concurrence of the model state.
    pub concurrence: f64,
}

/// Runs `base` once per grid value with `parameter` replaced.
///
/// Point `i` uses the seed derived from `sweep/i`, so rows do not depend on
/// the evaluation order.
pub fn sweep(parameter: SweepParameter, grid: &[f64], base: &ExperimentPreset) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid: empty".into()));
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let mut preset = parameter.apply(base, value)?;
            preset.seed = subseed(base.seed, &format!("sweep/{i}"));
            let report = run(&preset)?;
            Ok(SweepRow {
                value,
                witness: report.witness.value,
                stderr: report.witness.stderr,
                success_probability: report
                    .success_probability
                    .sampled
                    .unwrap_or(report.success_probability.analytic),
                concurrence: report.concurrence_model,
            })
        })
        .collect()
}
