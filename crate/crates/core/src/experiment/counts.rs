use crate::analysis::{outcome_probabilities, Setting, SettingOutcome};
use crate::hilbert::DensityMatrix;
use crate::noise::check_unit;
use crate::rng::{multinomial, substream};
use crate::{Error, Result};

/// Outcome probabilities of `setting` including dark-count accidentals:
/// `(1 − d)·p + d/4`.
pub fn recorded_probabilities(rho: &DensityMatrix, setting: Setting, dark_count_prob: f64) -> Result<[f64; 4]> {
    check_unit("dark_count_prob", dark_count_prob)?;
    let p = outcome_probabilities(rho, setting)?;
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::ProbabilityNormalization { sum });
    }
    Ok(p.map(|x| ((1.0 - dark_count_prob) * x + dark_count_prob / 4.0).max(0.0)))
}

/// Draws `n_events` coincidences of `setting`.
///
/// The stream is `counts/<setting>` under `seed`, so each setting is
/// independent of which other settings are drawn and in what order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    setting: Setting,
    n_events: u64,
    dark_count_prob: f64,
    seed: u64,
) -> Result<SettingOutcome> {
    let p = recorded_probabilities(rho, setting, dark_count_prob)?;
    let mut rng = substream(seed, &format!("counts/{setting}"));
    Ok(SettingOutcome {
        setting,
        counts: multinomial(&mut rng, n_events, &p),
    })
}
