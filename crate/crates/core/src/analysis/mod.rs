//! Entanglement certification and two-qubit state reconstruction.
//!
//! Measurements on the end photons are local projective measurements in a
//! pair of Pauli eigenbases, called a *setting* (`ZZ`, `XY`, …). Each
//! setting has four outcomes, ordered `(++, +−, −+, −−)` where `+` is the
//! `+1` eigenvector of the axis: `H` for `Z`, `+` for `X`, `L` for `Y`.

mod concurrence;
mod mle;
mod tomography;
mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use concurrence::{concurrence, concurrence_argument};
pub use mle::{
    mle_reconstruct, params_from_state, state_from_params, MleFit, MleOptions, NegLogLikelihood,
    TomographyResult, N_PARAMS,
};
pub use tomography::{
    correlations_from_counts, fidelity, linear_inversion, pauli_expectations, project_to_physical,
    LinearInversion, PauliTable,
};
pub use witness::{witness_from_counts, witness_operator, witness_value, WitnessEstimate, WitnessOperator, WitnessTerm};

use crate::hilbert::{ComplexMatrix, DensityMatrix};
use crate::states::{product_amplitudes, Axis};
use crate::{Error, Result};

/// Outcome labels in count order.
pub const OUTCOME_NAMES: [&str; 4] = ["pp", "pm", "mp", "mm"];

/// Local measurement bases for the first and second photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting(pub Axis, pub Axis);

impl Setting {
    /// All nine settings in `ZZ, ZX, ZY, XZ, …, YY` order.
    pub const ALL: [Setting; 9] = [
        Setting(Axis::Z, Axis::Z),
        Setting(Axis::Z, Axis::X),
        Setting(Axis::Z, Axis::Y),
        Setting(Axis::X, Axis::Z),
        Setting(Axis::X, Axis::X),
        Setting(Axis::X, Axis::Y),
        Setting(Axis::Y, Axis::Z),
        Setting(Axis::Y, Axis::X),
        Setting(Axis::Y, Axis::Y),
    ];

    /// The three correlated settings needed by the witness.
    pub const WITNESS: [Setting; 3] = [
        Setting(Axis::Z, Axis::Z),
        Setting(Axis::X, Axis::X),
        Setting(Axis::Y, Axis::Y),
    ];

    pub fn label(self) -> String {
        format!("{}{}", self.0.letter(), self.1.letter())
    }

    /// Rank-one projectors for the four outcomes.
    pub fn projectors(self) -> [ComplexMatrix; 4] {
        let (a_plus, a_minus) = self.0.eigenbasis();
        let (b_plus, b_minus) = self.1.eigenbasis();
        [
            ComplexMatrix::projector(&product_amplitudes(a_plus, b_plus)),
            ComplexMatrix::projector(&product_amplitudes(a_plus, b_minus)),
            ComplexMatrix::projector(&product_amplitudes(a_minus, b_plus)),
            ComplexMatrix::projector(&product_amplitudes(a_minus, b_minus)),
        ]
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.letter(), self.1.letter())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next().and_then(Axis::from_letter), chars.next().and_then(Axis::from_letter), chars.next()) {
            (Some(a), Some(b), None) => Ok(Setting(a, b)),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

impl Serialize for Setting {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome probabilities of `setting` on a two-photon state.
pub fn outcome_probabilities(rho: &DensityMatrix, setting: Setting) -> Result<[f64; 4]> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let projectors = setting.projectors();
    let mut probs = [0.0; 4];
    for (p, proj) in probs.iter_mut().zip(&projectors) {
        *p = rho.expect(proj)?;
    }
    Ok(probs)
}

/// Recorded counts of one setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingOutcome {
    pub setting: Setting,
    /// Ordered `(++, +−, −+, −−)`.
    pub counts: [u64; 4],
}

impl SettingOutcome {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub(crate) fn frequencies(&self) -> Result<[f64; 4]> {
        let total = self.total();
        if total == 0 {
            return Err(Error::ZeroTotal {
                setting: self.setting.label(),
            });
        }
        Ok(self.counts.map(|c| c as f64 / total as f64))
    }
}

/// Finds each of `wanted` in `settings`, rejecting duplicates and reporting
/// every missing setting by name.
pub(crate) fn select_settings<'a>(settings: &'a [SettingOutcome], wanted: &[Setting]) -> Result<Vec<&'a SettingOutcome>> {
    let mut found = Vec::with_capacity(wanted.len());
    let mut missing = Vec::new();
    for w in wanted {
        let mut matches = settings.iter().filter(|s| s.setting == *w);
        match (matches.next(), matches.next()) {
            (Some(s), None) => found.push(s),
            (Some(_), Some(_)) => return Err(Error::DuplicateSetting(w.label())),
            (None, _) => missing.push(w.label()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing));
    }
    Ok(found)
}
