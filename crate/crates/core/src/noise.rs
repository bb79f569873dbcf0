//! Phenomenological noise: white-noise sources, imperfect two-photon
//! interference at the Bell-state measurements, accidental background from
//! double-pair emission, and detector dark counts.

use serde::{Deserialize, Serialize};

use crate::hilbert::{ComplexMatrix, DensityMatrix, QubitRegister};
use crate::states::{bell, BellKind};
use crate::{Error, Result};

/// A scalar shared by every stage, or one value per stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerStage {
    Shared(f64),
    Each(Vec<f64>),
}

impl PerStage {
    pub fn resolve(&self, n: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            PerStage::Shared(v) => Ok(vec![*v; n]),
            PerStage::Each(values) if values.len() == n => Ok(values.clone()),
            PerStage::Each(values) => Err(Error::InvalidParameter(format!(
                "{name}: expected {n} values, found {}",
                values.len()
            ))),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            PerStage::Shared(v) => vec![*v],
            PerStage::Each(values) => values.clone(),
        }
    }
}

impl Default for PerStage {
    fn default() -> Self {
        PerStage::Shared(0.0)
    }
}

/// Noise parameters of a swapping run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Maximally mixed admixture per source: `(1-w)|Ψ−⟩⟨Ψ−| + w·I/4`.
    pub source_whiteness: PerStage,
    /// HH↔VV coherence retained by each Bell-state measurement.
    pub bsm_visibility: PerStage,
    /// Fraction of accepted events that are uncorrelated accidentals.
    pub background_fraction: f64,
    /// Per-event probability of replacing the outcome with a uniform accidental.
    pub dark_count_prob: f64,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            source_whiteness: PerStage::Shared(0.0),
            bsm_visibility: PerStage::Shared(1.0),
            background_fraction: 0.0,
            dark_count_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.source_whiteness.values().into_iter().enumerate() {
            check_unit(&format!("noise.source_whiteness[{i}]"), w)?;
        }
        for (i, v) in self.bsm_visibility.values().into_iter().enumerate() {
            check_unit(&format!("noise.bsm_visibility[{i}]"), v)?;
        }
        check_unit("noise.background_fraction", self.background_fraction)?;
        check_unit("noise.dark_count_prob", self.dark_count_prob)?;
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::out_of_range(name, value, "[0, 1]"));
    }
    Ok(())
}

/// `p·|Ψ−⟩⟨Ψ−| + (1-p)·I/4` on photons 1 and 2.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    check_unit("p", p)?;
    let singlet = bell(BellKind::PsiMinus).to_density();
    mix_white(&singlet, 1.0 - p)
}

/// `(1-w)·ρ + w·I/dim`.
pub fn mix_white(rho: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
    check_unit("w", w)?;
    let dim = rho.dim();
    let white = ComplexMatrix::identity(dim).scale_real(w / dim as f64);
    let matrix = &rho.matrix().scale_real(1.0 - w) + &white;
    Ok(DensityMatrix::from_parts(rho.register().clone(), matrix))
}

/// Accidental coincidences at the final two-photon analysis, modeled as a
/// polarization-uncorrelated admixture of weight `f`.
pub fn add_background(rho: &DensityMatrix, f: f64) -> Result<DensityMatrix> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    check_unit("f", f)?;
    mix_white(rho, f)
}

/// Source state for a pair with white-noise fraction `w`, on photons `(a, b)`.
pub fn noisy_source(w: f64, labels: (usize, usize)) -> Result<DensityMatrix> {
    werner(1.0 - w)?.relabeled(&[labels.0, labels.1])
}

/// `I/4` on photons 1 and 2.
pub fn white_pair() -> DensityMatrix {
    DensityMatrix::maximally_mixed(QubitRegister::sequential(1, 2))
}
