use serde::{Deserialize, Serialize};

use super::{select_settings, Setting, SettingOutcome};
use crate::hilbert::{ComplexMatrix, DensityMatrix};
use crate::states::{product_amplitudes, Polarization};
use crate::{Error, Result};

/// One signed rank-one term `sign · |ab⟩⟨ab|` of the witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessTerm {
    pub sign: f64,
    pub first: Polarization,
    pub second: Polarization,
}

/// `W = ½(|HH⟩⟨HH| + |VV⟩⟨VV| + |++⟩⟨++| + |−−⟩⟨−−| − |RL⟩⟨RL| − |LR⟩⟨LR|)`.
///
/// Every term is diagonal in one of the three correlated settings, so
/// `Tr(ρW)` follows from the `ZZ`, `XX` and `YY` outcome frequencies alone.
#[derive(Clone, Debug)]
pub struct WitnessOperator {
    pub matrix: ComplexMatrix,
    pub prefactor: f64,
    pub terms: [WitnessTerm; 6],
}

pub fn witness_operator() -> WitnessOperator {
    use Polarization::*;
    let term = |sign, first, second| WitnessTerm { sign, first, second };
    let terms = [
        term(1.0, H, H),
        term(1.0, V, V),
        term(1.0, Plus, Plus),
        term(1.0, Minus, Minus),
        term(-1.0, R, L),
        term(-1.0, L, R),
    ];
    let prefactor = 0.5;
    let matrix = terms.iter().fold(ComplexMatrix::zeros(4), |acc, t| {
        let proj = ComplexMatrix::projector(&product_amplitudes(t.first, t.second));
        &acc + &proj.scale_real(prefactor * t.sign)
    });
    WitnessOperator {
        matrix,
        prefactor,
        terms,
    }
}

/// `Tr(ρW)`; negative values certify entanglement.
pub fn witness_value(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    rho.expect(&witness_operator().matrix)
}

/// Witness estimate from counts with its multinomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Weights of the four outcomes of a witness setting in `W`.
fn outcome_weights(setting: Setting) -> [f64; 4] {
    // ZZ: HH, VV.  XX: ++, −−.  YY: outcome (−,+) is RL and (+,−) is LR.
    if setting == Setting::WITNESS[2] {
        [0.0, -0.5, -0.5, 0.0]
    } else {
        [0.5, 0.0, 0.0, 0.5]
    }
}

/// Estimates `Tr(ρW)` from the `ZZ`, `XX` and `YY` settings.
///
/// Each projector expectation is its outcome frequency within its setting.
/// The error treats the three settings as independent multinomials:
/// `Var = Σ_s (Σ_k a_k² f_k − (Σ_k a_k f_k)²) / N_s`.
pub fn witness_from_counts(settings: &[SettingOutcome]) -> Result<WitnessEstimate> {
    let selected = select_settings(settings, &Setting::WITNESS)?;
    let mut value = 0.0;
    let mut variance = 0.0;
    for outcome in selected {
        let freqs = outcome.frequencies()?;
        let weights = outcome_weights(outcome.setting);
        let mean: f64 = weights.iter().zip(&freqs).map(|(a, f)| a * f).sum();
        let second: f64 = weights.iter().zip(&freqs).map(|(a, f)| a * a * f).sum();
        value += mean;
        variance += (second - mean * mean).max(0.0) / outcome.total() as f64;
    }
    Ok(WitnessEstimate {
        value,
        stderr: variance.sqrt(),
    })
}
