use serde::{Deserialize, Serialize};

use super::{select_settings, Setting, SettingOutcome};
use crate::hilbert::{ComplexMatrix, DensityMatrix, QubitRegister};
use crate::states::Pauli;
use crate::{Error, Result};

/// Two-qubit Pauli correlations `⟨σ_i ⊗ σ_j⟩`, indexed in `I, X, Y, Z` order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTable {
    pub values: [[f64; 4]; 4],
}

impl PauliTable {
    pub fn zeros() -> Self {
        PauliTable { values: [[0.0; 4]; 4] }
    }

    pub fn get(&self, first: Pauli, second: Pauli) -> f64 {
        self.values[first as usize][second as usize]
    }

    pub fn set(&mut self, first: Pauli, second: Pauli, value: f64) {
        self.values[first as usize][second as usize] = value;
    }

    /// `(label, value)` pairs such as `("XY", 0.1)`, in `II, IX, …, ZZ` order.
    pub fn labeled(&self) -> Vec<(String, f64)> {
        let mut out = Vec::with_capacity(16);
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                out.push((format!("{}{}", a.letter(), b.letter()), self.get(a, b)));
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &PauliTable) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// All sixteen `Tr(ρ σ_i⊗σ_j)`.
pub fn pauli_expectations(rho: &DensityMatrix) -> Result<PauliTable> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let mut table = PauliTable::zeros();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            table.set(a, b, rho.expect(&a.matrix().tensor(&b.matrix()))?);
        }
    }
    Ok(table)
}

/// Output of linear inversion; may be unphysical for noisy data.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearInversion {
    pub matrix: ComplexMatrix,
    pub min_eigenvalue: f64,
}

impl LinearInversion {
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -crate::hilbert::PSD_TOL
    }
}

/// `ρ = ¼ Σ ⟨σ_i⊗σ_j⟩ σ_i⊗σ_j`. Requires `⟨I⊗I⟩ = 1`.
pub fn linear_inversion(table: &PauliTable) -> Result<LinearInversion> {
    let norm = table.get(Pauli::I, Pauli::I);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::out_of_range("<II>", norm, "exactly 1"));
    }
    let mut matrix = ComplexMatrix::zeros(4);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let term = a.matrix().tensor(&b.matrix()).scale_real(0.25 * table.get(a, b));
            matrix = &matrix + &term;
        }
    }
    let min_eigenvalue = *matrix.eigh()?.values.last().expect("4x4 spectrum");
    Ok(LinearInversion {
        matrix,
        min_eigenvalue,
    })
}

/// Nearest state in spectrum: negative eigenvalues clipped, trace restored.
pub fn project_to_physical(matrix: &ComplexMatrix) -> Result<DensityMatrix> {
    let clipped = matrix.map_spectrum(|v| v.max(0.0))?;
    let trace = clipped.trace().re;
    if trace <= 0.0 {
        return Err(Error::NotPositive {
            min_eigenvalue: trace,
        });
    }
    let n = matrix.dim().trailing_zeros() as usize;
    Ok(DensityMatrix::from_parts(
        QubitRegister::sequential(1, n),
        clipped.scale_real(1.0 / trace),
    ))
}

/// Pauli correlations estimated from the nine settings.
///
/// Two-body terms come from their own setting. Single-qubit terms pool the
/// counts of the three settings that measure that axis on that photon.
pub fn correlations_from_counts(settings: &[SettingOutcome]) -> Result<PauliTable> {
    let selected = select_settings(settings, &Setting::ALL)?;
    let mut table = PauliTable::zeros();
    table.set(Pauli::I, Pauli::I, 1.0);
    // Pooled (sum of ±1 outcomes, number of events) per single-qubit marginal.
    let mut first = [(0.0f64, 0u64); 3];
    let mut second = [(0.0f64, 0u64); 3];
    for outcome in selected {
        let [pp, pm, mp, mm] = outcome.counts.map(|c| c as f64);
        let total = outcome.total();
        if total == 0 {
            return Err(Error::ZeroTotal {
                setting: outcome.setting.label(),
            });
        }
        let n = total as f64;
        let Setting(a, b) = outcome.setting;
        table.set(a.into(), b.into(), (pp - pm - mp + mm) / n);
        first[a as usize].0 += pp + pm - mp - mm;
        first[a as usize].1 += total;
        second[b as usize].0 += pp - pm + mp - mm;
        second[b as usize].1 += total;
    }
    for axis in crate::states::Axis::ALL {
        let (s1, n1) = first[axis as usize];
        let (s2, n2) = second[axis as usize];
        table.set(axis.into(), Pauli::I, s1 / n1 as f64);
        table.set(Pauli::I, axis.into(), s2 / n2 as f64);
    }
    Ok(table)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))² = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.matrix().check_same_dim(sigma.matrix())?;
    let product = &rho.matrix().psd_sqrt()? * &sigma.matrix().psd_sqrt()?;
    let trace_norm: f64 = product.singular_values().iter().sum();
    Ok(trace_norm * trace_norm)
}
