use crate::hilbert::DensityMatrix;
use crate::states::Pauli;
use crate::{Error, Result};

/// `λ₁ − λ₂ − λ₃ − λ₄`, where `λ` are the descending square roots of the
/// eigenvalues of `ρ·ρ̃` and `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// The `λ` are computed as the singular values of `√ρ √ρ̃`, which avoids
/// taking square roots of eigenvalues at rounding level.
pub fn concurrence_argument(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let yy = Pauli::Y.matrix().tensor(&Pauli::Y.matrix());
    let root = rho.matrix().psd_sqrt()?;
    let root_flipped = &(&yy * &root.conj()) * &yy;
    let lambdas = (&root * &root_flipped).singular_values();
    Ok(lambdas[0] - lambdas[1..].iter().sum::<f64>())
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, with rounding above 1
/// clipped.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence_argument(rho)?.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random, QubitRegister};
    use crate::noise::werner;
    use crate::states::{bell, BellKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn endpoints() {
        for kind in BellKind::ALL {
            let c = concurrence(&bell(kind).to_density()).unwrap();
            assert!((c - 1.0).abs() < 1e-9, "{kind}");
        }
        let mixed = DensityMatrix::maximally_mixed(QubitRegister::sequential(1, 2));
        assert_eq!(concurrence(&mixed).unwrap(), 0.0);
        assert!((concurrence_argument(&mixed).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_state_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..1000 {
            let psi = random::pure_state(2, &mut rng);
            let a = psi.amplitudes();
            let expected = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
            let c = concurrence(&psi.to_density()).unwrap();
            assert!((c - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn werner_law() {
        for p in [0.0, 0.2, 1.0 / 3.0, 0.6, 1.0] {
            let c = concurrence(&werner(p).unwrap()).unwrap();
            let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((c - expected).abs() < 1e-9, "p={p}");
        }
    }
}
