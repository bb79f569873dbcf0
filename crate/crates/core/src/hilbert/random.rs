//! Random states for tests and round-trip experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, DensityMatrix, PureState, QubitRegister};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on photons `1..=n`.
pub fn pure_state(n_qubits: usize, rng: &mut impl Rng) -> PureState {
    let register = QubitRegister::sequential(1, n_qubits);
    let amplitudes = (0..register.dim()).map(|_| gaussian(rng)).collect();
    PureState::normalized(register, amplitudes).expect("gaussian vector is nonzero")
}

/// Hilbert-Schmidt random mixed state `G G† / Tr(G G†)`.
pub fn density_matrix(n_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
    let register = QubitRegister::sequential(1, n_qubits);
    let dim = register.dim();
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(rng));
    let a = &g * &g.adjoint();
    let t = a.trace().re;
    DensityMatrix::from_parts(register, a.scale_real(1.0 / t))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}
