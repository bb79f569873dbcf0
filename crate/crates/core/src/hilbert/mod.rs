//! Dense complex linear algebra over small qubit registers.
//!
//! Basis ordering is `H = 0`, `V = 1`, and register indices are big-endian:
//! the photon listed first in a [`QubitRegister`] owns the most significant
//! bit of a basis index. All operators are stored densely.

mod matrix;
pub mod random;
mod register;
mod state;

pub use matrix::{tensor, ComplexMatrix, Eigh, HERMITIAN_TOL, PSD_TOL};
pub use register::QubitRegister;
pub use state::{DensityMatrix, PureState, IMAGINARY_TOL};

use num_complex::Complex64;

/// `min_φ max_k |a_k - e^{iφ} b_k|`, evaluated at the phase that aligns the
/// largest component of `b` with `a`.
pub fn global_phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "comparing vectors of unequal length");
    let overlap: Complex64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}
