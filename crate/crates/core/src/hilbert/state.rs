use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL, PSD_TOL};
use super::register::{complement, scatter, QubitRegister};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-9;
/// Largest tolerated imaginary part of an expectation value.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Normalized amplitude vector over a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    register: QubitRegister,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(register: QubitRegister, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(register, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { trace: norm * norm });
        }
        Ok(state)
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(register: QubitRegister, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::unchecked(register, amplitudes)?;
        let norm = state.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { trace: 0.0 });
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(register: QubitRegister, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(PureState {
            register,
            amplitudes,
        })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`; registers must carry the same labels in the same order.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.register != other.register {
            return Err(Error::InvalidRegister(format!(
                "inner product between registers {:?} and {:?}",
                self.register.labels(),
                other.register.labels()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let register = self.register.concat(&other.register)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(PureState {
            register,
            amplitudes,
        })
    }

    pub fn relabeled(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.n_qubits() {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits(),
                found: labels.len(),
            });
        }
        Ok(PureState {
            register: QubitRegister::new(labels.to_vec())?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// The same state with its register reordered to `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits();
        if order.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: order.len(),
            });
        }
        let positions = self.register.positions_of(order)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (new_idx, amp) in amplitudes.iter_mut().enumerate() {
            *amp = self.amplitudes[scatter(new_idx, &positions, n)];
        }
        Ok(PureState {
            register: QubitRegister::new(order.to_vec())?,
            amplitudes,
        })
    }

    /// Contracts the photons `labels` with `⟨bra|` and renormalizes the rest.
    /// Returns the conditional state and the outcome probability.
    pub fn project(&self, labels: &[usize], bra: &[Complex64]) -> Result<(PureState, f64)> {
        let n = self.n_qubits();
        let positions = self.register.positions_of(labels)?;
        if bra.len() != 1 << positions.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << positions.len(),
                found: bra.len(),
            });
        }
        let rest = complement(&positions, n);
        if rest.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << rest.len()];
        for (r, amp) in amplitudes.iter_mut().enumerate() {
            let base = scatter(r, &rest, n);
            *amp = bra
                .iter()
                .enumerate()
                .map(|(a, b)| b.conj() * self.amplitudes[base | scatter(a, &positions, n)])
                .sum();
        }
        let probability: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let state = PureState::normalized(self.register.select(&rest), amplitudes)
            .map_err(|_| Error::ImpossibleOutcome { probability })?;
        Ok((state, probability))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.register.clone(), ComplexMatrix::projector(&self.amplitudes))
    }
}

/// Hermitian, positive semidefinite, unit-trace operator over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    register: QubitRegister,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates dimension, Hermiticity, unit trace and positivity.
    pub fn new(register: QubitRegister, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                found: matrix.dim(),
            });
        }
        let residual = matrix.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { trace });
        }
        let min_eigenvalue = matrix.eigh()?.values.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { register, matrix })
    }

    pub(crate) fn from_parts(register: QubitRegister, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(register.dim(), matrix.dim());
        DensityMatrix { register, matrix }
    }

    /// `I / 2^n` on `register`.
    pub fn maximally_mixed(register: QubitRegister) -> Self {
        let dim = register.dim();
        DensityMatrix {
            register,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += self.matrix[(r, c)].norm_sqr();
            }
        }
        acc
    }

    pub fn relabeled(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.n_qubits() {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits(),
                found: labels.len(),
            });
        }
        Ok(DensityMatrix {
            register: QubitRegister::new(labels.to_vec())?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(DensityMatrix {
            register: self.register.concat(&other.register)?,
            matrix: self.matrix.tensor(&other.matrix),
        })
    }

    /// `Tr(ρ · obs)` for a Hermitian observable.
    pub fn expect(&self, obs: &ComplexMatrix) -> Result<f64> {
        let value = self.matrix.trace_product(obs)?;
        if value.im.abs() > IMAGINARY_TOL {
            return Err(Error::ImaginaryResidue { residue: value.im });
        }
        Ok(value.re)
    }

    /// `⟨ψ|ρ|ψ⟩`, with `psi` reordered to this register first.
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        let psi = psi.reordered(self.register.labels())?;
        let v = self.matrix.apply(psi.amplitudes());
        let f: Complex64 = psi.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        Ok(f.re)
    }

    /// Traces out every position not in `keep`. Kept qubits stay in their
    /// original relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.n_qubits();
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidRegister(format!("position {bad} outside {n}-qubit register")));
        }
        let traced = complement(&keep, n);
        let out_dim = 1 << keep.len();
        let mut out = ComplexMatrix::zeros(out_dim);
        let bases: Vec<usize> = (0..out_dim).map(|i| scatter(i, &keep, n)).collect();
        for t in 0..(1usize << traced.len()) {
            let offset = scatter(t, &traced, n);
            for (i, &bi) in bases.iter().enumerate() {
                for (j, &bj) in bases.iter().enumerate() {
                    out[(i, j)] += self.matrix[(bi | offset, bj | offset)];
                }
            }
        }
        Ok(DensityMatrix {
            register: self.register.select(&keep),
            matrix: out,
        })
    }

    /// Reduced state of the photons `labels`, kept in register order.
    pub fn marginal(&self, labels: &[usize]) -> Result<Self> {
        let positions = self.register.positions_of(labels)?;
        self.partial_trace(&positions)
    }

    /// `(op ⊗ I) ρ (op ⊗ I)†` with `op` acting on the photons `labels`.
    /// The result is not renormalized.
    pub fn conjugate_local(&self, op: &ComplexMatrix, labels: &[usize]) -> Result<ComplexMatrix> {
        let positions = self.register.positions_of(labels)?;
        if op.dim() != 1 << positions.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << positions.len(),
                found: op.dim(),
            });
        }
        let n = self.n_qubits();
        let dim = self.dim();
        let k = op.dim();
        let rest = complement(&positions, n);
        let groups: Vec<Vec<usize>> = (0..(1usize << rest.len()))
            .map(|r| {
                let base = scatter(r, &rest, n);
                (0..k).map(|a| base | scatter(a, &positions, n)).collect()
            })
            .collect();

        let mut left = ComplexMatrix::zeros(dim);
        let mut buf = vec![Complex64::new(0.0, 0.0); k];
        for col in 0..dim {
            for idx in &groups {
                for (b, &i) in idx.iter().enumerate() {
                    buf[b] = self.matrix[(i, col)];
                }
                for (a, &i) in idx.iter().enumerate() {
                    left[(i, col)] = op.row(a).iter().zip(&buf).map(|(o, v)| o * v).sum();
                }
            }
        }
        let mut out = ComplexMatrix::zeros(dim);
        for row in 0..dim {
            for idx in &groups {
                for (b, &i) in idx.iter().enumerate() {
                    buf[b] = left[(row, i)];
                }
                for (a, &i) in idx.iter().enumerate() {
                    out[(row, i)] = op.row(a).iter().zip(&buf).map(|(o, v)| o.conj() * v).sum();
                }
            }
        }
        Ok(out)
    }
}
