//! Polarization kets, Bell states, Pauli observables and chain states.
//!
//! Phase conventions:
//!
//! ```text
//! |±⟩ = (|H⟩ ± |V⟩)/√2
//! |L⟩ = (|H⟩ + i|V⟩)/√2     (+1 eigenvector of σ_y)
//! |R⟩ = (|H⟩ − i|V⟩)/√2
//! |Ψ±⟩ = (|HV⟩ ± |VH⟩)/√2
//! |Φ±⟩ = (|HH⟩ ± |VV⟩)/√2
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hilbert::{ComplexMatrix, PureState, QubitRegister};
use crate::{Error, Result};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Single-photon polarization states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::Plus,
        Polarization::Minus,
        Polarization::R,
        Polarization::L,
    ];

    pub fn amplitudes(self) -> [Complex64; 2] {
        let s = SQRT_HALF;
        match self {
            Polarization::H => [re(1.0), re(0.0)],
            Polarization::V => [re(0.0), re(1.0)],
            Polarization::Plus => [re(s), re(s)],
            Polarization::Minus => [re(s), re(-s)],
            Polarization::L => [re(s), im(s)],
            Polarization::R => [re(s), im(-s)],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::Plus => "+",
            Polarization::Minus => "-",
            Polarization::R => "R",
            Polarization::L => "L",
        }
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "H" | "h" => Polarization::H,
            "V" | "v" => Polarization::V,
            "+" | "Plus" | "plus" | "P" => Polarization::Plus,
            "-" | "Minus" | "minus" | "M" => Polarization::Minus,
            "R" | "r" => Polarization::R,
            "L" | "l" => Polarization::L,
            other => return Err(Error::UnknownLabel(other.to_string())),
        })
    }
}

/// One-photon state for `label`, on photon 1.
pub fn ket(label: Polarization) -> PureState {
    PureState::new(QubitRegister::sequential(1, 1), label.amplitudes().to_vec())
        .expect("basis kets are normalized")
}

/// Amplitudes of `|a⟩ ⊗ |b⟩`.
pub fn product_amplitudes(a: Polarization, b: Polarization) -> [Complex64; 4] {
    let (x, y) = (a.amplitudes(), b.amplitudes());
    [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
}

/// The four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn amplitudes(self) -> [Complex64; 4] {
        let s = SQRT_HALF;
        match self {
            BellKind::PsiPlus => [re(0.0), re(s), re(s), re(0.0)],
            BellKind::PsiMinus => [re(0.0), re(s), re(-s), re(0.0)],
            BellKind::PhiPlus => [re(s), re(0.0), re(0.0), re(s)],
            BellKind::PhiMinus => [re(s), re(0.0), re(0.0), re(-s)],
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes())
    }

    /// Label in the Klein four-group `{I, Z, X, XZ}` obtained by writing the
    /// state as `(I ⊗ σ)|Φ+⟩` and dropping phases: `(x_bit, z_bit)`.
    pub(crate) fn pauli_bits(self) -> (bool, bool) {
        match self {
            BellKind::PhiPlus => (false, false),
            BellKind::PhiMinus => (false, true),
            BellKind::PsiPlus => (true, false),
            BellKind::PsiMinus => (true, true),
        }
    }

    pub(crate) fn from_pauli_bits(bits: (bool, bool)) -> Self {
        match bits {
            (false, false) => BellKind::PhiPlus,
            (false, true) => BellKind::PhiMinus,
            (true, false) => BellKind::PsiPlus,
            (true, true) => BellKind::PsiMinus,
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PsiPlus => "Psi+",
            BellKind::PsiMinus => "Psi-",
            BellKind::PhiPlus => "Phi+",
            BellKind::PhiMinus => "Phi-",
        })
    }
}

/// Bell state on photons 1 and 2.
pub fn bell(kind: BellKind) -> PureState {
    PureState::new(QubitRegister::sequential(1, 2), kind.amplitudes().to_vec())
        .expect("Bell states are normalized")
}

/// Tensor product of Bell pairs on photons `1..=2N`, pair `k` on `(2k+1, 2k+2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub pure: PureState,
    pub pair_kinds: Vec<BellKind>,
}

/// Chain of `n_pairs` independent pairs of the given kinds.
pub fn chain_of(kinds: &[BellKind]) -> Result<ChainState> {
    let (first, rest) = kinds
        .split_first()
        .ok_or_else(|| Error::out_of_range("n_pairs", 0.0, ">= 1"))?;
    let mut pure = bell(*first);
    for (k, kind) in rest.iter().enumerate() {
        let first_label = 2 * (k + 1) + 1;
        pure = pure.tensor(&bell(*kind).relabeled(&[first_label, first_label + 1])?)?;
    }
    Ok(ChainState {
        pure,
        pair_kinds: kinds.to_vec(),
    })
}

/// `n_pairs` singlets, the usual source output.
pub fn chain_initial(n_pairs: usize) -> Result<ChainState> {
    chain_of(&vec![BellKind::PsiMinus; n_pairs])
}

/// Measurement axes, ordered as they appear in setting names (`Z`, `X`, `Y`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    /// Eigenstates `(+1, -1)` of the axis' Pauli matrix.
    pub fn eigenbasis(self) -> (Polarization, Polarization) {
        match self {
            Axis::Z => (Polarization::H, Polarization::V),
            Axis::X => (Polarization::Plus, Polarization::Minus),
            Axis::Y => (Polarization::L, Polarization::R),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::Z => 'Z',
            Axis::X => 'X',
            Axis::Y => 'Y',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'Z' | 'z' => Some(Axis::Z),
            'X' | 'x' => Some(Axis::X),
            'Y' | 'y' => Some(Axis::Y),
            _ => None,
        }
    }
}

/// Single-qubit Pauli operators including the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let z = re(0.0);
        let rows = match self {
            Pauli::I => [[re(1.0), z], [z, re(1.0)]],
            Pauli::X => [[z, re(1.0)], [re(1.0), z]],
            Pauli::Y => [[z, im(-1.0)], [im(1.0), z]],
            Pauli::Z => [[re(1.0), z], [z, re(-1.0)]],
        };
        ComplexMatrix::from_fn(2, |r, c| rows[r][c])
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl From<Axis> for Pauli {
    fn from(axis: Axis) -> Self {
        match axis {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Pauli matrix for a measurement axis.
pub fn pauli(axis: Axis) -> ComplexMatrix {
    Pauli::from(axis).matrix()
}

/// Coefficients of a four-photon state in a product of Bell bases.
///
/// `table[k1][k2] = ⟨B_k1 (a,b) ⊗ B_k2 (c,d) | ψ⟩` with kinds indexed in
/// [`BellKind::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct BellTable {
    pub pairing: ((usize, usize), (usize, usize)),
    pub table: [[Complex64; 4]; 4],
}

impl BellTable {
    pub fn get(&self, first: BellKind, second: BellKind) -> Complex64 {
        self.table[first.index()][second.index()]
    }

    pub fn total_weight(&self) -> f64 {
        self.table.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ c·B_k1 ⊗ B_k2`, returned on the register order `(a, b, c, d)`.
    pub fn reconstruct(&self) -> PureState {
        let ((a, b), (c, d)) = self.pairing;
        let mut amps = vec![re(0.0); 16];
        for k1 in BellKind::ALL {
            for k2 in BellKind::ALL {
                let coeff = self.get(k1, k2);
                let (x, y) = (k1.amplitudes(), k2.amplitudes());
                for i in 0..4 {
                    for j in 0..4 {
                        amps[4 * i + j] += coeff * x[i] * y[j];
                    }
                }
            }
        }
        let register = QubitRegister::new(vec![a, b, c, d]).expect("pairing labels are distinct");
        PureState::normalized(register, amps).expect("Bell table has nonzero weight")
    }
}

/// Expands a four-photon state in the Bell bases of the pairs `(a,b)` and `(c,d)`.
pub fn bell_coefficients(state: &PureState, pairing: ((usize, usize), (usize, usize))) -> Result<BellTable> {
    if state.n_qubits() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.n_qubits(),
        });
    }
    let ((a, b), (c, d)) = pairing;
    let ordered = state
        .reordered(&[a, b, c, d])
        .map_err(|e| Error::InvalidRegister(format!("pairing is not a partition of the register: {e}")))?;
    let amps = ordered.amplitudes();
    let mut table = [[re(0.0); 4]; 4];
    for k1 in BellKind::ALL {
        for k2 in BellKind::ALL {
            let (x, y) = (k1.amplitudes(), k2.amplitudes());
            let mut acc = re(0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += (x[i] * y[j]).conj() * amps[4 * i + j];
                }
            }
            table[k1.index()][k2.index()] = acc;
        }
    }
    Ok(BellTable { pairing, table })
}
