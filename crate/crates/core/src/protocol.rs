//! Post-selected Bell-state measurements and cascaded entanglement swapping.
//!
//! A polarizing beam splitter followed by diagonal-basis detection accepts
//! only the HH/VV coincidence subspace of the two input photons. Within it, a
//! `++`/`−−` coincidence heralds `|Φ+⟩` and a `+−`/`−+` coincidence heralds
//! `|Φ−⟩`. Partial distinguishability of the photons is captured by a
//! visibility `V` that damps the HH↔VV coherence of the measurement operator:
//!
//! ```text
//! M(++) = ¼ [ |HH⟩⟨HH| + |VV⟩⟨VV| + V (|HH⟩⟨VV| + |VV⟩⟨HH|) ]
//! ```
//!
//! The conditional state after a detection is `Tr_ij(√M ρ √M) / p` with
//! `p = Tr(M ρ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hilbert::{ComplexMatrix, DensityMatrix};
use crate::noise::{check_unit, noisy_source};
use crate::states::{BellKind, Pauli};
use crate::{Error, Result};

/// Smallest outcome probability treated as possible.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// Detector outcome in the diagonal basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Diagonal {
    Plus,
    Minus,
}

/// Coincidence pattern at the two detectors behind a BSM beam splitter.
///
/// Serialized as `"++"`, `"+-"`, `"-+"` or `"--"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DetectorPattern(pub Diagonal, pub Diagonal);

impl fmt::Display for DetectorPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |d: Diagonal| if d == Diagonal::Plus { '+' } else { '-' };
        write!(f, "{}{}", sign(self.0), sign(self.1))
    }
}

impl FromStr for DetectorPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sign = |c| match c {
            '+' => Some(Diagonal::Plus),
            '-' => Some(Diagonal::Minus),
            _ => None,
        };
        let mut chars = s.chars();
        match (chars.next().and_then(sign), chars.next().and_then(sign), chars.next()) {
            (Some(a), Some(b), None) => Ok(DetectorPattern(a, b)),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

impl TryFrom<String> for DetectorPattern {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DetectorPattern> for String {
    fn from(p: DetectorPattern) -> String {
        p.to_string()
    }
}

impl DetectorPattern {
    pub const PLUS_PLUS: DetectorPattern = DetectorPattern(Diagonal::Plus, Diagonal::Plus);

    pub const ALL: [DetectorPattern; 4] = [
        DetectorPattern(Diagonal::Plus, Diagonal::Plus),
        DetectorPattern(Diagonal::Plus, Diagonal::Minus),
        DetectorPattern(Diagonal::Minus, Diagonal::Plus),
        DetectorPattern(Diagonal::Minus, Diagonal::Minus),
    ];

    /// Bell state announced by this pattern.
    pub fn heralded(self) -> BellKind {
        if self.0 == self.1 {
            BellKind::PhiPlus
        } else {
            BellKind::PhiMinus
        }
    }
}

/// Hermitian positive two-qubit operator for one detection outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    matrix: ComplexMatrix,
    sqrt: ComplexMatrix,
}

impl PovmElement {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: matrix.dim(),
            });
        }
        let sqrt = matrix.psd_sqrt()?;
        Ok(PovmElement { matrix, sqrt })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn sqrt(&self) -> &ComplexMatrix {
        &self.sqrt
    }
}

/// Measurement operator for a registered coincidence pattern.
pub fn bsm_element(pattern: DetectorPattern, visibility: f64) -> Result<PovmElement> {
    check_unit("visibility", visibility)?;
    let sign = if pattern.heralded() == BellKind::PhiPlus { 1.0 } else { -1.0 };
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 0)] = 0.25.into();
    m[(3, 3)] = 0.25.into();
    m[(0, 3)] = (0.25 * sign * visibility).into();
    m[(3, 0)] = (0.25 * sign * visibility).into();
    PovmElement::new(m)
}

/// Ideal complete projection onto one Bell state.
pub fn bell_projection(kind: BellKind) -> PovmElement {
    PovmElement::new(kind.projector()).expect("Bell projectors are positive")
}

/// A detection stage on the photons `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsmSpec {
    pub photons: (usize, usize),
    pub pattern: DetectorPattern,
    pub visibility: f64,
}

impl BsmSpec {
    pub fn element(&self) -> Result<PovmElement> {
        bsm_element(self.pattern, self.visibility)
    }
}

/// What a stage post-selects on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Herald {
    /// Beam-splitter measurement with a registered coincidence pattern.
    Pattern {
        pattern: DetectorPattern,
        visibility: f64,
    },
    /// Complete projection onto a Bell state.
    Bell(BellKind),
}

impl Herald {
    pub fn element(&self) -> Result<PovmElement> {
        match *self {
            Herald::Pattern {
                pattern,
                visibility,
            } => bsm_element(pattern, visibility),
            Herald::Bell(kind) => Ok(bell_projection(kind)),
        }
    }
}

impl From<BsmSpec> for Stage {
    fn from(spec: BsmSpec) -> Self {
        Stage {
            photons: spec.photons,
            herald: Herald::Pattern {
                pattern: spec.pattern,
                visibility: spec.visibility,
            },
        }
    }
}

/// One swapping stage of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub photons: (usize, usize),
    pub herald: Herald,
}

/// Record of one executed stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub photons: (usize, usize),
    pub herald: Herald,
    /// Probability of the herald given all earlier heralds.
    pub probability: f64,
}

/// Outcome of a swapping chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapResult {
    /// Joint state of the two end photons.
    pub final_state: DensityMatrix,
    /// Product of the stage probabilities.
    pub success_probability: f64,
    pub stages: Vec<StageRecord>,
}

/// Applies `element` to the photons `(i, j)`, traces them out and
/// renormalizes. Returns the conditional state and the outcome probability.
pub fn apply_povm(rho: &DensityMatrix, photons: (usize, usize), element: &PovmElement) -> Result<(DensityMatrix, f64)> {
    let labels = [photons.0, photons.1];
    let positions = rho.register().positions_of(&labels)?;
    let post = rho.conjugate_local(element.sqrt(), &labels)?;
    let probability = post.trace().re;
    if probability < MIN_OUTCOME_PROBABILITY {
        return Err(Error::ImpossibleOutcome { probability });
    }
    let keep: Vec<usize> = (0..rho.n_qubits()).filter(|p| !positions.contains(p)).collect();
    let unnormalized = DensityMatrix::from_parts(rho.register().clone(), post);
    let reduced = unnormalized.partial_trace(&keep)?;
    let register = reduced.register().clone();
    let matrix = reduced.into_matrix().scale_real(1.0 / probability);
    Ok((DensityMatrix::from_parts(register, matrix), probability))
}

/// Bell-state measurement with a coincidence pattern on `spec.photons`.
pub fn apply_bsm(rho: &DensityMatrix, spec: &BsmSpec) -> Result<(DensityMatrix, f64)> {
    apply_povm(rho, spec.photons, &spec.element()?)
}

/// The stage layout `(2,3), (4,5), …` with a shared pattern and one
/// visibility per stage.
pub fn standard_specs(pattern: DetectorPattern, visibilities: &[f64]) -> Vec<BsmSpec> {
    visibilities
        .iter()
        .enumerate()
        .map(|(k, &visibility)| BsmSpec {
            photons: (2 * k + 2, 2 * k + 3),
            pattern,
            visibility,
        })
        .collect()
}

/// Swapping over `n_pairs` singlet sources with white-noise fractions
/// `source_whiteness` (one per pair), measured with `specs`.
pub fn run_chain(n_pairs: usize, specs: &[BsmSpec], source_whiteness: &[f64]) -> Result<SwapResult> {
    if n_pairs < 2 {
        return Err(Error::MalformedChain(format!("need at least 2 pairs, got {n_pairs}")));
    }
    if source_whiteness.len() != n_pairs {
        return Err(Error::LengthMismatch {
            expected: n_pairs,
            found: source_whiteness.len(),
        });
    }
    let sources = source_whiteness
        .iter()
        .enumerate()
        .map(|(k, &w)| noisy_source(w, (2 * k + 1, 2 * k + 2)))
        .collect::<Result<Vec<_>>>()?;
    let stages: Vec<Stage> = specs.iter().copied().map(Stage::from).collect();
    run_chain_with_sources(&sources, &stages)
}

fn check_layout(n_sources: usize, stages: &[Stage]) -> Result<Vec<Stage>> {
    if n_sources < 2 {
        return Err(Error::MalformedChain(format!("need at least 2 pairs, got {n_sources}")));
    }
    if stages.len() != n_sources - 1 {
        return Err(Error::MalformedChain(format!(
            "{} pairs need {} stages, got {}",
            n_sources,
            n_sources - 1,
            stages.len()
        )));
    }
    let mut normalized = Vec::with_capacity(stages.len());
    for (k, stage) in stages.iter().enumerate() {
        let expected = (2 * k + 2, 2 * k + 3);
        let (a, b) = stage.photons;
        let photons = if (a, b) == expected || (b, a) == expected {
            expected
        } else {
            return Err(Error::MalformedChain(format!(
                "stage {} must join photons {:?}, got {:?}",
                k + 1,
                expected,
                stage.photons
            )));
        };
        normalized.push(Stage {
            photons,
            herald: stage.herald,
        });
    }
    Ok(normalized)
}

fn relabeled_sources(sources: &[DensityMatrix]) -> Result<Vec<DensityMatrix>> {
    sources
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if s.n_qubits() != 2 {
                return Err(Error::MalformedChain(format!("source {} is not a two-photon state", k + 1)));
            }
            s.relabeled(&[2 * k + 1, 2 * k + 2])
        })
        .collect()
}

/// Swapping over arbitrary two-photon sources.
///
/// Pair `k` (zero-based) is relabeled to photons `(2k+1, 2k+2)` and stage `k`
/// must join photons `(2k+2, 2k+3)`. Stages are applied as each new pair is
/// attached, so the working register never exceeds four photons; this equals
/// [`run_chain_full`] because every stage acts only on photons that no later
/// source touches.
pub fn run_chain_with_sources(sources: &[DensityMatrix], stages: &[Stage]) -> Result<SwapResult> {
    let stages = check_layout(sources.len(), stages)?;
    let sources = relabeled_sources(sources)?;

    let mut current = sources[0].clone();
    let mut records = Vec::with_capacity(stages.len());
    let mut success = 1.0;
    for (source, stage) in sources[1..].iter().zip(&stages) {
        let joint = current.tensor(source)?;
        let (next, p) = apply_povm(&joint, stage.photons, &stage.herald.element()?)?;
        records.push(StageRecord {
            photons: stage.photons,
            herald: stage.herald,
            probability: p,
        });
        success *= p;
        current = next;
    }
    Ok(SwapResult {
        final_state: current,
        success_probability: success,
        stages: records,
    })
}

/// Same contract as [`run_chain_with_sources`], evaluated on the full
/// `2N`-photon register. Cost grows as `4^(2N)`; intended as a cross-check.
pub fn run_chain_full(sources: &[DensityMatrix], stages: &[Stage]) -> Result<SwapResult> {
    let stages = check_layout(sources.len(), stages)?;
    let sources = relabeled_sources(sources)?;

    let mut current = sources[0].clone();
    for source in &sources[1..] {
        current = current.tensor(source)?;
    }
    let mut records = Vec::with_capacity(stages.len());
    let mut success = 1.0;
    for stage in &stages {
        let (next, p) = apply_povm(&current, stage.photons, &stage.herald.element()?)?;
        records.push(StageRecord {
            photons: stage.photons,
            herald: stage.herald,
            probability: p,
        });
        success *= p;
        current = next;
    }
    Ok(SwapResult {
        final_state: current,
        success_probability: success,
        stages: records,
    })
}

/// Final Bell state predicted for ideal sources of the given kinds and the
/// given stage outcomes.
///
/// Writing each Bell state as `(I ⊗ σ)|Φ+⟩` with `σ ∈ {I, Z, X, XZ}`, a
/// swapping stage composes the labels of its two input pairs with the label
/// of its outcome. Up to phase the labels form the Klein four-group, so the
/// final kind is the product of all of them.
pub fn outcome_bookkeeping_for(pair_kinds: &[BellKind], outcomes: &[BellKind]) -> Result<BellKind> {
    if pair_kinds.is_empty() || outcomes.len() != pair_kinds.len() - 1 {
        return Err(Error::LengthMismatch {
            expected: pair_kinds.len().saturating_sub(1),
            found: outcomes.len(),
        });
    }
    let bits = pair_kinds
        .iter()
        .chain(outcomes)
        .map(|k| k.pauli_bits())
        .fold((false, false), |(x, z), (bx, bz)| (x ^ bx, z ^ bz));
    Ok(BellKind::from_pauli_bits(bits))
}

/// [`outcome_bookkeeping_for`] with every source emitting `|Ψ−⟩`.
pub fn outcome_bookkeeping(n_pairs: usize, outcomes: &[BellKind]) -> Result<BellKind> {
    if n_pairs == 0 {
        return Err(Error::LengthMismatch {
            expected: 0,
            found: outcomes.len(),
        });
    }
    outcome_bookkeeping_for(&vec![BellKind::PsiMinus; n_pairs], outcomes)
}

/// Pauli operator `σ` on the second photon with `(I ⊗ σ)|kind⟩ ∝ |Ψ−⟩`,
/// and its label (`"I"`, `"X"`, `"Z"` or `"XZ"`).
///
/// Applying it after a heralded chain is the usual Pauli-frame correction:
/// every outcome tuple then leaves the end photons in the singlet.
pub fn frame_correction(kind: BellKind) -> (ComplexMatrix, &'static str) {
    let (x, z) = kind.pauli_bits();
    let (tx, tz) = BellKind::PsiMinus.pauli_bits();
    match (x ^ tx, z ^ tz) {
        (false, false) => (ComplexMatrix::identity(2), "I"),
        (true, false) => (Pauli::X.matrix(), "X"),
        (false, true) => (Pauli::Z.matrix(), "Z"),
        (true, true) => (&Pauli::X.matrix() * &Pauli::Z.matrix(), "XZ"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random, QubitRegister};
    use crate::states::{bell, chain_initial, product_amplitudes, Polarization};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_correction_maps_every_bell_state_to_singlet() {
        let singlet = bell(BellKind::PsiMinus);
        for kind in BellKind::ALL {
            let (sigma, _) = frame_correction(kind);
            let rho = bell(kind).to_density();
            let corrected = DensityMatrix::new(rho.register().clone(), rho.conjugate_local(&sigma, &[2]).unwrap()).unwrap();
            assert!((corrected.fidelity_with(&singlet).unwrap() - 1.0).abs() < 1e-12, "{kind}");
        }
        assert_eq!(frame_correction(BellKind::PsiMinus).1, "I");
    }

    #[test]
    fn pattern_strings_round_trip() {
        for p in DetectorPattern::ALL {
            assert_eq!(p.to_string().parse::<DetectorPattern>().unwrap(), p);
        }
        assert_eq!(DetectorPattern::PLUS_PLUS.to_string(), "++");
        assert!("+x".parse::<DetectorPattern>().is_err());
        assert!("+++".parse::<DetectorPattern>().is_err());
    }

    #[test]
    fn element_at_full_visibility_is_half_phi_plus() {
        let m = bsm_element(DetectorPattern::PLUS_PLUS, 1.0).unwrap();
        // Oracle: |++⟩⟨++| restricted to span{HH, VV}.
        let pp = ComplexMatrix::projector(&product_amplitudes(Polarization::Plus, Polarization::Plus));
        let mut restricted = ComplexMatrix::zeros(4);
        for &r in &[0, 3] {
            for &c in &[0, 3] {
                restricted[(r, c)] = pp[(r, c)];
            }
        }
        assert!(m.matrix().max_abs_diff(&restricted) < 1e-15);
        let half_phi = BellKind::PhiPlus.projector().scale_real(0.5);
        assert!(m.matrix().max_abs_diff(&half_phi) < 1e-15);
    }

    #[test]
    fn element_at_zero_visibility_is_incoherent() {
        let m = bsm_element(DetectorPattern::PLUS_PLUS, 0.0).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[0.25, 0.0, 0.0, 0.25]);
        assert!(m.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn element_spectrum_at_half_visibility() {
        let m = bsm_element(DetectorPattern::PLUS_PLUS, 0.5).unwrap();
        let values = m.matrix().eigh().unwrap().values;
        let expected = [0.375, 0.125, 0.0, 0.0];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!(bsm_element(DetectorPattern::PLUS_PLUS, 1.1).is_err());
    }

    #[test]
    fn patterns_herald_phi_plus_and_phi_minus() {
        use Diagonal::*;
        assert_eq!(DetectorPattern(Plus, Plus).heralded(), BellKind::PhiPlus);
        assert_eq!(DetectorPattern(Minus, Minus).heralded(), BellKind::PhiPlus);
        assert_eq!(DetectorPattern(Plus, Minus).heralded(), BellKind::PhiMinus);
        assert_eq!(DetectorPattern(Minus, Plus).heralded(), BellKind::PhiMinus);
        let pm = bsm_element(DetectorPattern(Plus, Minus), 1.0).unwrap();
        assert!(pm.matrix().max_abs_diff(&BellKind::PhiMinus.projector().scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn pattern_elements_sum_to_coincidence_projector() {
        let sum = DetectorPattern::ALL.iter().fold(ComplexMatrix::zeros(4), |acc, p| {
            &acc + bsm_element(*p, 1.0).unwrap().matrix()
        });
        let hh_vv = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 1.0]);
        assert!(sum.max_abs_diff(&hh_vv) < 1e-15);
    }

    #[test]
    fn single_swap_heralds_phi_plus() {
        let rho = chain_initial(2).unwrap().pure.to_density();
        let spec = BsmSpec {
            photons: (2, 3),
            pattern: DetectorPattern::PLUS_PLUS,
            visibility: 1.0,
        };
        let (out, p) = apply_bsm(&rho, &spec).unwrap();
        assert!((p - 0.125).abs() < 1e-14);
        assert_eq!(out.register().labels(), &[1, 4]);
        let phi = bell(BellKind::PhiPlus).relabeled(&[1, 4]).unwrap();
        assert!((out.fidelity_with(&phi).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn product_input_probability() {
        let h = product_amplitudes(Polarization::H, Polarization::H);
        let hhhh: Vec<_> = h.iter().flat_map(|a| h.iter().map(move |b| a * b)).collect();
        let rho = DensityMatrix::from_parts(QubitRegister::sequential(1, 4), ComplexMatrix::projector(&hhhh));
        let spec = BsmSpec {
            photons: (2, 3),
            pattern: DetectorPattern::PLUS_PLUS,
            visibility: 1.0,
        };
        let (out, p) = apply_bsm(&rho, &spec).unwrap();
        assert!((p - 0.25).abs() < 1e-14);
        let hh = ComplexMatrix::projector(&h);
        assert!(out.matrix().max_abs_diff(&hh) < 1e-14);
    }

    #[test]
    fn impossible_outcome_is_reported() {
        let hv = product_amplitudes(Polarization::H, Polarization::V);
        let rho = DensityMatrix::from_parts(QubitRegister::sequential(1, 2), ComplexMatrix::projector(&hv));
        let three = rho.tensor(&DensityMatrix::maximally_mixed(QubitRegister::new(vec![3]).unwrap())).unwrap();
        let spec = BsmSpec {
            photons: (1, 2),
            pattern: DetectorPattern::PLUS_PLUS,
            visibility: 1.0,
        };
        assert!(matches!(apply_bsm(&three, &spec), Err(Error::ImpossibleOutcome { .. })));
    }

    #[test]
    fn conditional_states_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let rho = random::density_matrix(4, &mut rng);
            for pattern in DetectorPattern::ALL {
                let spec = BsmSpec {
                    photons: (3, 1),
                    pattern,
                    visibility: 0.73,
                };
                let (out, _) = apply_bsm(&rho, &spec).unwrap();
                assert!((out.trace() - 1.0).abs() < 1e-12);
                assert_eq!(out.register().labels(), &[2, 4]);
                DensityMatrix::new(out.register().clone(), out.matrix().clone()).unwrap();
            }
        }
    }

    #[test]
    fn malformed_chains_are_rejected() {
        let specs = standard_specs(DetectorPattern::PLUS_PLUS, &[1.0]);
        assert!(run_chain(3, &specs, &[0.0; 3]).is_err());
        assert!(run_chain(1, &[], &[0.0]).is_err());
        let mut wrong = standard_specs(DetectorPattern::PLUS_PLUS, &[1.0, 1.0]);
        wrong[1].photons = (3, 4);
        assert!(matches!(run_chain(3, &wrong, &[0.0; 3]), Err(Error::MalformedChain(_))));
        let mut reversed = standard_specs(DetectorPattern::PLUS_PLUS, &[1.0, 1.0]);
        reversed[0].photons = (3, 2);
        assert!(run_chain(3, &reversed, &[0.0; 3]).is_ok());
    }

    #[test]
    fn bookkeeping_examples() {
        use BellKind::*;
        assert_eq!(outcome_bookkeeping(3, &[PhiPlus, PhiPlus]).unwrap(), PsiMinus);
        assert_eq!(outcome_bookkeeping(2, &[PsiMinus]).unwrap(), PsiMinus);
        assert_eq!(outcome_bookkeeping(2, &[PhiMinus]).unwrap(), PhiMinus);
        assert!(outcome_bookkeeping(3, &[PhiPlus]).is_err());
    }

    #[test]
    fn incremental_and_full_register_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let sources: Vec<_> = (0..3).map(|_| random::density_matrix(2, &mut rng)).collect();
            let stages: Vec<Stage> = standard_specs(DetectorPattern(Diagonal::Minus, Diagonal::Plus), &[0.8, 0.4])
                .into_iter()
                .map(Stage::from)
                .collect();
            let a = run_chain_with_sources(&sources, &stages).unwrap();
            let b = run_chain_full(&sources, &stages).unwrap();
            assert!(a.final_state.matrix().max_abs_diff(b.final_state.matrix()) < 1e-12);
            assert!((a.success_probability - b.success_probability).abs() < 1e-14);
            assert_eq!(b.final_state.register().labels(), &[1, 6]);
        }
    }
}
