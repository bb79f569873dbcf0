use crate::analysis::witness_value;
use crate::noise::{add_background, check_unit, NoiseModel, PerStage};
use crate::protocol::{run_chain, standard_specs, DetectorPattern};
use crate::{Error, Result};

/// Witness reported in the four-pair-source experiment after two swaps.
pub const PAPER_WITNESS: f64 = -0.16;
/// Spurious six-fold coincidences per accepted event (10 in 180).
pub const PAPER_BACKGROUND: f64 = 10.0 / 180.0;
pub const PAPER_N_PAIRS: usize = 3;

const BISECTION_TOL: f64 = 1e-9;

/// Witness of the end photons for singlet sources, a shared BSM visibility
/// and a background fraction, from the dense chain simulation.
pub fn model_witness(visibility: f64, background: f64, n_pairs: usize) -> Result<f64> {
    let specs = standard_specs(DetectorPattern::PLUS_PLUS, &vec![visibility; n_pairs - 1]);
    let result = run_chain(n_pairs, &specs, &vec![0.0; n_pairs])?;
    witness_value(&add_background(&result.final_state, background)?)
}

/// Shared visibility at which [`model_witness`] equals `target`.
///
/// The witness decreases monotonically in `V`, from `f/4` at `V = 0` to
/// `−(1 − f)/2 + f/4` at `V = 1`; bisection stops when the bracket is
/// narrower than 1e-9.
pub fn calibrate_visibility(target: f64, background: f64, n_pairs: usize) -> Result<f64> {
    check_unit("background_fraction", background)?;
    if n_pairs < 2 {
        return Err(Error::MalformedChain(format!("need at least 2 pairs, got {n_pairs}")));
    }
    let f = |v: f64| model_witness(v, background, n_pairs).map(|w| w - target);
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo.abs() < 1e-15 {
        return Ok(lo);
    }
    if f_hi.abs() < 1e-15 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot { target });
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Noise model reproducing the reported witness: ideal sources, one shared
/// visibility for both BSMs, and the reported accidental background.
pub fn calibrate_paper_preset() -> Result<NoiseModel> {
    let v = calibrate_visibility(PAPER_WITNESS, PAPER_BACKGROUND, PAPER_N_PAIRS)?;
    Ok(NoiseModel {
        source_whiteness: PerStage::Shared(0.0),
        bsm_visibility: PerStage::Shared(v),
        background_fraction: PAPER_BACKGROUND,
        dark_count_prob: 0.0,
    })
}
