//! Maximum-likelihood two-qubit tomography.
//!
//! States are parametrized as `ρ = T†T / Tr(T†T)` with `T` lower triangular:
//! four real diagonal entries followed by the real and imaginary parts of
//! the six sub-diagonal entries, row by row. Every parameter vector maps to
//! a valid state, so the fit is an unconstrained minimization of the
//! per-event negative log-likelihood, solved with L-BFGS.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::concurrence::{concurrence, concurrence_argument};
use super::tomography::{correlations_from_counts, linear_inversion, project_to_physical, LinearInversion, PauliTable};
use super::{select_settings, Setting, SettingOutcome};
use crate::hilbert::{ComplexMatrix, DensityMatrix, QubitRegister};
use crate::noise::mix_white;
use crate::rng::{multinomial, substream};
use crate::{Error, Result};

pub const N_PARAMS: usize = 16;
/// Probabilities below this are clamped inside the logarithm.
const PROBABILITY_FLOOR: f64 = 1e-12;
/// White-noise admixture that makes the starting point full rank.
const INIT_MIXING: f64 = 1e-4;
const LBFGS_MEMORY: usize = 8;

const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the max-norm of the gradient falls below this.
    pub gradient_tolerance: f64,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iterations: 10_000,
            gradient_tolerance: 1e-8,
            bootstrap_resamples: 200,
            seed: 0,
        }
    }
}

fn t_matrix(params: &[f64; N_PARAMS]) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(4);
    for i in 0..4 {
        t[(i, i)] = Complex64::new(params[i], 0.0);
    }
    for (k, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        t[(r, c)] = Complex64::new(params[4 + 2 * k], params[5 + 2 * k]);
    }
    t
}

/// `T†T / Tr(T†T)` for the parameter vector.
pub fn state_from_params(params: &[f64; N_PARAMS]) -> DensityMatrix {
    let t = t_matrix(params);
    let a = &t.adjoint() * &t;
    let trace = a.trace().re;
    DensityMatrix::from_parts(QubitRegister::sequential(1, 2), a.scale_real(1.0 / trace))
}

/// Parameters of a positive definite two-qubit state.
///
/// With `J` the exchange matrix, `JρJ = LL†` (Cholesky) gives `ρ = UU†`
/// for the upper-triangular `U = JLJ`, so `T = U†`.
pub fn params_from_state(rho: &DensityMatrix) -> Result<[f64; N_PARAMS]> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let flipped = ComplexMatrix::from_fn(4, |r, c| m[(3 - r, 3 - c)]);
    let l = cholesky(&flipped)?;
    let u = ComplexMatrix::from_fn(4, |r, c| l[(3 - r, 3 - c)]);
    let t = u.adjoint();
    let mut params = [0.0; N_PARAMS];
    for i in 0..4 {
        params[i] = t[(i, i)].re;
    }
    for (k, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        params[4 + 2 * k] = t[(r, c)].re;
        params[5 + 2 * k] = t[(r, c)].im;
    }
    Ok(params)
}

fn cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 {
            return Err(Error::NotPositive { min_eigenvalue: diag });
        }
        let d = diag.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Per-event negative log-likelihood of the nine-setting counts.
pub struct NegLogLikelihood {
    terms: Vec<(ComplexMatrix, f64)>,
    total: f64,
}

impl NegLogLikelihood {
    pub fn new(settings: &[SettingOutcome]) -> Result<Self> {
        let selected = select_settings(settings, &Setting::ALL)?;
        let mut terms = Vec::with_capacity(36);
        let mut total = 0.0;
        for outcome in selected {
            if outcome.total() == 0 {
                return Err(Error::ZeroTotal {
                    setting: outcome.setting.label(),
                });
            }
            for (proj, &count) in outcome.setting.projectors().into_iter().zip(&outcome.counts) {
                if count > 0 {
                    terms.push((proj, count as f64));
                    total += count as f64;
                }
            }
        }
        Ok(NegLogLikelihood { terms, total })
    }

    /// `Σ n_k log p_k` over all outcomes (not normalized).
    pub fn log_likelihood(&self, rho: &DensityMatrix) -> f64 {
        -self.total * self.value_of_state(rho.matrix())
    }

    fn value_of_state(&self, rho: &ComplexMatrix) -> f64 {
        let mut acc = 0.0;
        for (proj, n) in &self.terms {
            let p = rho.trace_product(proj).expect("4x4").re;
            acc -= n * p.max(PROBABILITY_FLOOR).ln();
        }
        acc / self.total
    }

    pub fn value(&self, params: &[f64; N_PARAMS]) -> f64 {
        self.value_of_state(state_from_params(params).matrix())
    }

    pub fn value_and_gradient(&self, params: &[f64; N_PARAMS]) -> (f64, [f64; N_PARAMS]) {
        let t = t_matrix(params);
        let a = &t.adjoint() * &t;
        let trace = a.trace().re;
        let rho = a.scale_real(1.0 / trace);

        // G = dL/dρ = −(1/N) Σ n_k/p_k Π_k
        let mut value = 0.0;
        let mut g = ComplexMatrix::zeros(4);
        for (proj, n) in &self.terms {
            let p = rho.trace_product(proj).expect("4x4").re;
            value -= n * p.max(PROBABILITY_FLOOR).ln();
            if p > PROBABILITY_FLOOR {
                g = &g + &proj.scale_real(-n / (p * self.total));
            }
        }
        value /= self.total;

        // dL = 2 Re Tr(Q dT) with Q = (G − Tr(Gρ) I) T† / Tr(T†T).
        let c = g.trace_product(&rho).expect("4x4").re;
        let shifted = &g - &ComplexMatrix::identity(4).scale_real(c);
        let q = (&shifted * &t.adjoint()).scale_real(1.0 / trace);
        let mut grad = [0.0; N_PARAMS];
        for i in 0..4 {
            grad[i] = 2.0 * q[(i, i)].re;
        }
        for (k, &(r, col)) in OFF_DIAGONAL.iter().enumerate() {
            grad[4 + 2 * k] = 2.0 * q[(col, r)].re;
            grad[5 + 2 * k] = -2.0 * q[(col, r)].im;
        }
        (value, grad)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Minimum {
    x: [f64; N_PARAMS],
    gradient_norm: f64,
    iterations: usize,
}

/// L-BFGS with Armijo backtracking.
fn minimize(
    objective: &NegLogLikelihood,
    start: [f64; N_PARAMS],
    max_iterations: usize,
    tolerance: f64,
) -> Minimum {
    let mut x = start;
    let (mut f, mut g) = objective.value_and_gradient(&x);
    let mut history: Vec<([f64; N_PARAMS], [f64; N_PARAMS], f64)> = Vec::with_capacity(LBFGS_MEMORY);
    let mut iterations = 0;

    while iterations < max_iterations && max_norm(&g) >= tolerance {
        iterations += 1;

        // Two-loop recursion for d = −H g.
        let mut d = g;
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for i in 0..N_PARAMS {
                d[i] -= a * y[i];
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for i in 0..N_PARAMS {
                d[i] += (a - b) * s[i];
            }
        }
        d.iter_mut().for_each(|v| *v = -*v);

        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.map(|v| -v);
            slope = dot(&g, &d);
        }

        let mut step = if history.is_empty() { 1.0 / max_norm(&g).max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = x;
            for i in 0..N_PARAMS {
                trial[i] += step * d[i];
            }
            let (ft, gt) = objective.value_and_gradient(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if history.is_empty() {
                // No descent possible even along −g: numerical floor reached.
                break;
            }
            history.clear();
            continue;
        };

        let mut s = [0.0; N_PARAMS];
        let mut y = [0.0; N_PARAMS];
        for i in 0..N_PARAMS {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == LBFGS_MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    let _ = f;
    Minimum {
        x,
        gradient_norm: max_norm(&g),
        iterations,
    }
}

/// Optimizer diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub iterations: usize,
    pub gradient_norm: f64,
    /// `Σ n log p` at the optimum.
    pub log_likelihood: f64,
    /// `Σ n log p` at the spectrum-clipped linear-inversion estimate.
    pub linear_log_likelihood: f64,
}

/// Reconstruction of a two-qubit state from nine-setting counts.
#[derive(Clone, Debug)]
pub struct TomographyResult {
    /// Correlations estimated directly from the counts.
    pub correlations: PauliTable,
    /// Bootstrap standard errors of `correlations`.
    pub stderr: PauliTable,
    /// Maximum-likelihood state.
    pub rho: DensityMatrix,
    pub concurrence: f64,
    /// `λ₁ − λ₂ − λ₃ − λ₄` before clamping at zero.
    pub concurrence_argument: f64,
    pub linear: LinearInversion,
    pub fit: MleFit,
}

/// Maximum-likelihood reconstruction with bootstrap error bars.
///
/// Starts from the linear-inversion estimate projected onto the physical
/// states (with a small white admixture to make it full rank) and runs
/// L-BFGS until the gradient max-norm is below `gradient_tolerance`.
pub fn mle_reconstruct(settings: &[SettingOutcome], options: &MleOptions) -> Result<TomographyResult> {
    let objective = NegLogLikelihood::new(settings)?;
    let correlations = correlations_from_counts(settings)?;
    let linear = linear_inversion(&correlations)?;
    let projected = project_to_physical(&linear.matrix)?;
    let start = params_from_state(&mix_white(&projected, INIT_MIXING)?)?;

    let min = minimize(&objective, start, options.max_iterations, options.gradient_tolerance);
    if min.gradient_norm >= options.gradient_tolerance {
        return Err(Error::NonConvergence {
            iterations: min.iterations,
            gradient_norm: min.gradient_norm,
        });
    }
    let rho = state_from_params(&min.x);
    let fit = MleFit {
        iterations: min.iterations,
        gradient_norm: min.gradient_norm,
        log_likelihood: objective.log_likelihood(&rho),
        linear_log_likelihood: objective.log_likelihood(&projected),
    };
    let stderr = bootstrap_stderr(settings, options.bootstrap_resamples, options.seed)?;
    Ok(TomographyResult {
        correlations,
        stderr,
        concurrence: concurrence(&rho)?,
        concurrence_argument: concurrence_argument(&rho)?,
        rho,
        linear,
        fit,
    })
}

/// Standard deviation of the count-based correlations over multinomial
/// resamples of each setting. Replica `r` draws from the stream
/// `bootstrap/r`, so the result does not depend on scheduling.
pub(crate) fn bootstrap_stderr(settings: &[SettingOutcome], resamples: usize, seed: u64) -> Result<PauliTable> {
    if resamples < 2 {
        return Ok(PauliTable::zeros());
    }
    let selected: Vec<SettingOutcome> = select_settings(settings, &Setting::ALL)?.into_iter().copied().collect();
    let freqs = selected.iter().map(|s| s.frequencies()).collect::<Result<Vec<_>>>()?;

    let replicas: Vec<PauliTable> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, &format!("bootstrap/{r}"));
            let resampled: Vec<SettingOutcome> = selected
                .iter()
                .zip(&freqs)
                .map(|(s, f)| SettingOutcome {
                    setting: s.setting,
                    counts: multinomial(&mut rng, s.total(), f),
                })
                .collect();
            correlations_from_counts(&resampled)
        })
        .collect::<Result<_>>()?;

    let n = replicas.len() as f64;
    let mut out = PauliTable::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mean = replicas.iter().map(|t| t.values[i][j]).sum::<f64>() / n;
            let var = replicas.iter().map(|t| (t.values[i][j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            out.values[i][j] = var.sqrt();
        }
    }
    Ok(out)
}
