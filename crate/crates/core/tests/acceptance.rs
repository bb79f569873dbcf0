//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with a custom harness so the lines come out in order and
//! unbuffered. The process fails if any criterion fails.

use std::panic;
use std::time::{Duration, Instant};

use swapchain::analysis::{
    concurrence, correlations_from_counts, fidelity, mle_reconstruct, pauli_expectations, witness_value, MleOptions,
    NegLogLikelihood, Setting, N_PARAMS,
};
use swapchain::experiment::{
    preset, run, run_preset, simulate_counts, sweep, ExperimentPreset, SweepParameter, PRESET_NAMES,
};
use swapchain::hilbert::{random, DensityMatrix, QubitRegister};
use swapchain::noise::werner;
use swapchain::protocol::{
    outcome_bookkeeping, run_chain, run_chain_full, standard_specs, DetectorPattern, Herald, Stage,
};
use swapchain::states::{bell, bell_coefficients, chain_initial, BellKind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn singlet_sources(n: usize) -> Vec<DensityMatrix> {
    vec![bell(BellKind::PsiMinus).to_density(); n]
}

fn c1_ideal_chain() -> Outcome {
    let start = Instant::now();
    let specs = standard_specs(DetectorPattern::PLUS_PLUS, &[1.0, 1.0]);
    let r = run_chain(3, &specs, &[0.0; 3]).map_err(err)?;
    let elapsed = start.elapsed();
    let target = bell(BellKind::PsiMinus).relabeled(&[1, 6]).map_err(err)?;
    let f = r.final_state.fidelity_with(&target).map_err(err)?;
    check(f >= 1.0 - 1e-10, format!("fidelity {f}"))?;
    check(
        (r.success_probability - 1.0 / 64.0).abs() < 1e-12,
        format!("success {}", r.success_probability),
    )?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "fidelity 1-{:.1e}, success {} (1/64), {:.1?}",
        1.0 - f,
        r.success_probability,
        elapsed
    ))
}

fn sign_pattern(got: [num_complex::Complex64; 4], want: [f64; 4]) -> Result<(), String> {
    // Fix the global phase on the first nonzero entry.
    let k = want.iter().position(|w| *w != 0.0).expect("nonzero entry");
    let phase = got[k] / want[k];
    check((phase.norm() - 1.0).abs() < 1e-12, format!("entry {k} magnitude {}", got[k].norm()))?;
    for (g, w) in got.iter().zip(want) {
        check((g / phase - w).norm() < 1e-12, format!("got {got:?}, want {want:?}"))?;
    }
    Ok(())
}

fn c2_expansions() -> Outcome {
    use BellKind::*;
    let two = chain_initial(2).map_err(err)?;
    let t = bell_coefficients(&two.pure, ((1, 4), (2, 3))).map_err(err)?;
    let diagonal = [PsiPlus, PsiMinus, PhiPlus, PhiMinus].map(|k| t.get(k, k));
    sign_pattern(diagonal, [0.5, -0.5, -0.5, 0.5])?;
    check((t.total_weight() - 1.0).abs() < 1e-12, "Eq. 2 weight")?;

    let three = chain_initial(3).map_err(err)?;
    let (after, p) = three.pure.project(&[2, 3], &PhiPlus.amplitudes()).map_err(err)?;
    check((p - 0.25).abs() < 1e-12, format!("first BSM probability {p}"))?;
    let t = bell_coefficients(&after, ((1, 6), (4, 5))).map_err(err)?;
    let entries = [(PsiPlus, PhiMinus), (PsiMinus, PhiPlus), (PhiPlus, PsiMinus), (PhiMinus, PsiPlus)]
        .map(|(a, b)| t.get(a, b));
    sign_pattern(entries, [0.5, 0.5, -0.5, -0.5])?;
    check((t.total_weight() - 1.0).abs() < 1e-12, "Eq. 3 weight")?;
    Ok("(14)(23) signs (+,-,-,+); after Phi+_23, (16)(45) signs (+,+,-,-)".into())
}

fn c3_witness_endpoints() -> Outcome {
    let singlet = witness_value(&bell(BellKind::PsiMinus).to_density()).map_err(err)?;
    let mixed = witness_value(&DensityMatrix::maximally_mixed(QubitRegister::sequential(1, 2))).map_err(err)?;
    check((singlet + 0.5).abs() < 1e-12, format!("singlet {singlet}"))?;
    check((mixed - 0.25).abs() < 1e-12, format!("I/4 {mixed}"))?;
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let w = witness_value(&werner(p).map_err(err)?).map_err(err)?;
        check((w - (0.25 - 0.75 * p)).abs() < 1e-12, format!("werner p={p}: {w}"))?;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if witness_value(&werner(mid).map_err(err)?).map_err(err)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    check((crossing - 1.0 / 3.0).abs() < 1e-9, format!("crossing {crossing}"))?;
    Ok(format!("singlet {singlet}, I/4 {mixed}, werner zero at {crossing:.12}"))
}

fn dense_witness(v1: f64, v2: f64) -> Result<f64, String> {
    let stages: Vec<Stage> = standard_specs(DetectorPattern::PLUS_PLUS, &[v1, v2])
        .into_iter()
        .map(Stage::from)
        .collect();
    let r = run_chain_full(&singlet_sources(3), &stages).map_err(err)?;
    witness_value(&r.final_state).map_err(err)
}

fn c4_visibility_law() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let rows = sweep(SweepParameter::Visibility, &grid, &preset("ideal").map_err(err)?).map_err(err)?;
    let mut worst = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let v = grid[i];
        let dense = dense_witness(v, v)?;
        worst = worst.max((row.witness - dense).abs()).max((dense + v * v / 2.0).abs());
        // Independent visibilities: pair V₁ with the mirrored grid value.
        let v2 = grid[20 - i];
        worst = worst.max((dense_witness(v, v2)? + v * v2 / 2.0).abs());
    }
    check(worst < 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("21 shared and 21 independent (V1,V2) points, max deviation {worst:.1e}"))
}

fn c5_paper_reproduction() -> Outcome {
    let start = Instant::now();
    let base = preset("paper").map_err(err)?;
    let mut values = Vec::new();
    let mut stderrs = Vec::new();
    for seed in 0..100 {
        let r = run(&ExperimentPreset { seed, ..base.clone() }).map_err(err)?;
        values.push(r.witness.value);
        stderrs.push(r.witness.stderr);
    }
    let elapsed = start.elapsed();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = stderrs.iter().fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    let mean_stderr = stderrs.iter().sum::<f64>() / stderrs.len() as f64;
    check((-0.19..=-0.13).contains(&mean), format!("mean witness {mean}"))?;
    check(lo >= 0.02 && hi <= 0.05, format!("stderr range [{lo}, {hi}]"))?;
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "mean {mean:.4}, stderr mean {mean_stderr:.4} range [{lo:.4}, {hi:.4}], {elapsed:.1?}"
    ))
}

fn c6_pre_swap() -> Outcome {
    let r = run_preset("pre-swap").map_err(err)?;
    let tomo = r.tomography.as_ref().ok_or("no tomography")?;
    check(tomo.concurrence == 0.0, format!("concurrence {}", tomo.concurrence))?;
    check((r.witness_model - 0.25).abs() < 1e-12, format!("analytic witness {}", r.witness_model))?;
    let ii = tomo.correlations.iter().find(|c| c.label == "II").ok_or("no II")?;
    check(ii.value == 1.0, "II != 1")?;
    Ok(format!(
        "MLE concurrence {} (argument {:.3}), analytic witness {}, sampled {:.3} +- {:.3}",
        tomo.concurrence, tomo.concurrence_argument, r.witness_model, r.witness.value, r.witness.stderr
    ))
}

fn c7_tomography_round_trip() -> Outcome {
    let n = 100_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(7_000);
    let mut fidelities = Vec::new();
    let mut worst_sigma = 0.0f64;
    let options = MleOptions {
        bootstrap_resamples: 0,
        ..MleOptions::default()
    };
    for k in 0..100u64 {
        let truth = random::density_matrix(2, &mut rng);
        let data = Setting::ALL
            .iter()
            .map(|&s| simulate_counts(&truth, s, n, 0.0, 1000 + k))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let fit = mle_reconstruct(&data, &options).map_err(err)?;
        fidelities.push(fidelity(&truth, &fit.rho).map_err(err)?);

        let exact = pauli_expectations(&truth).map_err(err)?;
        let est = correlations_from_counts(&data).map_err(err)?;
        for i in 0..4 {
            for j in 0..4 {
                if i == 0 && j == 0 {
                    continue;
                }
                let t = exact.values[i][j];
                let events = if i == 0 || j == 0 { 3 * n } else { n };
                let sigma = ((1.0 - t * t).max(1e-12) / events as f64).sqrt();
                worst_sigma = worst_sigma.max((est.values[i][j] - t).abs() / sigma);
            }
        }
    }
    fidelities.sort_by(f64::total_cmp);
    let median = 0.5 * (fidelities[49] + fidelities[50]);
    check(median >= 0.99, format!("median fidelity {median}"))?;
    check(worst_sigma <= 5.0, format!("worst correlation deviation {worst_sigma} sigma"))?;
    Ok(format!(
        "median fidelity {median:.5} (min {:.5}), worst correlation {worst_sigma:.2} sigma",
        fidelities[0]
    ))
}

fn c8_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8_000);
    let truth = random::density_matrix(2, &mut rng);
    let data = Setting::ALL
        .iter()
        .map(|&s| simulate_counts(&truth, s, 5_000, 0.0, 8))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let nll = NegLogLikelihood::new(&data).map_err(err)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: [f64; N_PARAMS] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let (_, g) = nll.value_and_gradient(&x);
        let h = 1e-6;
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..N_PARAMS {
            let (mut up, mut down) = (x, x);
            up[i] += h;
            down[i] -= h;
            let fd = (nll.value(&up) - nll.value(&down)) / (2.0 * h);
            diff += (fd - g[i]).powi(2);
            norm += g[i] * g[i];
        }
        worst = worst.max((diff / norm).sqrt());
    }
    check(worst < 1e-5, format!("relative error {worst:e}"))?;
    Ok(format!("20 points, max relative error {worst:.1e}"))
}

fn c9_concurrence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9_000);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let psi = random::pure_state(2, &mut rng);
        let a = psi.amplitudes();
        let expected = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
        worst = worst.max((concurrence(&psi.to_density()).map_err(err)? - expected).abs());
    }
    for p in [0.0, 0.25, 1.0 / 3.0, 0.6, 1.0] {
        let c = concurrence(&werner(p).map_err(err)?).map_err(err)?;
        worst = worst.max((c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs());
    }
    check(worst < 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("1000 pure states and 5 Werner points, max deviation {worst:.1e}"))
}

fn c10_bookkeeping() -> Outcome {
    let mut checked = 0;
    for n in 2..=4usize {
        let stages = n - 1;
        for code in 0..4usize.pow(stages as u32) {
            let outcomes: Vec<BellKind> = (0..stages).map(|k| BellKind::ALL[(code >> (2 * k)) & 3]).collect();
            let plan: Vec<Stage> = outcomes
                .iter()
                .enumerate()
                .map(|(k, &kind)| Stage {
                    photons: (2 * k + 2, 2 * k + 3),
                    herald: Herald::Bell(kind),
                })
                .collect();
            let r = run_chain_full(&singlet_sources(n), &plan).map_err(err)?;
            let predicted = outcome_bookkeeping(n, &outcomes).map_err(err)?;
            let target = bell(predicted).relabeled(&[1, 2 * n]).map_err(err)?;
            let f = r.final_state.fidelity_with(&target).map_err(err)?;
            check(f > 1.0 - 1e-10, format!("n={n} outcomes {outcomes:?}: fidelity {f} with {predicted}"))?;
            let p = 0.25f64.powi(stages as i32);
            check((r.success_probability - p).abs() < 1e-12, format!("n={n}: probability {}", r.success_probability))?;
            checked += 1;
        }
    }
    let mut witnesses = Vec::new();
    for n in 2..=5usize {
        let p = ExperimentPreset {
            n_pairs: n,
            ..preset("ideal").map_err(err)?
        };
        let w = run(&p).map_err(err)?.witness.value;
        check((w + 0.5).abs() < 1e-12, format!("ideal witness at n={n}: {w}"))?;
        witnesses.push(w);
    }
    Ok(format!("{checked} outcome tuples (n=2,3,4) match; ideal witness {witnesses:?} for n=2..5"))
}

fn c11_determinism() -> Outcome {
    let mut sizes = Vec::new();
    for name in PRESET_NAMES {
        for seed in [0, 7] {
            let p = ExperimentPreset {
                seed,
                ..preset(name).map_err(err)?
            };
            let a = serde_json::to_string(&run(&p).map_err(err)?).map_err(err)?;
            let b = serde_json::to_string(&run(&p).map_err(err)?).map_err(err)?;
            check(a == b, format!("{name} seed {seed}: reports differ"))?;
            let embedded: serde_json::Value = serde_json::from_str(&a).map_err(err)?;
            let replay: ExperimentPreset = serde_json::from_value(embedded["preset"].clone()).map_err(err)?;
            let c = serde_json::to_string(&run(&replay).map_err(err)?).map_err(err)?;
            check(a == c, format!("{name} seed {seed}: embedded preset does not replay"))?;
            sizes.push(a.len());
        }
    }
    Ok(format!("3 presets x 2 seeds byte-identical, embedded presets replay ({sizes:?} bytes)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("ideal two-stage swap", c1_ideal_chain),
        ("Bell-basis expansions before and after the first BSM", c2_expansions),
        ("witness endpoints and Werner law", c3_witness_endpoints),
        ("visibility law -V1V2/2", c4_visibility_law),
        ("paper reproduction over 100 seeds", c5_paper_reproduction),
        ("pre-swap concurrence and witness", c6_pre_swap),
        ("tomography round trip", c7_tomography_round_trip),
        ("MLE gradient vs finite differences", c8_gradient),
        ("concurrence oracles", c9_concurrence),
        ("bookkeeping exhaustiveness", c10_bookkeeping),
        ("determinism", c11_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
