//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs without the libtest harness so the lines always reach stdout; the
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use betalab::correction::{logq_expansion, polynomial_correction, selberg_log_q0};
use betalab::equilibrium::EquilibriumMeasure;
use betalab::orthopoly::{stojanovic_identity, KernelKind, KernelWorkspace};
use betalab::sampler::{exact_partition, linear_statistic, run_chains, EnsembleConfig, RunParams};
use betalab::universality::{bulk_deviation, rescaled_matrix_kernel, square_grid};
use betalab::Polynomial;

// 1
const CALIBRATION_TOL: f64 = 1e-6;
const CALIBRATION_TIME: Duration = Duration::from_secs(1);
// 2
const MC_SIGMAS: f64 = 3.0;
const MC_MAX_STDERR: f64 = 0.1;
const MC_SWEEPS_PER_N: usize = 800;
const MC_SWEEP_BUDGET: usize = 10_000_000;
const MC_EPSILON: f64 = 1.0;
const MC_CHAINS: usize = 4;
// 3
const VARIANCE_SWEEPS: usize = 10_000;
const VARIANCE_RATIO: f64 = 2.0;
// 4
const SELBERG_TOL: f64 = 1e-6;
// 5
const LOGQ_EXACT_TOL: f64 = 1e-12;
const LOGQ_REMAINDER_BOUND: f64 = 0.1;
const LOGQ_GROWTH: f64 = 2.0;
// 6
const IDENTITY_TOL: f64 = 1e-8;
// 7
const STOJANOVIC_N2_TOL: f64 = 1e-6;
const STOJANOVIC_N4_TOL: f64 = 1e-4;
const STOJANOVIC_TIME: Duration = Duration::from_secs(60);
// 8
const TREND_FACTOR: f64 = 2.0;
// 9
const UNITARY_DEVIATION: f64 = 0.03;
const DEVIATION_EXPONENT: f64 = -0.4;
const UNIVERSALITY_TIME: Duration = Duration::from_secs(600);
// 10
const DM_TOL: f64 = 1e-7;
const SKEW_TOL: f64 = 1e-10;
const GRAM_TOL: f64 = 1e-9;
const REPRODUCING_TOL: f64 = 1e-8;

fn quartic() -> Polynomial {
    Polynomial::monomial(4, 1.0 / 12.0)
}

/// Contour distance for `λ⁴/12`: the zeros of `P` sit at `±i√2`, so `d` must stay below `√2/4`.
const QUARTIC_D: f64 = 0.3;
const GAUSSIAN_D: f64 = 0.5;

fn ratio(values: &[f64]) -> f64 {
    let max = values.iter().fold(f64::MIN, |a, &b| a.max(b.abs()));
    let min = values.iter().fold(f64::MAX, |a, &b| a.min(b.abs()));
    max / min
}

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

type Criterion = fn() -> Result<Outcome, betalab::Error>;

fn calibration() -> Result<Outcome, betalab::Error> {
    let start = Instant::now();
    let eq = EquilibriumMeasure::gaussian();
    let f = Polynomial::monomial(2, 1.0);
    let mut errs = Vec::new();
    // E Σλ² = (n-1) + 2/β for V = λ²/2 scaled by n, hence the shift 2/β - 1.
    for beta in [1.0, 2.0, 4.0] {
        let r = polynomial_correction(&eq, &f, beta, GAUSSIAN_D)?;
        errs.push((beta, r.predicted_shift, (r.predicted_shift - (2.0 / beta - 1.0)).abs()));
    }
    let elapsed = start.elapsed();
    let passed = errs[0].2 < CALIBRATION_TOL
        && errs[2].2 < CALIBRATION_TOL
        && errs[1].1 == 0.0
        && elapsed < CALIBRATION_TIME;
    let detail: Vec<String> = errs.iter().map(|(b, s, e)| format!("β={b}: {s:+.9} (err {e:.1e})")).collect();
    Ok(outcome(passed, format!("{}; {:.2}s", detail.join(", "), elapsed.as_secs_f64())))
}

fn monte_carlo_shift() -> Result<Outcome, betalab::Error> {
    let f = Polynomial::monomial(2, 1.0);
    let mut passed = true;
    let mut worst_z = 0.0f64;
    let mut worst_se = 0.0f64;
    let mut sweeps = 0;
    let mut seed = 100;
    for (name, v, d) in [("gaussian", Polynomial::gaussian(), GAUSSIAN_D), ("quartic", quartic(), QUARTIC_D)] {
        let eq = EquilibriumMeasure::new(&v)?;
        let mean_f = eq.integrate_original(|x| f.eval(x));
        for beta in [1.0, 4.0] {
            let predicted = polynomial_correction(&eq, &f, beta, d)?.predicted_shift;
            for n in [16, 32, 64] {
                seed += 1;
                let steps = MC_SWEEPS_PER_N * n;
                sweeps += steps * MC_CHAINS;
                let cfg = EnsembleConfig::new(n, beta, v.clone()).with_epsilon(MC_EPSILON);
                let batch = run_chains(&cfg, &RunParams { chains: MC_CHAINS, steps, burnin: None, seed, thin: 1 })?;
                let stat = linear_statistic(&batch, |x| f.eval(x));
                let observed = stat.mean - n as f64 * mean_f;
                let z = (observed - predicted).abs() / stat.stderr;
                println!(
                    "    {name} β={beta} n={n}: observed {observed:+.4} ± {:.4}, predicted {predicted:+.4}, z = {z:.2}",
                    stat.stderr
                );
                worst_z = worst_z.max(z);
                worst_se = worst_se.max(stat.stderr);
                passed &= z < MC_SIGMAS && stat.stderr < MC_MAX_STDERR;
            }
        }
    }
    passed &= sweeps <= MC_SWEEP_BUDGET;
    Ok(outcome(passed, format!("max |z| = {worst_z:.2} (< {MC_SIGMAS}), max stderr = {worst_se:.4}, {sweeps} sweeps")))
}

fn variance_bound() -> Result<Outcome, betalab::Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, v, beta) in [("gaussian", Polynomial::gaussian(), 2.0), ("quartic", quartic(), 1.0)] {
        let mut vars = Vec::new();
        for (i, n) in [16, 32, 64, 128].into_iter().enumerate() {
            let cfg = EnsembleConfig::new(n, beta, v.clone()).with_epsilon(MC_EPSILON);
            let params = RunParams { chains: MC_CHAINS, steps: VARIANCE_SWEEPS, burnin: None, seed: 500 + i as u64, thin: 1 };
            let batch = run_chains(&cfg, &params)?;
            vars.push(linear_statistic(&batch, |x| x * x).variance);
        }
        let r = ratio(&vars);
        passed &= r < VARIANCE_RATIO;
        let shown: Vec<String> = vars.iter().map(|v| format!("{v:.3}")).collect();
        parts.push(format!("{name} β={beta}: Var = [{}], ratio {r:.3}", shown.join(", ")));
    }
    Ok(outcome(passed, parts.join("; ")))
}

fn selberg() -> Result<Outcome, betalab::Error> {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for beta in [1.0, 2.0, 4.0] {
            let exact = exact_partition(&EnsembleConfig::new(n, beta, Polynomial::gaussian()))?;
            let closed = selberg_log_q0(n, beta)?;
            worst = worst.max(((exact - closed).exp_m1()).abs());
        }
    }
    let q22 = exact_partition(&EnsembleConfig::new(2, 2.0, Polynomial::gaussian()))?.exp();
    let q21 = exact_partition(&EnsembleConfig::new(2, 1.0, Polynomial::gaussian()))?.exp();
    let e22 = (q22 / PI - 1.0).abs();
    let e21 = (q21 / (4.0 * PI.sqrt()) - 1.0).abs();
    let passed = worst < SELBERG_TOL && e22 < SELBERG_TOL && e21 < SELBERG_TOL;
    Ok(outcome(
        passed,
        format!("max rel err {worst:.1e}; Q(2,2) = {q22:.10} (π, err {e22:.1e}); Q(2,1) = {q21:.10} (4√π, err {e21:.1e})"),
    ))
}

fn logq() -> Result<Outcome, betalab::Error> {
    let gauss = EquilibriumMeasure::gaussian();
    let mut at_reference = 0.0f64;
    for n in [2, 5, 20] {
        for beta in [1.0, 2.0, 4.0] {
            let r = logq_expansion(&gauss, n, beta, GAUSSIAN_D)?;
            at_reference = at_reference.max((r.log_q - selberg_log_q0(n, beta)?).abs());
        }
    }
    let eq = EquilibriumMeasure::new(&quartic())?;
    let unitary_term = logq_expansion(&eq, 8, 2.0, QUARTIC_D)?.correction_term;
    let mut diffs = Vec::new();
    for n in [2, 3] {
        let r = logq_expansion(&eq, n, 1.0, QUARTIC_D)?;
        let exact = exact_partition(&EnsembleConfig::new(n, 1.0, quartic()))?;
        diffs.push((r.log_q - exact).abs());
    }
    let passed = at_reference < LOGQ_EXACT_TOL
        && unitary_term == 0.0
        && diffs.iter().all(|&d| d < LOGQ_REMAINDER_BOUND)
        && diffs[1] <= LOGQ_GROWTH * diffs[0];
    Ok(outcome(
        passed,
        format!(
            "V₀: |expansion - log Q⁽⁰⁾| ≤ {at_reference:.1e}; β=2 1/n term = {unitary_term}; quartic β=1 remainder n=2: {:.4}, n=3: {:.4}",
            diffs[0], diffs[1]
        ),
    ))
}

fn identity() -> Result<Outcome, betalab::Error> {
    let g = EquilibriumMeasure::gaussian().validate();
    let q = EquilibriumMeasure::new(&quartic())?.validate();
    let passed = g.passed && q.passed && g.identity_residual < IDENTITY_TOL && q.identity_residual < IDENTITY_TOL;
    Ok(outcome(
        passed,
        format!("residual gaussian {:.1e}, quartic {:.1e} (< {IDENTITY_TOL:.0e})", g.identity_residual, q.identity_residual),
    ))
}

fn stojanovic() -> Result<Outcome, betalab::Error> {
    let start = Instant::now();
    let g = stojanovic_identity(&Polynomial::gaussian(), 2)?;
    let q = stojanovic_identity(&quartic(), 4)?;
    let elapsed = start.elapsed();
    let passed = g.relative_error < STOJANOVIC_N2_TOL && q.relative_error < STOJANOVIC_N4_TOL && elapsed < STOJANOVIC_TIME;
    Ok(outcome(
        passed,
        format!(
            "gaussian n=2 rel err {:.1e}, quartic n=4 rel err {:.1e} (det T = {:.6}); {:.1}s",
            g.relative_error,
            q.relative_error,
            q.det_t,
            elapsed.as_secs_f64()
        ),
    ))
}

fn lemma_trends() -> Result<Outcome, betalab::Error> {
    let p = quartic();
    let mut log_det = Vec::new();
    for n in (8..=40).step_by(4) {
        log_det.push(KernelWorkspace::new(&p, n)?.t_matrix()?.log_abs_det);
    }
    let xs: Vec<f64> = (0..61).map(|i| -1.5 + 0.05 * i as f64).collect();
    let (mut eps_n, mut eps_window, mut corner) = (Vec::new(), Vec::new(), Vec::new());
    for n in [20, 40, 80] {
        let ws = KernelWorkspace::new(&p, n)?;
        eps_n.push(ws.eps_psi_bound(&xs));
        eps_window.push(ws.eps_psi_window_bound(&xs));
        corner.push(ws.corner_m_bound());
    }
    let (r_det, r_n, r_w, r_c) = (ratio(&log_det), ratio(&eps_n), ratio(&eps_window), ratio(&corner));
    let passed = [r_det, r_n, r_w, r_c].iter().all(|&r| r < TREND_FACTOR);
    let show = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/");
    Ok(outcome(
        passed,
        format!(
            "log det T_n n=8..40 ratio {r_det:.3}; √n sup|εψ_n| {} ratio {r_n:.3}; √n sup|εψ_j| near n {} ratio {r_w:.3}; n|M| corner {} ratio {r_c:.3}",
            show(&eps_n),
            show(&eps_window),
            show(&corner)
        ),
    ))
}

fn universality() -> Result<Outcome, betalab::Error> {
    let start = Instant::now();
    let p = Polynomial::gaussian();
    let eq = EquilibriumMeasure::gaussian();
    let grid = square_grid(21, 2.0);
    let unitary = rescaled_matrix_kernel(&KernelWorkspace::new(&p, 80)?, &eq, KernelKind::Unitary, 0.0, &grid)?;
    let mut passed = unitary.sup_deviation < UNITARY_DEVIATION;
    let mut parts = vec![format!("β=2 n=80 sup dev {:.4}", unitary.sup_deviation)];
    for kind in [KernelKind::Orthogonal, KernelKind::Symplectic] {
        let mut samples = Vec::new();
        for n in [20, 40, 80] {
            samples.push(rescaled_matrix_kernel(&KernelWorkspace::new(&p, n)?, &eq, kind, 0.0, &grid)?);
        }
        let table = bulk_deviation(&samples)?;
        passed &= table.strictly_decreasing && table.exponent <= DEVIATION_EXPONENT;
        let devs: Vec<String> = table.deviation.iter().map(|d| format!("{d:.4}")).collect();
        parts.push(format!("β={} dev {} exponent {:.2}", kind.beta(), devs.join("/"), table.exponent));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < UNIVERSALITY_TIME;
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    Ok(outcome(passed, parts.join("; ")))
}

fn structural() -> Result<Outcome, betalab::Error> {
    let mut passed = true;
    let mut worst = [0.0f64; 5];
    for (p, n) in [(Polynomial::gaussian(), 16), (quartic(), 16), (quartic(), 40)] {
        let s = KernelWorkspace::new(&p, n)?.structural_report();
        passed &= s.dm_identity < DM_TOL
            && s.d_skew < SKEW_TOL
            && s.m_skew < SKEW_TOL
            && s.d_band == 0.0
            && s.gram < GRAM_TOL
            && s.reproducing < REPRODUCING_TOL;
        for (w, v) in worst.iter_mut().zip([s.dm_identity, s.d_skew.max(s.m_skew), s.d_band, s.gram, s.reproducing]) {
            *w = w.max(v);
        }
    }
    Ok(outcome(
        passed,
        format!(
            "D·M=I {:.1e}, skew {:.1e}, band {:e}, gram {:.1e}, reproducing {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("Gaussian calibration of the first-order shift", calibration),
        ("Monte Carlo shift against contour prediction", monte_carlo_shift),
        ("variance of Σλ² bounded in n", variance_bound),
        ("partition function against Selberg", selberg),
        ("log Q expansion", logq),
        ("identity 2g - V' on L_d", identity),
        ("β = 1, 2, 4 partition function identity", stojanovic),
        ("T_n, εψ and corner-M trends", lemma_trends),
        ("bulk universality", universality),
        ("structural invariants", structural),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, summary) = match run() {
            Ok(o) => (o.passed, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {summary} ({:.1}s)",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
