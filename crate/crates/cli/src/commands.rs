use std::path::Path;

use betalab::correction::{default_distance, logq_expansion, polynomial_correction_with, DEFAULT_NODES};
use betalab::equilibrium::EquilibriumMeasure;
use betalab::orthopoly::{stojanovic_identity, KernelKind, KernelMatrices, KernelWorkspace};
use betalab::sampler::{
    empirical_stieltjes, exact_partition, linear_statistic, loop_residual, run_chains, EnsembleConfig, RunParams,
    MAX_EXACT_N,
};
use betalab::universality::{matrix_kernel, rescaled_matrix_kernel, square_grid, DERIVATIVE_STEP};
use betalab::{Error, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{CliError, Output};

type Outcome = Result<Value, CliError>;

fn measure(cfg: &RunConfig) -> Result<EquilibriumMeasure, CliError> {
    Ok(EquilibriumMeasure::new(&cfg.potential()?)?)
}

/// Builds the measure and refuses to continue when C1–C3 fail.
fn validated_measure(cfg: &RunConfig) -> Result<EquilibriumMeasure, CliError> {
    let eq = measure(cfg)?;
    let report = eq.validate();
    if !report.passed {
        let message = report
            .violations
            .iter()
            .map(|v| format!("{} violated: {}", v.condition, v.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Validation { message, detail: serde_json::to_value(&report).unwrap_or(Value::Null) });
    }
    Ok(eq)
}

fn distance(cfg: &RunConfig, eq: &EquilibriumMeasure) -> f64 {
    cfg.d.unwrap_or_else(|| default_distance(eq))
}

#[derive(Serialize)]
struct DensityRow {
    lambda: f64,
    rho: f64,
}

pub fn equilibrium(cfg: &RunConfig, out: Option<&Output>) -> Outcome {
    let eq = validated_measure(cfg)?;
    let validation = eq.validate();
    let (a, b) = eq.support;
    let rows: Vec<DensityRow> = (0..cfg.table_points)
        .map(|i| {
            let t = if cfg.table_points > 1 { i as f64 / (cfg.table_points - 1) as f64 } else { 0.5 };
            let lambda = a + (b - a) * t;
            DensityRow { lambda, rho: eq.density_original(lambda) }
        })
        .collect();
    let table = match out {
        Some(o) => Some(o.csv("equilibrium_density.csv", &rows)?),
        None => None,
    };
    Ok(json!({
        "a": a,
        "b": b,
        "p_coeffs": eq.p.coeffs(),
        "standard_potential": eq.potential.coeffs(),
        "shift": eq.map.shift,
        "scale": eq.map.scale,
        "d_max": if eq.d_max.is_finite() { json!(eq.d_max) } else { json!(null) },
        "energy": eq.energy(),
        "normalization": eq.normalization,
        "validation": validation,
        "density_table": table,
    }))
}

pub fn correction(cfg: &RunConfig) -> Outcome {
    let eq = validated_measure(cfg)?;
    let f = cfg.test_function()?;
    let d = distance(cfg, &eq);
    let report = polynomial_correction_with(&eq, &f, cfg.beta, d, cfg.nodes.unwrap_or(DEFAULT_NODES))?;
    let mean = eq.integrate_original(|x| f.eval(x));
    Ok(json!({
        "prefactor": report.prefactor,
        "integral_value": report.integral_value,
        "integral_imag": report.integral_imag,
        "predicted_shift": report.predicted_shift,
        "d": report.d,
        "N": report.nodes,
        "doubling_change": report.doubling_change,
        "mean_f": mean,
        "leading_term": cfg.n as f64 * mean,
    }))
}

pub fn logq(cfg: &RunConfig) -> Outcome {
    let eq = validated_measure(cfg)?;
    let d = distance(cfg, &eq);
    let report = logq_expansion(&eq, cfg.n, cfg.beta, d)?;
    let exact = if cfg.n <= MAX_EXACT_N {
        Some(exact_partition(&EnsembleConfig::new(cfg.n, cfg.beta, cfg.potential()?))?)
    } else {
        None
    };
    let mut value = serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
    value["exact_log_q"] = json!(exact);
    value["exact_difference"] = json!(exact.map(|e| report.log_q - e));
    Ok(value)
}

fn z_points(cfg: &RunConfig) -> Vec<Complex64> {
    cfg.z_points.iter().map(|z| Complex64::new(z[0], z[1])).collect()
}

pub fn sample(cfg: &RunConfig, out: Option<&Output>) -> Outcome {
    let eq = validated_measure(cfg)?;
    let ens = EnsembleConfig::new(cfg.n, cfg.beta, cfg.potential()?).with_epsilon(cfg.epsilon);
    let params = RunParams { chains: cfg.chains, steps: cfg.steps, burnin: cfg.burnin, seed: cfg.seed, thin: cfg.thin };
    let batch = run_chains(&ens, &params)?;
    let f = cfg.test_function()?;
    let stat = linear_statistic(&batch, |x| f.eval(x));
    let n = cfg.n as f64;
    let mean_f = eq.integrate_original(|x| f.eval(x));
    let shift = n * (stat.mean / n - mean_f);
    let predicted = polynomial_correction_with(&eq, &f, cfg.beta, distance(cfg, &eq), cfg.nodes.unwrap_or(DEFAULT_NODES))
        .map(|r| r.predicted_shift)
        .ok();
    let zs = z_points(cfg);
    let stieltjes = empirical_stieltjes(&batch, &eq, &zs)?;
    let residuals = loop_residual(&batch, &zs)?;
    let samples = match out {
        Some(o) if cfg.save_samples => {
            let per_chain = batch.len() / cfg.chains.max(1);
            let rows: Vec<Vec<f64>> = batch
                .configurations()
                .enumerate()
                .map(|(i, c)| {
                    let mut row = vec![(i / per_chain.max(1)) as f64, (i % per_chain.max(1)) as f64];
                    row.extend_from_slice(c);
                    row
                })
                .collect();
            let mut header = vec!["chain".to_string(), "draw".to_string()];
            header.extend((0..cfg.n).map(|i| format!("x{i}")));
            Some(o.table("samples.csv", &header, &rows)?)
        }
        _ => None,
    };
    Ok(json!({
        "estimates": {
            "linear_statistic": stat,
            "mean_f": mean_f,
            "observed_shift": shift,
            "observed_shift_stderr": stat.stderr,
            "predicted_shift": predicted,
            "stieltjes": stieltjes,
            "loop_residual": residuals,
        },
        "acceptance": batch.acceptance_rate,
        "chains": batch.chains,
        "domain": batch.domain,
        "seeds": { "seed": cfg.seed, "streams": (1..=cfg.chains).collect::<Vec<_>>() },
        "samples": samples,
    }))
}

#[derive(Deserialize)]
struct PointRow {
    lambda: f64,
    mu: f64,
}

#[derive(Serialize)]
struct KernelRow {
    lambda: f64,
    mu: f64,
    s11: f64,
    s12: f64,
    s21: f64,
    s22: f64,
}

fn read_points(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    reader
        .deserialize::<PointRow>()
        .map(|r| r.map(|p| (p.lambda, p.mu)).map_err(|e| CliError::Parse(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn kernel(cfg: &RunConfig, out: Option<&Output>) -> Outcome {
    let kind = KernelKind::from_beta(cfg.integer_beta()?)?;
    let p = cfg.potential()?;
    let ws = KernelWorkspace::new(&p, cfg.n)?;
    let structural = ws.check()?;
    let k = KernelMatrices::new(&ws, kind)?;
    let points = match &cfg.points {
        Some(path) => read_points(path)?,
        None => square_grid(5, 1.0),
    };
    let rows: Vec<KernelRow> = points
        .iter()
        .map(|&(lambda, mu)| {
            let (m, _) = matrix_kernel(&ws, &k, lambda, mu, DERIVATIVE_STEP / ws.n as f64);
            KernelRow { lambda, mu, s11: m[0][0], s12: m[0][1], s21: m[1][0], s22: m[1][1] }
        })
        .collect();
    let table = match out {
        Some(o) => Some(o.csv("kernel.csv", &rows)?),
        None => None,
    };
    Ok(json!({
        "beta": kind.beta(),
        "n": ws.n,
        "points": rows.len(),
        "structural": structural,
        "t_matrix": ws.t_matrix()?,
        "table": table,
    }))
}

#[derive(Serialize)]
struct UniversalityRow {
    xi: f64,
    eta: f64,
    v11: f64,
    v12: f64,
    v21: f64,
    v22: f64,
    l11: f64,
    l12: f64,
    l21: f64,
    l22: f64,
    deviation: f64,
}

pub fn universality(cfg: &RunConfig, out: Option<&Output>) -> Outcome {
    let kind = KernelKind::from_beta(cfg.integer_beta()?)?;
    let p = cfg.potential()?;
    let eq = validated_measure(cfg)?;
    let ws = KernelWorkspace::new(&p, cfg.n)?;
    let sample = rescaled_matrix_kernel(&ws, &eq, kind, cfg.lambda0, &square_grid(cfg.grid_size, cfg.grid_half_width))?;
    let rows: Vec<UniversalityRow> = sample
        .points
        .iter()
        .map(|pt| UniversalityRow {
            xi: pt.xi,
            eta: pt.eta,
            v11: pt.value[0][0],
            v12: pt.value[0][1],
            v21: pt.value[1][0],
            v22: pt.value[1][1],
            l11: pt.limit[0][0],
            l12: pt.limit[0][1],
            l21: pt.limit[1][0],
            l22: pt.limit[1][1],
            deviation: pt.deviation,
        })
        .collect();
    let table = match out {
        Some(o) => Some(o.csv("universality.csv", &rows)?),
        None => None,
    };
    Ok(json!({
        "beta": sample.beta,
        "n": sample.n,
        "lambda0": sample.lambda0,
        "density": sample.density,
        "q": sample.q,
        "grid_points": rows.len(),
        "sup_deviation": sample.sup_deviation,
        "max_shortcut_gap": sample.max_shortcut_gap,
        "table": table,
    }))
}

#[derive(Serialize)]
struct CheckItem {
    name: &'static str,
    value: f64,
    tolerance: f64,
    passed: bool,
}

fn item(name: &'static str, value: f64, tolerance: f64) -> CheckItem {
    CheckItem { name, value, tolerance, passed: value.abs() < tolerance }
}

fn gaussian_calibration(beta: f64) -> Result<f64, Error> {
    let eq = EquilibriumMeasure::gaussian();
    let r = polynomial_correction_with(&eq, &Polynomial::monomial(2, 1.0), beta, 0.5, DEFAULT_NODES)?;
    Ok(r.predicted_shift)
}

/// The invariant suite on the configured potential plus Gaussian calibrations.
pub fn check(cfg: &RunConfig) -> Outcome {
    let p = cfg.potential()?;
    let eq = validated_measure(cfg)?;
    let validation = eq.validate();
    let n = cfg.n + cfg.n % 2;
    let ws = KernelWorkspace::new(&p, n)?;
    let s = ws.structural_report();
    let t = ws.t_matrix()?;
    let items = vec![
        item("identity residual on L_d", validation.identity_residual, 1e-8),
        item("gram identity", s.gram, 1e-9),
        item("D skew-symmetry", s.d_skew, 1e-10),
        item("D band (exact zero)", s.d_band, f64::MIN_POSITIVE),
        item("M skew-symmetry", s.m_skew, 1e-10),
        item("D·M = I", s.dm_identity, 1e-7),
        item("ψ' expansion in D", s.derivative_expansion, 1e-6),
        item("reproducing property of K_n", s.reproducing, 1e-8),
        item("T_n constructions agree", t.difference, 1e-8),
        item("det(1-D12 M21) = det(1-D21 M12)", t.log_abs_det - t.log_abs_det_transposed, 1e-8),
        item("Gaussian β=1 shift of Σλ²", gaussian_calibration(1.0)? - 1.0, 1e-6),
        item("Gaussian β=4 shift of Σλ²", gaussian_calibration(4.0)? + 0.5, 1e-6),
        item("Gaussian β=2 shift of Σλ²", gaussian_calibration(2.0)?, 1e-12),
    ];
    let passed = items.iter().all(|i| i.passed);
    let detail = json!({ "n": n, "checks": items, "structural": s, "t_matrix": t });
    if !passed {
        let failed: Vec<&str> = items.iter().filter(|i| !i.passed).map(|i| i.name).collect();
        return Err(CliError::CheckFailed { message: format!("failed checks: {}", failed.join(", ")), detail });
    }
    Ok(detail)
}

pub fn check_stojanovic(cfg: &RunConfig) -> Outcome {
    let p = cfg.potential()?;
    let n = if cfg.n == 2 || cfg.n == 4 { cfg.n } else { 2 };
    let r = stojanovic_identity(&p, n)?;
    serde_json::to_value(&r).map_err(|e| CliError::Io(e.to_string()))
}
