//! Bulk scaling limits of the kernels and their finite-`n` deviation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::orthopoly::{KernelKind, KernelMatrices, KernelWorkspace};
use crate::quadrature::gauss_legendre_on;

/// Smallest density accepted at the centring point.
pub const MIN_DENSITY: f64 = 1e-3;
/// Centred-difference step in units of `1/q_n`.
pub const DERIVATIVE_STEP: f64 = 1e-5;
const SHORTCUT_NODES: usize = 32;

/// `sin(πt)/(πt)`.
pub fn sine_kernel(t: f64) -> f64 {
    let x = PI * t;
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// `d/dt sin(πt)/(πt)`.
pub fn sine_kernel_derivative(t: f64) -> f64 {
    let x = PI * t;
    if x.abs() < 1e-3 {
        PI * (-x / 3.0 + x.powi(3) / 30.0)
    } else {
        PI * (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Sine integral `Si(x) = ∫_0^x sin t / t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax <= 4.0 {
        let mut term = ax;
        let mut sum = ax;
        let mut k = 0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            k += 1;
            let kf = k as f64;
            term *= -ax * ax / ((2.0 * kf) * (2.0 * kf + 1.0));
            sum += term / (2.0 * kf + 1.0);
        }
        sum
    } else if ax <= 100.0 {
        let panels = (ax / 2.0).ceil() as usize;
        let width = ax / panels as f64;
        (0..panels)
            .map(|p| {
                let (nodes, weights) = gauss_legendre_on(p as f64 * width, (p + 1) as f64 * width, 20);
                nodes.iter().zip(&weights).map(|(&t, &w)| w * t.sin() / t).sum::<f64>()
            })
            .sum()
    } else {
        // Si(x) = π/2 - f(x) cos x - g(x) sin x, asymptotic auxiliaries
        let inv2 = 1.0 / (ax * ax);
        let (mut f, mut g) = (0.0, 0.0);
        let (mut tf, mut tg) = (1.0 / ax, inv2);
        for k in 0..20 {
            f += tf;
            g += tg;
            let kf = k as f64;
            tf *= -(2.0 * kf + 1.0) * (2.0 * kf + 2.0) * inv2;
            tg *= -(2.0 * kf + 2.0) * (2.0 * kf + 3.0) * inv2;
        }
        0.5 * PI - f * ax.cos() - g * ax.sin()
    };
    value.copysign(x)
}

/// `ε(t) = sgn(t)/2`.
pub fn eps(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        0.5 * t.signum()
    }
}

/// `[[11, 12], [21, 22]]`.
pub type Matrix2 = [[f64; 2]; 2];

/// Limit kernel at `(ξ, η)`: the scalar case is returned in the 11 entry
/// with the other entries zero.
pub fn sine_limit(kind: KernelKind, xi: f64, eta: f64) -> Matrix2 {
    let t = xi - eta;
    match kind {
        KernelKind::Unitary => [[sine_kernel(t), 0.0], [0.0, 0.0]],
        KernelKind::Orthogonal | KernelKind::Symplectic => {
            let integral = sine_integral(PI * t) / PI;
            let jump = if kind == KernelKind::Orthogonal { eps(t) } else { 0.0 };
            [[sine_kernel(t), sine_kernel_derivative(t)], [integral - jump, sine_kernel(-t)]]
        }
    }
}

/// Conjugation by `A^{(q)} = diag(q^{-1/2}, q^{1/2})` followed by division by `q`.
pub fn conjugate(m: Matrix2, q: f64) -> Matrix2 {
    [[m[0][0] / q, m[0][1] / (q * q)], [m[1][0], m[1][1] / q]]
}

fn det2(m: &Matrix2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// One grid point of a rescaled kernel.
#[derive(Debug, Clone, Serialize)]
pub struct KernelPoint {
    pub xi: f64,
    pub eta: f64,
    pub value: Matrix2,
    pub limit: Matrix2,
    pub deviation: f64,
    /// `|(εS)(λ,μ) + ∫_λ^μ S(t,μ)dt|` before rescaling.
    pub shortcut_gap: f64,
}

/// Rescaled finite-`n` kernel on a `(ξ, η)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledSample {
    pub beta: u32,
    pub n: usize,
    pub lambda0: f64,
    pub density: f64,
    pub q: f64,
    pub points: Vec<KernelPoint>,
    pub sup_deviation: f64,
    pub max_shortcut_gap: f64,
}

/// Raw matrix kernel entries at `(λ, μ)`, with the 21 entry by direct
/// ε-convolution; the second value is `-∫_λ^μ S(t, μ) dt`.
pub fn matrix_kernel(ws: &KernelWorkspace, k: &KernelMatrices, lambda: f64, mu: f64, h: f64) -> (Matrix2, f64) {
    let s = |l: f64, m: f64| k.s(ws, l, m);
    let s11 = s(lambda, mu);
    if k.kind == KernelKind::Unitary {
        return ([[s11, 0.0], [0.0, 0.0]], 0.0);
    }
    let d12 = -(s(lambda, mu + h) - s(lambda, mu - h)) / (2.0 * h);
    let es = k.eps_s(ws, lambda, mu);
    let jump = if k.kind == KernelKind::Orthogonal { eps(lambda - mu) } else { 0.0 };
    let shortcut = if lambda == mu {
        0.0
    } else {
        let (nodes, weights) = gauss_legendre_on(lambda, mu, SHORTCUT_NODES);
        -nodes.iter().zip(&weights).map(|(&t, &w)| w * s(t, mu)).sum::<f64>()
    };
    ([[s11, d12], [es - jump, s(mu, lambda)]], shortcut - jump)
}

/// Evaluates `(1/q_n) K^{(q_n)}` at `(λ0 + ξ/q_n, λ0 + η/q_n)` for every grid pair.
pub fn rescaled_matrix_kernel(
    ws: &KernelWorkspace,
    eq: &EquilibriumMeasure,
    kind: KernelKind,
    lambda0: f64,
    grid: &[(f64, f64)],
) -> Result<RescaledSample> {
    let density = eq.density_original(lambda0);
    if !(density >= MIN_DENSITY) {
        return Err(Error::Domain(format!("ρ({lambda0}) = {density:.2e} is too close to an edge")));
    }
    let k = KernelMatrices::new(ws, kind)?;
    let q = ws.n as f64 * density;
    let h = DERIVATIVE_STEP / q;
    let points: Vec<KernelPoint> = grid
        .par_iter()
        .map(|&(xi, eta)| {
            let (lambda, mu) = (lambda0 + xi / q, lambda0 + eta / q);
            let (raw, shortcut21) = matrix_kernel(ws, &k, lambda, mu, h);
            let value = conjugate(raw, q);
            let limit = sine_limit(kind, xi, eta);
            let deviation = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| (value[i][j] - limit[i][j]).abs())
                .fold(0.0, f64::max);
            let shortcut_gap = if kind == KernelKind::Unitary { 0.0 } else { (shortcut21 - raw[1][0]).abs() };
            KernelPoint { xi, eta, value, limit, deviation, shortcut_gap }
        })
        .collect();
    let sup_deviation = points.iter().map(|p| p.deviation).fold(0.0, f64::max);
    let max_shortcut_gap = points.iter().map(|p| p.shortcut_gap).fold(0.0, f64::max);
    Ok(RescaledSample { beta: kind.beta(), n: ws.n, lambda0, density, q, points, sup_deviation, max_shortcut_gap })
}

/// `G×G` grid on `[-half, half]²`.
pub fn square_grid(size: usize, half: f64) -> Vec<(f64, f64)> {
    let coord = |i: usize| if size == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (size - 1) as f64 };
    (0..size).flat_map(|i| (0..size).map(move |j| (coord(i), coord(j)))).collect()
}

/// Deviation from the limit across `n`.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationTable {
    pub n: Vec<usize>,
    pub deviation: Vec<f64>,
    /// Least-squares slope of `ln deviation` against `ln n`.
    pub exponent: f64,
    pub strictly_decreasing: bool,
    /// Set when some deviation grows by more than a factor 2.
    pub flagged: bool,
}

pub fn bulk_deviation(samples: &[RescaledSample]) -> Result<DeviationTable> {
    if samples.len() < 3 {
        return Err(Error::Domain("need at least three values of n".into()));
    }
    let n: Vec<usize> = samples.iter().map(|s| s.n).collect();
    let deviation: Vec<f64> = samples.iter().map(|s| s.sup_deviation).collect();
    let xs: Vec<f64> = n.iter().map(|&v| (v as f64).ln()).collect();
    let ys: Vec<f64> = deviation.iter().map(|v| v.ln()).collect();
    let len = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / len, ys.iter().sum::<f64>() / len);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let strictly_decreasing = deviation.windows(2).all(|w| w[1] < w[0]);
    let flagged = deviation.windows(2).any(|w| w[1] > 2.0 * w[0]);
    Ok(DeviationTable { n, deviation, exponent: sxy / sxx, strictly_decreasing, flagged })
}

/// `det` of a rescaled entry and of the raw one agree (conjugation invariance).
pub fn determinant_ratio(raw: &Matrix2, q: f64) -> f64 {
    det2(&conjugate(*raw, q)) / (det2(raw) / (q * q))
}
