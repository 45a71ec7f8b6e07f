//! The closed curve `{z : dist(z, [-2, 2]) = d}` with quadrature weights.
//!
//! The stadium is split into its four smooth pieces (two segments, two
//! semicircles) and each piece into panels carrying a Gauss–Legendre rule.
//! Every panel is analytic, so for integrands analytic in a neighbourhood of
//! the curve the error decays geometrically in the per-panel order.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Distance from `z` to the segment `[-2, 2]`.
pub fn dist_to_cut(z: Complex64) -> f64 {
    let dx = (z.re.abs() - 2.0).max(0.0);
    dx.hypot(z.im)
}

/// Counterclockwise stadium at distance `d` from `[-2, 2]`.
#[derive(Debug, Clone)]
pub struct Contour {
    pub d: f64,
    pub nodes: Vec<Complex64>,
    /// `dz` weights: `∮ f dz ≈ Σ weights[i]·f(nodes[i])`.
    pub weights: Vec<Complex64>,
    pub panels: usize,
    pub order: usize,
}

impl Contour {
    /// Builds the contour with about `n` nodes, using panels no longer than
    /// `resolution` (the distance from the curve to the nearest singularity
    /// of the intended integrand).
    pub fn new(d: f64, n: usize, resolution: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("contour distance d = {d} must be positive")));
        }
        let h = resolution.min(1.0).max(1e-3);
        let seg_panels = (4.0 / h).ceil() as usize;
        let arc_panels = ((PI * d) / h).ceil().max(2.0) as usize;
        let panels = 2 * (seg_panels + arc_panels);
        let order = (n.div_ceil(panels)).max(4);
        let (t, w) = gauss_legendre(order);

        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        let i = Complex64::new(0.0, 1.0);

        let segment = |from: Complex64, to: Complex64, count: usize, nodes: &mut Vec<Complex64>, weights: &mut Vec<Complex64>| {
            for p in 0..count {
                let a = from + (to - from) * (p as f64 / count as f64);
                let b = from + (to - from) * ((p + 1) as f64 / count as f64);
                let half = (b - a) * 0.5;
                let mid = (a + b) * 0.5;
                for (tk, wk) in t.iter().zip(&w) {
                    nodes.push(mid + half * *tk);
                    weights.push(half * *wk);
                }
            }
        };
        segment(Complex64::new(-2.0, -d), Complex64::new(2.0, -d), seg_panels, &mut nodes, &mut weights);
        let mut top = Vec::new();
        let mut top_w = Vec::new();
        segment(Complex64::new(2.0, d), Complex64::new(-2.0, d), seg_panels, &mut top, &mut top_w);

        let arc = |center: f64, from: f64, nodes: &mut Vec<Complex64>, weights: &mut Vec<Complex64>| {
            for p in 0..arc_panels {
                let a = from + PI * p as f64 / arc_panels as f64;
                let b = from + PI * (p + 1) as f64 / arc_panels as f64;
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (tk, wk) in t.iter().zip(&w) {
                    let phi = mid + half * tk;
                    let e = Complex64::from_polar(1.0, phi);
                    nodes.push(center + e * d);
                    weights.push(i * e * d * (half * wk));
                }
            }
        };
        arc(2.0, -0.5 * PI, &mut nodes, &mut weights);
        nodes.extend(top);
        weights.extend(top_w);
        arc(-2.0, 0.5 * PI, &mut nodes, &mut weights);

        Ok(Contour { d, nodes, weights, panels, order })
    }

    /// Contour for use around an equilibrium measure whose factor `P` has
    /// zeros no closer than `2·d_max` to the cut: requires `d < d_max / 2`.
    pub fn checked(d: f64, n: usize, resolution: f64, d_max: f64) -> Result<Self> {
        if d_max.is_finite() && d >= 0.5 * d_max {
            return Err(Error::ContourTooWide { d, limit: 0.5 * d_max });
        }
        Contour::new(d, n, resolution)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∮ f(z) dz`.
    pub fn integrate<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    /// `n` points equally spaced in arclength (for residual checks).
    pub fn sample_points(d: f64, n: usize) -> Vec<Complex64> {
        let perimeter = 8.0 + 2.0 * PI * d;
        (0..n)
            .map(|k| {
                let mut s = perimeter * (k as f64 + 0.5) / n as f64;
                if s < 4.0 {
                    return Complex64::new(-2.0 + s, -d);
                }
                s -= 4.0;
                if s < PI * d {
                    return 2.0 + Complex64::from_polar(d, -0.5 * PI + s / d);
                }
                s -= PI * d;
                if s < 4.0 {
                    return Complex64::new(2.0 - s, d);
                }
                s -= 4.0;
                -2.0 + Complex64::from_polar(d, 0.5 * PI + s / d)
            })
            .collect()
    }
}
