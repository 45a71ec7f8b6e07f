//! Quadrature rules used across the crate: Gauss–Legendre (single and
//! composite, with a spectral cumulative-integration matrix), first-kind
//! Gauss–Chebyshev in the angle variable, and adaptive Gauss–Kronrod.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0..=P_n` at `x`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    if n >= 1 {
        out[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
    out
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// First-kind Gauss–Chebyshev angles `θ_j = (j + ½)π/N`; with equal weights
/// `π/N` the rule integrates `∫₀^π F(cos θ) dθ` exactly for polynomial `F`
/// of degree below `2N`.
pub fn chebyshev_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

/// Composite Gauss–Legendre grid on `[a, b]` with equal panels.
#[derive(Debug, Clone)]
pub struct CompositeGrid {
    pub a: f64,
    pub b: f64,
    pub panels: usize,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    /// `cumulative[i][l] = ∫_{-1}^{t_i} ℓ_l(t) dt` on the reference panel.
    cumulative: Vec<Vec<f64>>,
}

impl CompositeGrid {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let left = a + p as f64 * h;
            for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(left + 0.5 * h * (t + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        let cumulative = cumulative_matrix(&ref_nodes, &ref_weights);
        CompositeGrid { a, b, panels, order, nodes, weights, ref_nodes, ref_weights, cumulative }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_width(&self) -> f64 {
        (self.b - self.a) / self.panels as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Integral over panel `p` from the nodal values on that panel.
    pub fn integrate_panel(&self, block: &[f64], p: usize) -> f64 {
        let q = self.order;
        block.iter().zip(&self.weights[p * q..(p + 1) * q]).map(|(v, w)| v * w).sum()
    }

    /// `∫_a^{x_i} f` at every grid node, from nodal values of a smooth `f`.
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        let q = self.order;
        let half = 0.5 * self.panel_width();
        let mut out = vec![0.0; values.len()];
        let mut running = 0.0;
        for p in 0..self.panels {
            let block = &values[p * q..(p + 1) * q];
            for i in 0..q {
                let partial: f64 = self.cumulative[i].iter().zip(block).map(|(c, v)| c * v).sum();
                out[p * q + i] = running + half * partial;
            }
            running += half * block.iter().zip(&self.ref_weights).map(|(v, w)| v * w).sum::<f64>();
        }
        out
    }

    /// Index of the panel containing `x` (clamped to the grid).
    pub fn panel_of(&self, x: f64) -> usize {
        let p = ((x - self.a) / self.panel_width()).floor();
        (p.max(0.0) as usize).min(self.panels - 1)
    }

    pub fn panel_left(&self, p: usize) -> f64 {
        self.a + p as f64 * self.panel_width()
    }

    /// Reference rule, for sub-panel integrals at arbitrary points.
    pub fn reference_rule(&self) -> (&[f64], &[f64]) {
        (&self.ref_nodes, &self.ref_weights)
    }
}

/// Spectral integration matrix on one reference panel: expand nodal values
/// in Legendre polynomials (exact under the Gauss rule) and integrate
/// `∫_{-1}^{t} P_k = (P_{k+1}(t) - P_{k-1}(t)) / (2k + 1)`.
fn cumulative_matrix(nodes: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let q = nodes.len();
    let legendre: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(q, x)).collect();
    // coefficient c_k = (2k+1)/2 Σ_l w_l P_k(x_l) f_l
    let mut antideriv = vec![vec![0.0; q]; q]; // antideriv[i][k] = ∫_{-1}^{t_i} P_k
    for (i, &t) in nodes.iter().enumerate() {
        let p = &legendre[i];
        antideriv[i][0] = t + 1.0;
        for k in 1..q {
            antideriv[i][k] = (p[k + 1] - p[k - 1]) / (2.0 * k as f64 + 1.0);
        }
    }
    let mut out = vec![vec![0.0; q]; q];
    for i in 0..q {
        for l in 0..q {
            let mut s = 0.0;
            for k in 0..q {
                s += antideriv[i][k] * (2.0 * k as f64 + 1.0) * 0.5 * weights[l] * legendre[l][k];
            }
            out[i][l] = s;
        }
    }
    out
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive 7/15-point Gauss–Kronrod on `[a, b]`, bisecting the
/// segment with the largest error until `error ≤ max(abs_tol, rel_tol·|value|)`.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Estimate {
    let mut heap = BinaryHeap::new();
    let (v, e) = kronrod15(&mut f, a, b);
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut segments = 1;
    loop {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Estimate { value: total, error: err, converged: true };
        }
        if segments >= max_segments {
            return Estimate { value: total, error: err, converged: false };
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        segments += 1;
        if segments % 64 == 0 {
            // refresh the running sums against drift
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
}
