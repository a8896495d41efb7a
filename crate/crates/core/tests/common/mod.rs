//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre on [lo, hi] with `panels` panels of `order` nodes.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + h * p as f64;
        let mid = a + 0.5 * h;
        let panel: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum();
        total += 0.5 * h * panel;
    }
    total
}

/// E F_t = ∫₀ᵗ e^{(a+1/2)s} ds by quadrature.
pub fn mean_quadrature(a: f64, t: f64) -> f64 {
    integrate(|s| ((a + 0.5) * s).exp(), 0.0, t, 8, 20)
}

/// Var F_t = 2∫₀ᵗ∫₀ᵘ e^{(a+1/2)(s+u)}(e^s − 1) ds du, the covariance kernel of
/// e^{as+B_s} integrated over the triangle s ≤ u.
pub fn variance_quadrature(a: f64, t: f64) -> f64 {
    let b = a + 0.5;
    let inner = |u: f64| integrate(|s| (b * (s + u)).exp() * s.exp_m1(), 0.0, u, 4, 20);
    2.0 * integrate(inner, 0.0, t, 8, 20)
}

/// Φ(x) = 1/2 + ∫₀ˣ φ by composite Simpson.
pub fn cdf_simpson(x: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = x / n as f64;
    let phi = |s: f64| (-0.5 * s * s).exp() / (2.0 * PI).sqrt();
    let mut acc = phi(0.0) + phi(x);
    for i in 1..n {
        acc += phi(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + acc * h / 3.0
}

/// 1 − Φ(x) from the asymptotic series φ(x)/x · Σ (−1)^k (2k−1)!!/x^{2k},
/// truncated at the smallest term. Accurate to ~1e-13 relative for x ≥ 8.
pub fn tail_asymptotic(x: f64) -> f64 {
    let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = -term * (2 * k - 1) as f64 / x2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    phi / x * sum
}

/// Five-point finite-difference derivative. Central when the stencil stays on
/// one side of `seam`, otherwise one-sided toward the side of x (x ≤ seam looks
/// left).
pub fn fd_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, seam: f64, h: f64) -> f64 {
    let crosses = (x <= seam) != (x + 2.0 * h <= seam) || (x <= seam) != (x - 2.0 * h <= seam);
    if !crosses {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    } else {
        one_sided5(f, x, if x <= seam { -h } else { h })
    }
}

/// Fourth-order one-sided difference with signed step s.
pub fn one_sided5<F: Fn(f64) -> f64>(f: &F, x: f64, s: f64) -> f64 {
    (-25.0 * f(x) + 48.0 * f(x + s) - 36.0 * f(x + 2.0 * s) + 16.0 * f(x + 3.0 * s) - 3.0 * f(x + 4.0 * s)) / (12.0 * s)
}

/// Seven-point central difference (sixth order).
pub fn fd_central7<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + 3.0 * h) - 9.0 * f(x + 2.0 * h) + 45.0 * f(x + h) - 45.0 * f(x - h) + 9.0 * f(x - 2.0 * h) - f(x - 3.0 * h))
        / (60.0 * h)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Frozen high-precision values, (a, t, m_t, σ²_t).
pub const MOMENT_TABLE: &[(f64, f64, f64, f64)] = &[
    (0.0, 0.1, 0.10254219275204808523, 0.00036401380965093514972),
    (0.0, 0.05, 0.050630241048857684202, 0.00004353600995607470787),
    (0.0, 1.0, 1.2974425414002562937, 0.84609019585160265991),
    (0.0, 0.01, 0.010025041718802126976, 3.3626463731465047513e-7),
    (-2.0, 0.01, 0.0099253735979582258882, 3.2796428446096001228e-7),
    (-2.0, 0.1, 0.092861349049961466625, 0.00028367220843078628103),
    (-2.0, 1.0, 0.51791322656771344738, 0.074089362490299491027),
    (-1.5, 0.01, 0.0099501662508319466322, 3.3001826133670772832e-7),
    (-1.5, 0.1, 0.095162581964040431859, 0.00030176331482622674581),
    (-1.5, 1.0, 0.6321205588285576784, 0.12890583442050266491),
    (-0.5, 0.01, 0.01, 3.341683361150843518e-7),
    (-0.5, 0.1, 0.1, 0.00034183615129524968082),
    (-0.5, 1.0, 1.0, 0.43656365691809047072),
    (1.0, 0.01, 0.010075376410479319729, 3.4050028134659988888e-7),
    (1.0, 0.1, 0.10788949515218875486, 0.00041320024230890546523),
    (1.0, 1.0, 2.3211260468920432151, 3.4751030435545296455),
];

/// Sixth-order seven-point one-sided difference with signed step s.
pub fn one_sided7<F: Fn(f64) -> f64>(f: &F, x: f64, s: f64) -> f64 {
    (-147.0 * f(x) + 360.0 * f(x + s) - 450.0 * f(x + 2.0 * s) + 400.0 * f(x + 3.0 * s) - 225.0 * f(x + 4.0 * s)
        + 72.0 * f(x + 5.0 * s)
        - 10.0 * f(x + 6.0 * s))
        / (60.0 * s)
}
