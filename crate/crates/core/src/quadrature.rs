//! Gauss–Legendre rules and exact power-weighted moments on mesh cells.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of points in the shared rule. Exact for polynomials of degree 47.
pub const GAUSS_POINTS: usize = 24;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 24-point rule.
pub fn gauss() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(GAUSS_POINTS))
}

/// Integrals of the products of the two P1 shape functions on a cell
/// `[x0, x0 + h]` against the weight `x^p`.
///
/// With `ξ = (x - x0)/h`, `φ0 = 1 - ξ` and `φ1 = ξ`, the fields hold
/// `∫ x^p φa φb dx`, `∫ x^p φa dx` and `∫ x^p dx`. Entries that diverge
/// (negative `p` on a cell touching the origin) are `+∞`; callers must
/// only use them on degrees of freedom that are later removed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMoments {
    pub phi00: f64,
    pub phi01: f64,
    pub phi11: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub one: f64,
}

impl CellMoments {
    pub fn new(x0: f64, h: f64, p: i32) -> Self {
        debug_assert!(h > 0.0);
        if p >= 0 || x0 >= 0.5 * h {
            if p < 0 {
                debug_assert!(x0 > 0.0, "negative power on a cell containing the origin");
            }
            let rule = gauss();
            let mut m = [0.0; 6];
            for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                let xi = 0.5 * (z + 1.0);
                let wx = 0.5 * w * (x0 + h * xi).powi(p);
                let a = 1.0 - xi;
                m[0] += wx * a * a;
                m[1] += wx * a * xi;
                m[2] += wx * xi * xi;
                m[3] += wx * a;
                m[4] += wx * xi;
                m[5] += wx;
            }
            CellMoments {
                phi00: h * m[0],
                phi01: h * m[1],
                phi11: h * m[2],
                phi0: h * m[3],
                phi1: h * m[4],
                one: h * m[5],
            }
        } else {
            // ∫_0^1 ξ^k (c + ξ)^p dξ in closed form, c = x0 / h < 1/2.
            let c = x0 / h;
            let scale = h * h.powi(p);
            let mk = |k: i32| -> f64 { scale * xi_power_moment(c, k, p) };
            let (m0, m1, m2) = (mk(0), mk(1), mk(2));
            let phi00 = if m0.is_infinite() { f64::INFINITY } else { m0 - 2.0 * m1 + m2 };
            let phi01 = if m1.is_infinite() { f64::INFINITY } else { m1 - m2 };
            let phi0 = if m0.is_infinite() { f64::INFINITY } else { m0 - m1 };
            CellMoments { phi00, phi01, phi11: m2, phi0, phi1: m1, one: m0 }
        }
    }
}

/// `∫_0^1 ξ^k (c + ξ)^p dξ` for `p < 0`, `0 ≤ c`, small `k`.
fn xi_power_moment(c: f64, k: i32, p: i32) -> f64 {
    if c == 0.0 {
        let q = k + p;
        return if q > -1 { 1.0 / (q as f64 + 1.0) } else { f64::INFINITY };
    }
    // ξ^k = Σ_i binom(k, i) (c + ξ)^i (-c)^(k - i)
    let mut acc = 0.0;
    for i in 0..=k {
        let coef = binomial(k, i) * (-c).powi(k - i);
        let q = i + p;
        let integral = if q == -1 {
            (1.0 / c).ln_1p()
        } else {
            ((1.0 + c).powi(q + 1) - c.powi(q + 1)) / (q as f64 + 1.0)
        };
        acc += coef * integral;
    }
    acc
}

fn binomial(k: i32, i: i32) -> f64 {
    let mut r = 1.0;
    for j in 0..i {
        r = r * (k - j) as f64 / (j + 1) as f64;
    }
    r
}
