//! Fixed quadrature rules: Gauss-Legendre, periodic trapezoid, and the
//! tensor-product sphere rule used as an oracle throughout the crate.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
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

/// Shared, memoized Gauss-Legendre rule of order `n`.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::compute(n)))
        .clone()
}

/// Equally spaced nodes `2 pi j / n`, `j = 0..n`, each with weight `2 pi / n`.
pub fn periodic_nodes(n: usize) -> impl Iterator<Item = f64> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(move |j| j as f64 * h)
}

/// Tensor-product rule on the unit sphere: Gauss-Legendre in `cos(theta)`
/// times the periodic trapezoid in `phi`. Exact for spherical polynomials of
/// degree below `min(2 n_theta, n_phi)`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        SphereRule {
            n_theta: 50,
            n_phi: 128,
        }
    }
}

impl SphereRule {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        SphereRule { n_theta, n_phi }
    }

    /// Integrate a complex function of `(theta, phi)` against `dOmega`.
    pub fn integrate<F: FnMut(f64, f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let gl = gauss_legendre(self.n_theta);
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for (u, w) in gl.nodes.iter().zip(&gl.weights) {
            let theta = u.clamp(-1.0, 1.0).acos();
            let mut ring = Complex64::new(0.0, 0.0);
            for phi in periodic_nodes(self.n_phi) {
                ring += f(theta, phi);
            }
            sum += ring * (w * dphi);
        }
        sum
    }

    pub fn integrate_real<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.integrate(|t, p| Complex64::new(f(t, p), 0.0)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = gauss_legendre(10);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9);
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_nodes_are_sorted_and_interior() {
        let gl = gauss_legendre(301);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(gl.nodes[0] > -1.0 && gl.nodes[300] < 1.0);
        let v = gl.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_area() {
        let a = SphereRule::default().integrate_real(|_, _| 1.0);
        assert!((a - 4.0 * PI).abs() < 1e-12);
    }
}
