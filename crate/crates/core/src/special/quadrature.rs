//! Gauss-Legendre rules, panel rules and product rules on the unit sphere.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock, RwLock};

use crate::kinematics::UnitVector;
use crate::{Error, Result, Vec3};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn compute_gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
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
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached `n`-point Gauss-Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    assert!(n > 0, "a Gauss rule needs at least one node");
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.read().expect("rule cache").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(if n == 1 {
        GaussRule { nodes: vec![0.0], weights: vec![2.0] }
    } else {
        compute_gauss_legendre(n)
    });
    cache.write().expect("rule cache").entry(n).or_insert(rule).clone()
}

/// Composite Gauss rule: `n_per(a, b)` nodes on each panel `[breaks[i], breaks[i+1]]`.
pub fn panel_rule(breaks: &[f64], n_per: impl Fn(f64, f64) -> usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let g = gauss_legendre(n_per(a, b).max(1));
            out.extend(g.on(a, b));
        }
    }
    out
}

/// Breakpoints on `[a, b]` refined geometrically toward `a`: `a + (b−a)·2^{-i}`
/// down to a smallest panel of width `min_width`.
pub fn graded_breaks(a: f64, b: f64, min_width: f64) -> Vec<f64> {
    let mut rel = vec![1.0];
    let mut h = 1.0;
    while h * (b - a) > min_width && rel.len() < 60 {
        h *= 0.5;
        rel.push(h);
    }
    rel.push(0.0);
    rel.reverse();
    rel.into_iter().map(|r| a + (b - a) * r).collect()
}

pub const SPHERE_MAX_DEGREE: usize = 1023;

/// Positive-weight rule on the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub degree: usize,
    pub nodes: Vec<(UnitVector, f64)>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.nodes.iter().map(|(w, wt)| wt * f(w.as_vec())).sum()
    }
}

/// Product rule: Gauss-Legendre in `cos φ` times the uniform rule in the
/// azimuth. Exact for polynomials of total degree `≤ degree` on the sphere.
pub fn sphere_rule(degree: usize) -> Result<SphereRule> {
    if degree == 0 || degree > SPHERE_MAX_DEGREE {
        return Err(Error::usage(format!(
            "sphere rule degree {degree} unsupported (1..={SPHERE_MAX_DEGREE})"
        )));
    }
    let polar = gauss_legendre(degree / 2 + 1);
    let n_az = degree + 1;
    let mut nodes = Vec::with_capacity(polar.len() * n_az);
    for (&z, &wz) in polar.nodes.iter().zip(&polar.weights) {
        let r = (1.0 - z * z).max(0.0).sqrt();
        for i in 0..n_az {
            let th = TAU * (i as f64 + 0.5) / n_az as f64;
            let w = Vec3::new(r * th.cos(), r * th.sin(), z);
            nodes.push((UnitVector::new_unchecked(w), wz * TAU / n_az as f64));
        }
    }
    Ok(SphereRule { degree, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gamma_half(k: u32) -> f64 {
        // Γ(k/2) for positive integer k
        if k % 2 == 0 {
            (1..k / 2).map(f64::from).product()
        } else {
            let mut g = PI.sqrt();
            let mut x = 0.5;
            while x < k as f64 / 2.0 - 0.25 {
                g *= x;
                x += 1.0;
            }
            g
        }
    }

    fn monomial_exact(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        2.0 * gamma_half(a + 1) * gamma_half(b + 1) * gamma_half(c + 1) / gamma_half(a + b + c + 3)
    }

    #[test]
    fn gauss_rule_polynomial_exactness() {
        for n in [1, 2, 5, 16, 64, 200] {
            let g = gauss_legendre(n);
            assert_abs_diff_eq!(g.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..(2 * n).min(40) {
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert_abs_diff_eq!(g.integrate(-1.0, 1.0, |x| x.powi(deg as i32)), exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sphere_constants() {
        let rule = sphere_rule(35).unwrap();
        assert_abs_diff_eq!(rule.integrate(|_| 1.0), 4.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.integrate(|w| w.z * w.z), 4.0 * PI / 3.0, epsilon = 1e-12);
        assert!(rule.nodes.iter().all(|(_, w)| *w > 0.0));
    }

    #[test]
    fn sphere_monomials_up_to_degree() {
        let deg = 12;
        let rule = sphere_rule(deg).unwrap();
        for a in 0..=deg as u32 {
            for b in 0..=(deg as u32 - a) {
                for c in 0..=(deg as u32 - a - b) {
                    let got = rule.integrate(|w| w.x.powi(a as i32) * w.y.powi(b as i32) * w.z.powi(c as i32));
                    assert_abs_diff_eq!(got, monomial_exact(a, b, c), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn plane_wave_identity() {
        // ∫ e^{i k·ω} dS = 4π sin|k|/|k|; the real part suffices by symmetry
        let rule = sphere_rule(41).unwrap();
        let k = Vec3::new(3.0, 0.0, 4.0);
        let got = rule.integrate(|w| k.dot(w).cos());
        assert_abs_diff_eq!(got, 4.0 * PI * 5f64.sin() / 5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(got, -2.4100, epsilon = 1e-4);
    }

    #[test]
    fn unsupported_degree() {
        assert!(sphere_rule(0).is_err());
        assert!(sphere_rule(SPHERE_MAX_DEGREE + 1).is_err());
    }

    #[test]
    fn graded_panels_integrate_near_singularity() {
        let eps = 1e-6;
        let breaks = graded_breaks(0.0, 1.0, eps);
        let rule = panel_rule(&breaks, |_, _| 20);
        let got: f64 = rule.iter().map(|(x, w)| w / (x + eps).sqrt()).sum();
        let exact = 2.0 * ((1.0 + eps).sqrt() - eps.sqrt());
        assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
    }
}
