//! The inner sphere integral `∫_{|ω|=1} e^{isξ·ω} (1+v·ω)^{−3/2} dS(ω)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::direct::focusing;
use super::windows::sin_from_cos;
use crate::kinematics::{velocity_of, Momentum};
use crate::special::bessel::j0;
use crate::density::builtin::sinc;
use crate::special::gauss_legendre;
use crate::{Vec3, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillatoryMethod {
    /// Two-dimensional quadrature over the sphere in a frame aligned with `v`.
    Direct,
    /// The one-dimensional reduction through `J₀`.
    Bessel,
}

/// `∫₋₁¹ (1+aσ)^{−3/2} dσ = 4 / ((√(1+a) + √(1−a)) √(1−a²))`.
pub fn focusing_integral(a: f64) -> f64 {
    let (p, m) = ((1.0 + a).sqrt(), (1.0 - a).sqrt());
    4.0 / ((p + m) * p * m)
}

/// σ nodes on `[−1, 1]` graded toward `−1` at the scale `1 − a`, with enough
/// nodes per panel for phase rate `z`.
fn sigma_nodes(a: f64, z: f64) -> Vec<(f64, f64)> {
    let mut breaks = vec![-1.0, 0.0, 1.0];
    let gap = 1.0 - a;
    let mut d = 0.5;
    while d > 0.25 * gap {
        d *= 0.5;
        breaks.push(-1.0 + d);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let n = 24 + (0.8 * z * (w[1] - w[0])).ceil() as usize;
        out.extend(gauss_legendre(n).on(w[0], w[1]));
    }
    out
}

pub fn sphere_oscillatory(s: f64, xi: &Vec3, p: &Momentum, method: OscillatoryMethod) -> C64 {
    let v = velocity_of(p);
    let v = *v.as_vec();
    let a = v.norm();
    let z = s * xi.norm();
    if xi.norm() == 0.0 || s == 0.0 {
        return C64::new(TAU * focusing_integral(a), 0.0);
    }
    if a == 0.0 {
        return C64::new(4.0 * PI * sinc(z), 0.0);
    }
    let vbar = v / a;
    let gap = 1.0 / {
        let e = (1.0 + p.0.norm_squared()).sqrt();
        e * (e + p.0.norm())
    };
    let nodes = sigma_nodes(a, z);
    match method {
        OscillatoryMethod::Bessel => {
            let along = xi.dot(&vbar);
            let cos = (along / xi.norm()).clamp(-1.0, 1.0);
            let across = xi.norm() * sin_from_cos(cos);
            let mut acc = C64::new(0.0, 0.0);
            for (sigma, w) in nodes {
                let amp = w * focusing(gap, a, sigma) * j0(s * across * sin_from_cos(sigma));
                acc += C64::from_polar(amp, s * sigma * along);
            }
            acc * TAU
        }
        OscillatoryMethod::Direct => {
            let helper = if vbar[0].abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
            let e1 = (helper - vbar * helper.dot(&vbar)).normalize();
            let e2 = vbar.cross(&e1);
            let mut acc = C64::new(0.0, 0.0);
            for (sigma, w) in nodes {
                let xs = sin_from_cos(sigma);
                let n_phi = 24 + (1.25 * z * xs).ceil() as usize;
                let h = TAU / n_phi as f64;
                let mut ring = C64::new(0.0, 0.0);
                for i in 0..n_phi {
                    let (sp, cp) = (h * i as f64).sin_cos();
                    let omega = vbar * sigma + (e1 * cp + e2 * sp) * xs;
                    ring += C64::from_polar(1.0, s * xi.dot(&omega));
                }
                acc += ring * (w * h * focusing(gap, a, sigma));
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let got = sphere_oscillatory(1.0, &Vec3::new(5.0, 0.0, 0.0), &Momentum(Vec3::zeros()), OscillatoryMethod::Bessel);
        assert!((got.re - 4.0 * PI * 5f64.sin() / 5.0).abs() < 1e-14);
        assert!((got.re + 2.4100).abs() < 1e-4);
        let p = Momentum(Vec3::new(0.75, 0.0, 0.0));
        let got = sphere_oscillatory(1.0, &Vec3::zeros(), &p, OscillatoryMethod::Direct);
        let expect = TAU * (2.0 / 0.6) * (0.4f64.powf(-0.5) - 1.6f64.powf(-0.5));
        assert!((got.re - expect).abs() < 1e-12);
        assert!((got.re - 16.5573).abs() < 1e-3);
    }

    #[test]
    fn methods_agree_on_reference_point() {
        let v = Vec3::new(0.3, 0.4, 0.0);
        let p = Momentum(v / (1.0 - v.norm_squared()).sqrt());
        let xi = Vec3::new(3.0, 0.0, 0.0);
        let d = sphere_oscillatory(1.0, &xi, &p, OscillatoryMethod::Direct);
        let b = sphere_oscillatory(1.0, &xi, &p, OscillatoryMethod::Bessel);
        assert!((d - b).norm() <= 1e-8 * d.norm());
    }

    #[test]
    fn zero_frequency_matches_quadrature() {
        let p = Momentum(Vec3::new(0.0, 2.0, 1.0));
        let a = sphere_oscillatory(0.0, &Vec3::new(1.0, 1.0, 1.0), &p, OscillatoryMethod::Bessel);
        let b = sphere_oscillatory(1e-300, &Vec3::new(1.0, 1.0, 1.0), &p, OscillatoryMethod::Direct);
        assert!((a - b).norm() < 1e-10 * a.norm());
    }
}
