//! Built-in density families: a Gaussian, an exactly compactly supported
//! bump, and free transport of either.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PhaseDensity, ProductProfile, SpectralForm};
use crate::special::filters::smooth_step;
use crate::special::quadrature::gauss_legendre;
use crate::{Error, Result, Vec3, C64};

/// Gaussian widths beyond which the density is treated as zero.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

/// `A e^{−|x−x₀|²/2a²} e^{−|p|²/2b²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amplitude: f64,
    pub width_x: f64,
    pub width_p: f64,
    pub center: Vec3,
}

impl ProductProfile for Gaussian {
    fn spatial(&self, x: &Vec3) -> f64 {
        let d2 = (x - self.center).norm_squared();
        self.amplitude * (-0.5 * d2 / (self.width_x * self.width_x)).exp()
    }

    fn momentum_radial(&self, p: f64) -> f64 {
        (-0.5 * p * p / (self.width_p * self.width_p)).exp()
    }

    fn spatial_transform_radial(&self, r: f64) -> f64 {
        let a = self.width_x;
        self.amplitude * (2.0 * PI * a * a).powf(1.5) * (-0.5 * a * a * r * r).exp()
    }

    fn center(&self) -> Vec3 {
        self.center
    }

    fn radius_x(&self) -> f64 {
        GAUSSIAN_SUPPORT_SIGMAS * self.width_x
    }

    fn radius_p(&self) -> f64 {
        GAUSSIAN_SUPPORT_SIGMAS * self.width_p
    }

    fn sup(&self) -> f64 {
        self.amplitude
    }
}

/// `b(r) = h(2(1 − r))`: one for `r ≤ 1/2`, zero for `r ≥ 1`.
#[inline]
pub fn radial_bump(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r))
}

/// `A b(|x−x₀|/R_x) b(|p|/R_p)`, supported exactly in the two balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactBump {
    pub amplitude: f64,
    pub radius_x: f64,
    pub radius_p: f64,
    pub center: Vec3,
}

impl CompactBump {
    /// `4π ∫₀^R b(r/R) r² sinc(kr) dr`: closed form on the plateau `[0, R/2]`,
    /// panel Gauss rule on the transition layer.
    pub fn radial_transform(&self, k: f64) -> f64 {
        let big_r = self.radius_x;
        let c = 0.5 * big_r;
        let plateau = if k * c < 0.5 {
            // Σ (−1)^n k^{2n} c^{2n+3} / ((2n+1)! (2n+3))
            let mut term = c * c * c;
            let mut sum = term / 3.0;
            let q = -(k * c) * (k * c);
            for n in 1..12 {
                let nf = n as f64;
                term *= q / ((2.0 * nf) * (2.0 * nf + 1.0));
                sum += term / (2.0 * nf + 3.0);
            }
            sum
        } else {
            let (s, co) = (k * c).sin_cos();
            (s - k * c * co) / (k * k * k)
        };
        const PANELS: usize = 8;
        let w = (big_r - c) / PANELS as f64;
        let n = 24 + (0.7 * k * w).ceil() as usize;
        let g = gauss_legendre(n);
        let mut edge = 0.0;
        for i in 0..PANELS {
            let a = c + w * i as f64;
            edge += g.integrate(a, a + w, |r| radial_bump(r / big_r) * r * r * sinc(k * r));
        }
        4.0 * PI * (plateau + edge)
    }
}

#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl ProductProfile for CompactBump {
    fn spatial(&self, x: &Vec3) -> f64 {
        self.amplitude * radial_bump((x - self.center).norm() / self.radius_x)
    }

    fn momentum_radial(&self, p: f64) -> f64 {
        radial_bump(p / self.radius_p)
    }

    fn spatial_transform_radial(&self, r: f64) -> f64 {
        self.amplitude * self.radial_transform(r)
    }

    fn center(&self) -> Vec3 {
        self.center
    }

    fn radius_x(&self) -> f64 {
        self.radius_x
    }

    fn radius_p(&self) -> f64 {
        self.radius_p
    }

    fn sup(&self) -> f64 {
        self.amplitude
    }
}

/// Time-independent product density `f(t,x,p) = X(x) P(|p|)`.
#[derive(Debug, Clone)]
pub struct Frozen<P> {
    pub name: String,
    pub profile: P,
}

impl<P: ProductProfile + 'static> PhaseDensity for Frozen<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, _t: f64, x: &Vec3, p: &Vec3) -> f64 {
        self.profile.spatial(x) * self.profile.momentum_radial(p.norm())
    }

    fn fourier_x(&self, _t: f64, xi: &Vec3, p: &Vec3) -> Option<C64> {
        Some(self.profile.spatial_hat(xi) * self.profile.momentum_radial(p.norm()))
    }

    fn sup_bound(&self) -> f64 {
        self.profile.sup()
    }

    fn center_x(&self) -> Vec3 {
        self.profile.center()
    }

    fn support_radius_x(&self, _t: f64) -> f64 {
        self.profile.radius_x()
    }

    fn support_radius_p(&self) -> f64 {
        self.profile.radius_p()
    }

    fn product(&self) -> Option<&dyn ProductProfile> {
        Some(&self.profile)
    }

    fn spectral(&self) -> Option<SpectralForm<'_>> {
        Some(SpectralForm { profile: &self.profile, transported: false })
    }
}

/// Free transport `f(t,x,p) = f₀(x − v(p) t, p)` of a product profile.
#[derive(Debug, Clone)]
pub struct FreeStreaming<P> {
    pub name: String,
    pub initial: P,
}

impl<P: ProductProfile + 'static> PhaseDensity for FreeStreaming<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, t: f64, x: &Vec3, p: &Vec3) -> f64 {
        let v = p / (1.0 + p.norm_squared()).sqrt();
        self.initial.spatial(&(x - v * t)) * self.initial.momentum_radial(p.norm())
    }

    fn fourier_x(&self, t: f64, xi: &Vec3, p: &Vec3) -> Option<C64> {
        let v = p / (1.0 + p.norm_squared()).sqrt();
        let shift = C64::from_polar(1.0, -t * xi.dot(&v));
        Some(shift * self.initial.spatial_hat(xi) * self.initial.momentum_radial(p.norm()))
    }

    fn sup_bound(&self) -> f64 {
        self.initial.sup()
    }

    fn center_x(&self) -> Vec3 {
        self.initial.center()
    }

    fn support_radius_x(&self, t: f64) -> f64 {
        self.initial.radius_x() + t.abs()
    }

    fn support_radius_p(&self) -> f64 {
        self.initial.radius_p()
    }

    fn spectral(&self) -> Option<SpectralForm<'_>> {
        Some(SpectralForm { profile: &self.initial, transported: true })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    Gaussian,
    CompactBump,
    FreeStreaming,
    Zero,
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuiltinKind::Gaussian => "gaussian",
            BuiltinKind::CompactBump => "compact_bump",
            BuiltinKind::FreeStreaming => "free_streaming",
            BuiltinKind::Zero => "zero",
        })
    }
}

/// Parameters shared by the built-in families. For `compact_bump` the widths
/// are the support radii; `free_streaming` transports the Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    pub amplitude: f64,
    pub width_x: f64,
    pub width_p: f64,
    #[serde(default)]
    pub center: [f64; 3],
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams { amplitude: 1.0, width_x: 1.0, width_p: 1.0, center: [0.0; 3] }
    }
}

pub fn builtin_density(kind: BuiltinKind, params: &DensityParams) -> Result<Box<dyn PhaseDensity>> {
    let center = Vec3::from(params.center);
    if kind == BuiltinKind::Zero {
        return Ok(Box::new(zero_density()));
    }
    for (name, v) in [("amplitude", params.amplitude), ("width_x", params.width_x), ("width_p", params.width_p)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::usage(format!("{kind} density needs positive `{name}`, got {v}")));
        }
    }
    if !center.iter().all(|c| c.is_finite()) {
        return Err(Error::usage("density center must be finite"));
    }
    let gaussian = Gaussian {
        amplitude: params.amplitude,
        width_x: params.width_x,
        width_p: params.width_p,
        center,
    };
    Ok(match kind {
        BuiltinKind::Gaussian => Box::new(Frozen { name: kind.to_string(), profile: gaussian }),
        BuiltinKind::FreeStreaming => Box::new(FreeStreaming { name: kind.to_string(), initial: gaussian }),
        BuiltinKind::CompactBump => Box::new(Frozen {
            name: kind.to_string(),
            profile: CompactBump {
                amplitude: params.amplitude,
                radius_x: params.width_x,
                radius_p: params.width_p,
                center,
            },
        }),
        BuiltinKind::Zero => unreachable!(),
    })
}

/// The identically vanishing density.
pub fn zero_density() -> Frozen<Gaussian> {
    Frozen {
        name: "zero".into(),
        profile: Gaussian { amplitude: 0.0, width_x: 1.0, width_p: 1.0, center: Vec3::zeros() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian(a: f64, b: f64) -> Box<dyn PhaseDensity> {
        builtin_density(BuiltinKind::Gaussian, &DensityParams { amplitude: 1.0, width_x: a, width_p: b, center: [0.5, -1.0, 2.0] })
            .unwrap()
    }

    #[test]
    fn gaussian_peak() {
        let f = gaussian(1.0, 1.0);
        assert_eq!(f.evaluate(3.7, &Vec3::new(0.5, -1.0, 2.0), &Vec3::zeros()), 1.0);
    }

    #[test]
    fn gaussian_transform_formula() {
        let f = gaussian(0.7, 1.3);
        let xi = Vec3::new(0.4, -1.1, 0.9);
        let p = Vec3::new(0.2, 0.5, -0.3);
        let a = 0.7_f64;
        let expected = C64::from_polar(1.0, -xi.dot(&Vec3::new(0.5, -1.0, 2.0)))
            * ((2.0 * PI * a * a).powf(1.5) * (-0.5 * a * a * xi.norm_squared()).exp() * (-0.5 * p.norm_squared() / (1.3 * 1.3)).exp());
        let got = f.fourier_x(0.0, &xi, &p).unwrap();
        assert_relative_eq!((got - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        for kind in [BuiltinKind::Gaussian, BuiltinKind::CompactBump, BuiltinKind::FreeStreaming] {
            let bad = DensityParams { width_x: 0.0, ..Default::default() };
            assert!(matches!(builtin_density(kind, &bad), Err(Error::Usage(_))));
            let bad = DensityParams { amplitude: -1.0, ..Default::default() };
            assert!(builtin_density(kind, &bad).is_err());
        }
    }

    #[test]
    fn bump_is_compact() {
        let f = builtin_density(BuiltinKind::CompactBump, &DensityParams { amplitude: 2.0, width_x: 1.5, width_p: 3.0, center: [0.0; 3] })
            .unwrap();
        assert_eq!(f.evaluate(0.0, &Vec3::new(1.5, 0.0, 0.0), &Vec3::zeros()), 0.0);
        assert_eq!(f.evaluate(0.0, &Vec3::zeros(), &Vec3::new(0.0, 3.0, 0.0)), 0.0);
        assert_eq!(f.evaluate(0.0, &Vec3::new(0.7, 0.0, 0.0), &Vec3::new(0.0, 1.4, 0.0)), 2.0);
    }

    /// 1-d radial integration with a dense uniform composite Simpson rule.
    fn bump_transform_oracle(big_r: f64, k: f64) -> f64 {
        let n = 200_000;
        let h = big_r / n as f64;
        let f = |r: f64| radial_bump(r / big_r) * r * r * sinc(k * r);
        let mut s = f(0.0) + f(big_r);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        4.0 * PI * s * h / 3.0
    }

    #[test]
    fn bump_transform_matches_dense_rule() {
        let b = CompactBump { amplitude: 1.0, radius_x: 2.0, radius_p: 1.0, center: Vec3::zeros() };
        for k in [0.0, 0.1, 0.3, 1.0, 3.7, 12.0, 40.0, 130.0] {
            assert_abs_diff_eq!(b.radial_transform(k), bump_transform_oracle(2.0, k), epsilon = 1e-10);
        }
    }

    #[test]
    fn bump_transform_converged_at_high_frequency() {
        let b = CompactBump { amplitude: 1.0, radius_x: 2.0, radius_p: 1.0, center: Vec3::zeros() };
        let k: f64 = 700.0;
        let reference = {
            let g = gauss_legendre(4000);
            let c = 1.0;
            let plateau = {
                let (s, co) = (k * c).sin_cos();
                (s - k * c * co) / (k * k * k)
            };
            4.0 * PI * (plateau + g.integrate(c, 2.0, |r| radial_bump(r / 2.0) * r * r * sinc(k * r)))
        };
        assert_abs_diff_eq!(b.radial_transform(k), reference, epsilon = 1e-13);
    }

    #[test]
    fn free_streaming_transport() {
        let f = builtin_density(BuiltinKind::FreeStreaming, &DensityParams::default()).unwrap();
        let p = Vec3::new(1.0, 0.0, 0.0);
        let v = p / 2f64.sqrt();
        assert_relative_eq!(f.evaluate(2.0, &(v * 2.0), &p), f.evaluate(0.0, &Vec3::zeros(), &p), epsilon = 1e-15);
        let xi = Vec3::new(0.3, 0.2, -0.5);
        let ratio = f.fourier_x(2.0, &xi, &p).unwrap() / f.fourier_x(0.0, &xi, &p).unwrap();
        assert_relative_eq!(ratio.arg(), -2.0 * xi.dot(&v), epsilon = 1e-14);
        assert!(f.support_radius_x(2.0) > f.support_radius_x(0.0));
    }

    #[test]
    fn zero_density_vanishes() {
        let f = zero_density();
        assert_eq!(f.evaluate(0.0, &Vec3::zeros(), &Vec3::zeros()), 0.0);
        assert_eq!(f.fourier_x(0.0, &Vec3::zeros(), &Vec3::zeros()).unwrap(), C64::new(0.0, 0.0));
    }
}
