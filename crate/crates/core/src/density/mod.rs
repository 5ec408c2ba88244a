//! Prescribed phase-space densities `f(t, x, p) ≥ 0`, their moments and the
//! kinetic part of the conserved energy.

pub mod builtin;
pub mod grid;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::special::quadrature::{gauss_legendre, sphere_rule};
use crate::{Error, Result, Vec3, C64};

pub use builtin::{builtin_density, zero_density, BuiltinKind, CompactBump, DensityParams, FreeStreaming, Frozen, Gaussian};
pub use grid::{load_grid_density, write_grid_density, GridAxis, GridDensity};

/// A prescribed phase-space density.
///
/// Implementations must return values in `[0, sup_bound()]`. The Fourier
/// transform refers to `x` only, with `f̂(ξ) = ∫ e^{−iξ·x} f(x) dx`.
pub trait PhaseDensity: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn evaluate(&self, t: f64, x: &Vec3, p: &Vec3) -> f64;

    /// `f̂(t, ξ, p)`, when the density can provide it.
    fn fourier_x(&self, _t: f64, _xi: &Vec3, _p: &Vec3) -> Option<C64> {
        None
    }

    /// `‖f⁽⁰⁾‖_∞`.
    fn sup_bound(&self) -> f64;

    fn center_x(&self) -> Vec3;

    /// Radius about [`Self::center_x`] outside which `f(t, ·, p)` is below `1e-13·sup`.
    fn support_radius_x(&self, t: f64) -> f64;

    fn support_radius_p(&self) -> f64;

    /// Time-independent product structure `f = X(x) P(|p|)`, if any.
    fn product(&self) -> Option<&dyn ProductProfile> {
        None
    }

    /// Factorized transform `f̂(τ, ξ, p) = X̂(ξ) Q(τ, |ξ|, |p|, ξ̂·p̂)`, if any.
    fn spectral(&self) -> Option<SpectralForm<'_>> {
        None
    }
}

/// Product profile `X(x) P(|p|)` with `X` radially symmetric about a center.
pub trait ProductProfile: Send + Sync + fmt::Debug {
    fn spatial(&self, x: &Vec3) -> f64;

    fn momentum_radial(&self, p: f64) -> f64;

    /// Transform of `X` re-centered at the origin, as a function of `|ξ|`.
    fn spatial_transform_radial(&self, r: f64) -> f64;

    fn center(&self) -> Vec3;

    fn radius_x(&self) -> f64;

    fn radius_p(&self) -> f64;

    fn sup(&self) -> f64;

    fn spatial_hat(&self, xi: &Vec3) -> C64 {
        C64::from_polar(1.0, -xi.dot(&self.center())) * self.spatial_transform_radial(xi.norm())
    }
}

/// Factorized form of `f̂` used by the spectral fast paths.
#[derive(Clone, Copy)]
pub struct SpectralForm<'a> {
    pub profile: &'a dyn ProductProfile,
    /// Whether the density is freely transported, adding the phase `e^{−iτ ξ·v}`.
    pub transported: bool,
}

impl SpectralForm<'_> {
    /// `Q(τ, |ξ|, |p|, c)` with `c` the cosine between `ξ` and `p`.
    #[inline]
    pub fn momentum_factor(&self, tau: f64, xi_norm: f64, p_norm: f64, cos: f64) -> C64 {
        let base = self.profile.momentum_radial(p_norm);
        if self.transported {
            let speed = p_norm / (1.0 + p_norm * p_norm).sqrt();
            C64::from_polar(base, -tau * xi_norm * speed * cos)
        } else {
            C64::new(base, 0.0)
        }
    }

    /// Upper bound of `|Q|` over `τ` and `c`.
    #[inline]
    pub fn momentum_modulus(&self, p_norm: f64) -> f64 {
        self.profile.momentum_radial(p_norm)
    }

    /// `∫_{|ω|=1} |X̂(rω)|² dS(ω)`.
    pub fn shell_energy(&self, r: f64) -> f64 {
        let x = self.profile.spatial_transform_radial(r);
        4.0 * std::f64::consts::PI * x * x
    }
}

/// Charge and current density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub rho: f64,
    pub j: Vec3,
}

/// Quadrature over momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentumRule {
    /// Tensor Gauss-Legendre on `[−R, R]³`.
    Cartesian { radius: f64, nodes_per_axis: usize },
    /// Gauss-Legendre in `|p| ∈ [0, R]` times a sphere rule of the given degree.
    Spherical { radius: f64, radial_nodes: usize, degree: usize },
}

impl MomentumRule {
    pub fn radius(&self) -> f64 {
        match self {
            MomentumRule::Cartesian { radius, .. } | MomentumRule::Spherical { radius, .. } => *radius,
        }
    }

    /// The same node counts on radius `radius`.
    pub fn with_radius(&self, radius: f64) -> Self {
        match *self {
            MomentumRule::Cartesian { nodes_per_axis, .. } => MomentumRule::Cartesian { radius, nodes_per_axis },
            MomentumRule::Spherical { radial_nodes, degree, .. } => MomentumRule::Spherical { radius, radial_nodes, degree },
        }
    }

    pub fn nodes(&self) -> Result<Vec<(Vec3, f64)>> {
        match *self {
            MomentumRule::Cartesian { radius, nodes_per_axis } => {
                if nodes_per_axis == 0 || !(radius > 0.0) {
                    return Err(Error::usage("cartesian momentum rule needs nodes and a positive radius"));
                }
                let axis: Vec<(f64, f64)> = gauss_legendre(nodes_per_axis).on(-radius, radius).collect();
                Ok(tensor3(&axis, &axis, &axis, Vec3::zeros()))
            }
            MomentumRule::Spherical { radius, radial_nodes, degree } => {
                if radial_nodes == 0 || !(radius > 0.0) {
                    return Err(Error::usage("spherical momentum rule needs nodes and a positive radius"));
                }
                let sphere = sphere_rule(degree)?;
                let mut out = Vec::with_capacity(radial_nodes * sphere.len());
                for (r, wr) in gauss_legendre(radial_nodes).on(0.0, radius) {
                    for (w, ww) in &sphere.nodes {
                        out.push((w.as_vec() * r, wr * ww * r * r));
                    }
                }
                Ok(out)
            }
        }
    }
}

impl Default for MomentumRule {
    fn default() -> Self {
        MomentumRule::Cartesian { radius: 8.0, nodes_per_axis: 32 }
    }
}

/// Tensor Gauss-Legendre rule on the cube `center + [−R, R]³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialRule {
    pub center: [f64; 3],
    pub radius: f64,
    pub nodes_per_axis: usize,
}

impl SpatialRule {
    pub fn nodes(&self) -> Result<Vec<(Vec3, f64)>> {
        if self.nodes_per_axis == 0 || !(self.radius > 0.0) {
            return Err(Error::usage("spatial rule needs nodes and a positive radius"));
        }
        let axis: Vec<(f64, f64)> = gauss_legendre(self.nodes_per_axis).on(-self.radius, self.radius).collect();
        Ok(tensor3(&axis, &axis, &axis, Vec3::from(self.center)))
    }
}

fn tensor3(a: &[(f64, f64)], b: &[(f64, f64)], c: &[(f64, f64)], shift: Vec3) -> Vec<(Vec3, f64)> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for (x, wx) in a {
        for (y, wy) in b {
            for (z, wz) in c {
                out.push((Vec3::new(*x, *y, *z) + shift, wx * wy * wz));
            }
        }
    }
    out
}

/// Rules for integrals over the whole phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRules {
    pub x: SpatialRule,
    pub p: MomentumRule,
}

fn check_momentum_cover(f: &dyn PhaseDensity, rule: &MomentumRule) -> Result<()> {
    let need = f.support_radius_p();
    if rule.radius() < need * (1.0 - 1e-12) {
        return Err(Error::usage(format!(
            "momentum rule radius {} does not cover the density support radius {need}",
            rule.radius()
        )));
    }
    Ok(())
}

fn check_spatial_cover(f: &dyn PhaseDensity, t: f64, rule: &SpatialRule) -> Result<()> {
    let offset = (Vec3::from(rule.center) - f.center_x()).amax();
    let need = f.support_radius_x(t) + offset;
    if rule.radius < need * (1.0 - 1e-12) {
        return Err(Error::usage(format!(
            "spatial rule half-width {} does not cover the density support (needs {need})",
            rule.radius
        )));
    }
    Ok(())
}

pub fn moments(f: &dyn PhaseDensity, t: f64, x: &Vec3, p_rule: &MomentumRule) -> Result<Moments> {
    check_momentum_cover(f, p_rule)?;
    let mut rho = 0.0;
    let mut j = Vec3::zeros();
    for (p, w) in p_rule.nodes()? {
        let val = w * f.evaluate(t, x, &p);
        rho += val;
        j += p / (1.0 + p.norm_squared()).sqrt() * val;
    }
    Ok(Moments { rho, j })
}

/// `∫∫ g(p) f(t,x,p) dx dp` with the x-integral innermost.
fn phase_integral(f: &dyn PhaseDensity, t: f64, rules: &PhaseRules, g: impl Fn(&Vec3) -> f64 + Sync) -> Result<f64> {
    check_momentum_cover(f, &rules.p)?;
    check_spatial_cover(f, t, &rules.x)?;
    let xs = rules.x.nodes()?;
    let ps = rules.p.nodes()?;
    let per_p: Vec<f64> = ps
        .par_iter()
        .map(|(p, wp)| {
            let inner: f64 = xs.iter().map(|(x, wx)| wx * f.evaluate(t, x, p)).sum();
            wp * g(p) * inner
        })
        .collect();
    Ok(per_p.iter().sum())
}

/// Total mass `∫∫ f dx dp`.
pub fn mass(f: &dyn PhaseDensity, t: f64, rules: &PhaseRules) -> Result<f64> {
    phase_integral(f, t, rules, |_| 1.0)
}

/// Kinetic energy `∫∫ √(1+p²) f dx dp`.
pub fn kinetic_energy(f: &dyn PhaseDensity, t: f64, rules: &PhaseRules) -> Result<f64> {
    phase_integral(f, t, rules, |p| (1.0 + p.norm_squared()).sqrt())
}
