//! Backward-light-cone quadrature for the majorant `u`, the tangential fields
//! `E_T`, `B_T`, the S-term `E_S` and the data terms.
//!
//! Cone integrals use `y = sω`, so `dy/|y|² = ds dS(ω)` and
//! `dy/|y| = s ds dS(ω)`. For time-independent product densities
//! `f = X(x)P(|p|)` the momentum integral is folded into per-direction
//! weights once, and each field point costs one spatial evaluation per
//! `(s, ω)` node.

use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{MomentumRule, PhaseDensity, ProductProfile};
use crate::kinematics::{kernel, KernelKind, Momentum, UnitVector};
use crate::special::quadrature::{gauss_legendre, sphere_rule, SphereRule};
use crate::{Error, Mat3, Result, Vec3};

/// A prescribed vector field `(t, x) ↦ F(t, x)`.
pub trait VectorField: Send + Sync {
    fn at(&self, t: f64, x: &Vec3) -> Vec3;
}

impl<F: Fn(f64, &Vec3) -> Vec3 + Send + Sync> VectorField for F {
    fn at(&self, t: f64, x: &Vec3) -> Vec3 {
        self(t, x)
    }
}

/// Resolution of the cone quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeRule {
    /// Gauss-Legendre nodes in `s ∈ (0, t)`.
    pub radial_nodes: usize,
    pub sphere_degree: usize,
    /// Node counts; the radius is shrunk onto the momentum support of the density.
    pub momentum: MomentumRule,
}

impl Default for ConeRule {
    fn default() -> Self {
        ConeRule { radial_nodes: 48, sphere_degree: 35, momentum: MomentumRule::Spherical { radius: 8.0, radial_nodes: 32, degree: 23 } }
    }
}

impl ConeRule {
    pub fn radial(&self, t: f64) -> Vec<(f64, f64)> {
        gauss_legendre(self.radial_nodes).on(0.0, t).collect()
    }

    /// The same rule with radial and angular resolution doubled.
    pub fn refined(&self) -> Self {
        ConeRule { radial_nodes: 2 * self.radial_nodes, sphere_degree: 2 * self.sphere_degree + 1, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleValue {
    Scalar(f64),
    Vector(Vec3),
}

/// A field value at one space-time point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub field: String,
    pub t: f64,
    pub x: Vec3,
    pub value: SampleValue,
}

/// Data terms at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataTerms {
    pub e_d: Vec3,
    pub e_dt: Vec3,
    pub b_d: Vec3,
    pub b_dt: Vec3,
}

/// Momentum-integrated kernels `∫ P(|p|) K(ω, p) dp` at each sphere node.
#[derive(Debug)]
struct TangentialWeights {
    u: Vec<f64>,
    e_t: Vec<Vec3>,
    b_t: Vec<Vec3>,
    e_dt: Vec<Vec3>,
    b_dt: Vec<Vec3>,
}

/// `∫ P K_{E,S} dp` and `∫ P K_{E,S} [v]_× dp` at each sphere node.
#[derive(Debug)]
struct SWeights {
    e: Vec<Mat3>,
    b: Vec<Mat3>,
}

/// Majorant kernel `(1+p²)^{-1}(1+v·ω)^{-3/2}`.
#[inline]
pub fn majorant_kernel(omega: &Vec3, p: &Vec3) -> f64 {
    let g = 1.0 / (1.0 + p.norm_squared());
    let v = p * g.sqrt();
    let d = 0.5 * ((v + omega).norm_squared() + g);
    g / (d * d.sqrt())
}

fn cross_matrix(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Cone quadrature bound to one density and one rule.
pub struct ConeEvaluator<'a> {
    f: &'a dyn PhaseDensity,
    rule: ConeRule,
    sphere: SphereRule,
    p_nodes: Vec<(Vec3, f64)>,
    product: Option<&'a dyn ProductProfile>,
    tangential: OnceLock<TangentialWeights>,
    s_weights: OnceLock<SWeights>,
}

impl<'a> ConeEvaluator<'a> {
    /// Uses the product fast path whenever `f` exposes one.
    pub fn new(f: &'a dyn PhaseDensity, rule: ConeRule) -> Result<Self> {
        let product = f.product();
        Self::build(f, rule, product)
    }

    /// Always integrates over `(s, ω, p)` node by node.
    pub fn generic(f: &'a dyn PhaseDensity, rule: ConeRule) -> Result<Self> {
        Self::build(f, rule, None)
    }

    fn build(f: &'a dyn PhaseDensity, rule: ConeRule, product: Option<&'a dyn ProductProfile>) -> Result<Self> {
        if rule.radial_nodes == 0 {
            return Err(Error::usage("cone rule needs at least one radial node"));
        }
        let need = f.support_radius_p();
        if rule.momentum.radius() < need * (1.0 - 1e-12) {
            return Err(Error::usage(format!(
                "momentum rule radius {} does not cover the density support radius {need}",
                rule.momentum.radius()
            )));
        }
        Ok(ConeEvaluator {
            f,
            rule,
            sphere: sphere_rule(rule.sphere_degree)?,
            p_nodes: if need > 0.0 { rule.momentum.with_radius(need).nodes()? } else { rule.momentum.nodes()? },
            product,
            tangential: OnceLock::new(),
            s_weights: OnceLock::new(),
        })
    }

    pub fn rule(&self) -> &ConeRule {
        &self.rule
    }

    pub fn uses_product_path(&self) -> bool {
        self.product.is_some()
    }

    fn profile_weights(&self, profile: &dyn ProductProfile) -> Vec<(Vec3, f64)> {
        self.p_nodes
            .iter()
            .map(|(p, w)| (*p, w * profile.momentum_radial(p.norm())))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    fn tangential_weights(&self, profile: &dyn ProductProfile) -> &TangentialWeights {
        self.tangential.get_or_init(|| {
            let pw = self.profile_weights(profile);
            let rows: Vec<(f64, Vec3, Vec3, Vec3, Vec3)> = self
                .sphere
                .nodes
                .par_iter()
                .map(|(omega, _)| {
                    let mut acc = (0.0, Vec3::zeros(), Vec3::zeros(), Vec3::zeros(), Vec3::zeros());
                    for (p, w) in &pw {
                        let m = Momentum(*p);
                        acc.0 += w * majorant_kernel(omega.as_vec(), p);
                        acc.1 += kernel(KernelKind::ET, omega, &m).vector().expect("vector kernel") * *w;
                        acc.2 += kernel(KernelKind::BT, omega, &m).vector().expect("vector kernel") * *w;
                        acc.3 += kernel(KernelKind::EDT, omega, &m).vector().expect("vector kernel") * *w;
                        acc.4 += kernel(KernelKind::BDT, omega, &m).vector().expect("vector kernel") * *w;
                    }
                    acc
                })
                .collect();
            TangentialWeights {
                u: rows.iter().map(|r| r.0).collect(),
                e_t: rows.iter().map(|r| r.1).collect(),
                b_t: rows.iter().map(|r| r.2).collect(),
                e_dt: rows.iter().map(|r| r.3).collect(),
                b_dt: rows.iter().map(|r| r.4).collect(),
            }
        })
    }

    fn s_weights(&self, profile: &dyn ProductProfile) -> &SWeights {
        self.s_weights.get_or_init(|| {
            let pw = self.profile_weights(profile);
            let rows: Vec<(Mat3, Mat3)> = self
                .sphere
                .nodes
                .par_iter()
                .map(|(omega, _)| {
                    let mut e = Mat3::zeros();
                    let mut b = Mat3::zeros();
                    for (p, w) in &pw {
                        let k = kernel(KernelKind::ES, omega, &Momentum(*p)).matrix().expect("matrix kernel") * *w;
                        let v = p / (1.0 + p.norm_squared()).sqrt();
                        e += k;
                        b += k * cross_matrix(&v);
                    }
                    (e, b)
                })
                .collect();
            SWeights { e: rows.iter().map(|r| r.0).collect(), b: rows.iter().map(|r| r.1).collect() }
        })
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::domain("cone quadrature", format!("needs finite t ≥ 0, got {t}")));
        }
        Ok(())
    }

    /// `Σ_s Σ_ω Σ_p w g(ω, p) f(t−s, x+sω, p)` on the generic path, with an
    /// extra factor `s` when `s_weighted`.
    fn generic_sum<T>(&self, t: f64, x: &Vec3, zero: T, s_weighted: bool, g: impl Fn(f64, &Vec3, &UnitVector, &Vec3) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Copy,
    {
        let mut total = zero;
        let center = self.f.center_x();
        for (s, ws) in self.rule.radial(t) {
            let tau = t - s;
            let reach = self.f.support_radius_x(tau);
            let mut shell = zero;
            for (omega, wo) in &self.sphere.nodes {
                let y = x + omega.as_vec() * s;
                if (y - center).norm() > reach {
                    continue;
                }
                let mut inner = zero;
                for (p, wp) in &self.p_nodes {
                    let fv = self.f.evaluate(tau, &y, p);
                    if fv != 0.0 {
                        inner = inner + g(tau, &y, omega, p) * (wp * fv);
                    }
                }
                shell = shell + inner * *wo;
            }
            total = total + shell * if s_weighted { ws * s } else { ws };
        }
        total
    }

    /// `Σ_s Σ_ω w X(x+sω) c_ω` on the product path.
    fn product_sum<T>(&self, profile: &dyn ProductProfile, t: f64, x: &Vec3, zero: T, s_weighted: bool, c: impl Fn(usize, f64, &Vec3) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Copy,
    {
        let mut total = zero;
        for (s, ws) in self.rule.radial(t) {
            let mut shell = zero;
            for (i, (omega, wo)) in self.sphere.nodes.iter().enumerate() {
                let y = x + omega.as_vec() * s;
                let xv = profile.spatial(&y);
                if xv != 0.0 {
                    shell = shell + c(i, t - s, &y) * (wo * xv);
                }
            }
            total = total + shell * if s_weighted { ws * s } else { ws };
        }
        total
    }

    pub fn majorant_u(&self, t: f64, x: &Vec3) -> Result<f64> {
        Self::check_time(t)?;
        Ok(match self.product {
            Some(profile) => {
                let w = &self.tangential_weights(profile).u;
                self.product_sum(profile, t, x, 0.0, false, |i, _, _| w[i])
            }
            None => self.generic_sum(t, x, 0.0, false, |_, _, omega, p| majorant_kernel(omega.as_vec(), p)),
        })
    }

    fn vector_kernel_field(&self, t: f64, x: &Vec3, kind: KernelKind) -> Result<Vec3> {
        Self::check_time(t)?;
        Ok(match self.product {
            Some(profile) => {
                let tw = self.tangential_weights(profile);
                let w = if kind == KernelKind::ET { &tw.e_t } else { &tw.b_t };
                self.product_sum(profile, t, x, Vec3::zeros(), false, |i, _, _| w[i])
            }
            None => self.generic_sum(t, x, Vec3::zeros(), false, |_, _, omega, p| {
                kernel(kind, omega, &Momentum(*p)).vector().expect("vector kernel")
            }),
        })
    }

    pub fn field_e_t(&self, t: f64, x: &Vec3) -> Result<Vec3> {
        Ok(-self.vector_kernel_field(t, x, KernelKind::ET)?)
    }

    /// `(u, E_T)` from one pass over the cone nodes.
    pub fn majorant_and_e_t(&self, t: f64, x: &Vec3) -> Result<(f64, Vec3)> {
        Self::check_time(t)?;
        let zero = nalgebra::Vector4::zeros();
        let v = match self.product {
            Some(profile) => {
                let tw = self.tangential_weights(profile);
                self.product_sum(profile, t, x, zero, false, |i, _, _| {
                    let e = tw.e_t[i];
                    nalgebra::Vector4::new(tw.u[i], e.x, e.y, e.z)
                })
            }
            None => self.generic_sum(t, x, zero, false, |_, _, omega, p| {
                let e = kernel(KernelKind::ET, omega, &Momentum(*p)).vector().expect("vector kernel");
                nalgebra::Vector4::new(majorant_kernel(omega.as_vec(), p), e.x, e.y, e.z)
            }),
        };
        Ok((v[0], -Vec3::new(v[1], v[2], v[3])))
    }

    pub fn field_b_t(&self, t: f64, x: &Vec3) -> Result<Vec3> {
        self.vector_kernel_field(t, x, KernelKind::BT)
    }

    /// `E_S` for prescribed fields, with `K_{E,S}` applied to `(E + v∧B) f`.
    pub fn field_e_s(&self, t: f64, x: &Vec3, e: &dyn VectorField, b: &dyn VectorField) -> Result<Vec3> {
        Self::check_time(t)?;
        let sum = match self.product {
            Some(profile) => {
                let sw = self.s_weights(profile);
                self.product_sum(profile, t, x, Vec3::zeros(), true, |i, tau, y| sw.e[i] * e.at(tau, y) + sw.b[i] * b.at(tau, y))
            }
            None => self.generic_sum(t, x, Vec3::zeros(), true, |tau, y, omega, p| {
                let v = p / (1.0 + p.norm_squared()).sqrt();
                let force = e.at(tau, y) + v.cross(&b.at(tau, y));
                kernel(KernelKind::ES, omega, &Momentum(*p)).matrix().expect("matrix kernel") * force
            }),
        };
        Ok(-sum)
    }

    /// `E_D`, `E_DT`, `B_D`, `B_DT` with this evaluator's density read as the
    /// initial datum `f⁽⁰⁾ = f(0, ·, ·)`. `e1`, `b1` are the initial time
    /// derivatives of the fields. The time derivative of the spherical mean
    /// uses a centered difference of step `1e-4·max(t, 1)`.
    pub fn data_terms(&self, t: f64, x: &Vec3, e0: &dyn VectorField, b0: &dyn VectorField, e1: &dyn VectorField, b1: &dyn VectorField) -> Result<DataTerms> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain("field_data_terms", format!("the 1/t factor needs t > 0, got {t}")));
        }
        let h = 1e-4 * t.max(1.0);
        let mean = |field: &dyn VectorField, r: f64| -> Vec3 {
            let mut acc = Vec3::zeros();
            for (omega, w) in &self.sphere.nodes {
                acc += field.at(0.0, &(x + omega.as_vec() * r)) * *w;
            }
            acc * (r / (4.0 * std::f64::consts::PI))
        };
        let e_d = (mean(e0, t + h) - mean(e0, t - h)) / (2.0 * h) + mean(e1, t);
        let b_d = (mean(b0, t + h) - mean(b0, t - h)) / (2.0 * h) + mean(b1, t);

        let (e_dt, b_dt) = match self.product {
            Some(profile) => {
                let tw = self.tangential_weights(profile);
                let mut e = Vec3::zeros();
                let mut b = Vec3::zeros();
                for (i, (omega, w)) in self.sphere.nodes.iter().enumerate() {
                    let xv = profile.spatial(&(x + omega.as_vec() * t));
                    e += tw.e_dt[i] * (w * xv);
                    b += tw.b_dt[i] * (w * xv);
                }
                (e, b)
            }
            None => {
                let mut e = Vec3::zeros();
                let mut b = Vec3::zeros();
                for (omega, w) in &self.sphere.nodes {
                    let y = x + omega.as_vec() * t;
                    for (p, wp) in &self.p_nodes {
                        let fv = self.f.evaluate(0.0, &y, p);
                        if fv == 0.0 {
                            continue;
                        }
                        let m = Momentum(*p);
                        let scale = w * wp * fv;
                        e += kernel(KernelKind::EDT, omega, &m).vector().expect("vector kernel") * scale;
                        b += kernel(KernelKind::BDT, omega, &m).vector().expect("vector kernel") * scale;
                    }
                }
                (e, b)
            }
        };
        Ok(DataTerms { e_d, e_dt: -e_dt * t, b_d, b_dt: b_dt * t })
    }

    /// `u`, `E_T` and `B_T` at every point, in input order.
    pub fn snapshot(&self, t: f64, points: &[Vec3]) -> Result<Vec<FieldSample>> {
        Self::check_time(t)?;
        let rows: Vec<Result<[FieldSample; 3]>> = points
            .par_iter()
            .map(|x| {
                Ok([
                    FieldSample { field: "u".into(), t, x: *x, value: SampleValue::Scalar(self.majorant_u(t, x)?) },
                    FieldSample { field: "E_T".into(), t, x: *x, value: SampleValue::Vector(self.field_e_t(t, x)?) },
                    FieldSample { field: "B_T".into(), t, x: *x, value: SampleValue::Vector(self.field_b_t(t, x)?) },
                ])
            })
            .collect();
        let mut out = Vec::with_capacity(3 * points.len());
        for r in rows {
            out.extend(r?);
        }
        Ok(out)
    }
}

pub fn majorant_u(t: f64, x: &Vec3, f: &dyn PhaseDensity, rule: &ConeRule) -> Result<f64> {
    ConeEvaluator::new(f, *rule)?.majorant_u(t, x)
}

pub fn field_e_t(t: f64, x: &Vec3, f: &dyn PhaseDensity, rule: &ConeRule) -> Result<Vec3> {
    ConeEvaluator::new(f, *rule)?.field_e_t(t, x)
}

pub fn field_b_t(t: f64, x: &Vec3, f: &dyn PhaseDensity, rule: &ConeRule) -> Result<Vec3> {
    ConeEvaluator::new(f, *rule)?.field_b_t(t, x)
}

pub fn field_e_s(t: f64, x: &Vec3, f: &dyn PhaseDensity, e: &dyn VectorField, b: &dyn VectorField, rule: &ConeRule) -> Result<Vec3> {
    ConeEvaluator::new(f, *rule)?.field_e_s(t, x, e, b)
}

#[allow(clippy::too_many_arguments)]
pub fn field_data_terms(
    t: f64,
    x: &Vec3,
    e0: &dyn VectorField,
    b0: &dyn VectorField,
    e1: &dyn VectorField,
    b1: &dyn VectorField,
    f0: &dyn PhaseDensity,
    rule: &ConeRule,
) -> Result<DataTerms> {
    ConeEvaluator::new(f0, *rule)?.data_terms(t, x, e0, b0, e1, b1)
}

/// Writes samples as CSV with columns `t,x1,x2,x3,component,value`; vector
/// components are suffixed `_1`, `_2`, `_3`.
pub fn write_snapshot_csv<W: Write>(mut w: W, samples: &[FieldSample]) -> std::io::Result<()> {
    use crate::report::fmt_num;
    writeln!(w, "t,x1,x2,x3,component,value")?;
    for s in samples {
        let prefix = format!("{},{},{},{}", fmt_num(s.t), fmt_num(s.x[0]), fmt_num(s.x[1]), fmt_num(s.x[2]));
        match s.value {
            SampleValue::Scalar(v) => writeln!(w, "{prefix},{},{}", s.field, fmt_num(v))?,
            SampleValue::Vector(v) => {
                for d in 0..3 {
                    writeln!(w, "{prefix},{}_{},{}", s.field, d + 1, fmt_num(v[d]))?;
                }
            }
        }
    }
    Ok(())
}
