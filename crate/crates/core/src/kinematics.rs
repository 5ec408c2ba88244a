//! Relativistic kinematics and the Glassey-Strauss integral kernels.
//!
//! Units have `c = 1`. A momentum `p` has velocity `v = p/√(1+p²)`, so
//! `|v| < 1` always and `1 + v·ω > 0` for every unit vector `ω`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::report::{Case, EstimateReport};
use crate::{Error, Mat3, Result, Vec3};

/// Relativistic momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum(pub Vec3);

/// Particle velocity, `|v| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity(Vec3);

/// Direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vec3);

impl Momentum {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Momentum(Vec3::new(x, y, z))
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `√(1+p²)`, the particle energy.
    pub fn energy(&self) -> f64 {
        (1.0 + self.norm_squared()).sqrt()
    }
}

impl Velocity {
    pub fn new(v: Vec3) -> Result<Self> {
        if !(v.norm_squared() < 1.0) {
            return Err(Error::domain("velocity", format!("|v| = {} is not below 1", v.norm())));
        }
        Ok(Velocity(v))
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }
}

impl UnitVector {
    pub const TOLERANCE: f64 = 1e-14;

    /// Normalizes `w`; fails for the zero vector or non-finite input.
    pub fn normalize(w: Vec3) -> Result<Self> {
        let n = w.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("unit_vector", "cannot normalize a zero or non-finite vector"));
        }
        Ok(UnitVector(w / n))
    }

    /// Accepts `w` only if it is already unit length within [`Self::TOLERANCE`].
    pub fn checked(w: Vec3) -> Result<Self> {
        if (w.norm() - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::domain("unit_vector", format!("|ω| = {} is not 1", w.norm())));
        }
        Ok(UnitVector(w))
    }

    pub(crate) fn new_unchecked(w: Vec3) -> Self {
        UnitVector(w)
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }
}

pub fn velocity_of(p: &Momentum) -> Velocity {
    Velocity(p.0 / p.energy())
}

pub fn momentum_of(v: &Velocity) -> Result<Momentum> {
    let gamma_inv_sq = 1.0 - v.0.norm_squared();
    if !(gamma_inv_sq > 0.0) {
        return Err(Error::domain("momentum_of", "|v| must be strictly below 1"));
    }
    if gamma_inv_sq <= 16.0 * f64::EPSILON {
        return Err(Error::domain("momentum_of", "|v| is within rounding of 1, the momentum is not resolved"));
    }
    let p = v.0 / gamma_inv_sq.sqrt();
    if !p.iter().all(|c| c.is_finite()) {
        return Err(Error::domain("momentum_of", "momentum overflows for |v| this close to 1"));
    }
    Ok(Momentum(p))
}

/// `1 + v·ω` evaluated as `(|v+ω|² + 1/(1+p²))/2`, which keeps full
/// relative accuracy when `ω` is nearly antipodal to a fast `v`.
pub fn one_plus_v_dot_omega(p: &Momentum, omega: &UnitVector) -> f64 {
    let v = p.0 / p.energy();
    let s = v + omega.0;
    0.5 * (s.norm_squared() + 1.0 / (1.0 + p.norm_squared()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    #[serde(rename = "E_T")]
    ET,
    #[serde(rename = "E_S")]
    ES,
    #[serde(rename = "E_DT")]
    EDT,
    #[serde(rename = "B_T")]
    BT,
    #[serde(rename = "B_DT")]
    BDT,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] =
        [KernelKind::ET, KernelKind::ES, KernelKind::EDT, KernelKind::BT, KernelKind::BDT];
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelKind::ET => "E_T",
            KernelKind::ES => "E_S",
            KernelKind::EDT => "E_DT",
            KernelKind::BT => "B_T",
            KernelKind::BDT => "B_DT",
        };
        f.write_str(s)
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E_T" => Ok(KernelKind::ET),
            "E_S" => Ok(KernelKind::ES),
            "E_DT" => Ok(KernelKind::EDT),
            "B_T" => Ok(KernelKind::BT),
            "B_DT" => Ok(KernelKind::BDT),
            "B_S" => Err(Error::usage(
                "kernel B_S is not available: its matrix form is not fully determined",
            )),
            other => Err(Error::usage(format!("unknown kernel kind `{other}`"))),
        }
    }
}

/// Value of a kernel at `(ω, p)`: a vector for `T`/`DT` kinds, a matrix for `E_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Vector { kind: KernelKind, value: Vec3 },
    Matrix { kind: KernelKind, value: Mat3 },
}

impl KernelValue {
    pub fn kind(&self) -> KernelKind {
        match self {
            KernelValue::Vector { kind, .. } | KernelValue::Matrix { kind, .. } => *kind,
        }
    }

    pub fn vector(&self) -> Option<Vec3> {
        match self {
            KernelValue::Vector { value, .. } => Some(*value),
            KernelValue::Matrix { .. } => None,
        }
    }

    pub fn matrix(&self) -> Option<Mat3> {
        match self {
            KernelValue::Matrix { value, .. } => Some(*value),
            KernelValue::Vector { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            KernelValue::Vector { value, .. } => value.iter().all(|c| c.is_finite()),
            KernelValue::Matrix { value, .. } => value.iter().all(|c| c.is_finite()),
        }
    }
}

pub fn kernel(kind: KernelKind, omega: &UnitVector, p: &Momentum) -> KernelValue {
    let w = omega.0;
    let p2 = p.norm_squared();
    let v = p.0 / (1.0 + p2).sqrt();
    let d = one_plus_v_dot_omega(p, omega);
    match kind {
        KernelKind::ET => KernelValue::Vector { kind, value: (v + w) / ((1.0 + p2) * d * d) },
        KernelKind::BT => KernelValue::Vector { kind, value: -v.cross(&w) / ((1.0 + p2) * d * d) },
        KernelKind::EDT => {
            let vw = v.dot(&w);
            KernelValue::Vector { kind, value: (w - v * vw) / d }
        }
        KernelKind::BDT => KernelValue::Vector { kind, value: -v.cross(&w) / d },
        KernelKind::ES => KernelValue::Matrix { kind, value: kernel_es(&v, &w, p2, d) },
    }
}

/// `(1+p²)^{-1/2}(1+v·ω)^{-2}[(1+v·ω)I + ((v·ω)ω − v)⊗v − (v+ω)⊗ω]`,
/// with `(a⊗b)z = a (b·z)`.
fn kernel_es(v: &Vec3, w: &Vec3, p2: f64, d: f64) -> Mat3 {
    let vw = v.dot(w);
    let a = w * vw - v;
    let b = v + w;
    let bracket = Mat3::identity() * d + a * v.transpose() - b * w.transpose();
    bracket / ((1.0 + p2).sqrt() * d * d)
}

/// Largest singular value of a 3×3 matrix.
pub fn operator_norm(m: &Mat3) -> f64 {
    let gram = m.transpose() * m;
    gram.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Sharp constant in `|K_{E,T}| ≤ C (1+p²)^{-1} (1+v·ω)^{-3/2}`.
pub const E_T_BOUND: f64 = std::f64::consts::SQRT_2;
/// Constant in `|K_{E,S} z| ≤ C (1+p²)^{-1/2} (1+v·ω)^{-1} |z|`.
pub const E_S_BOUND: f64 = 4.0;

/// Normalized kernel magnitudes at one sample.
#[derive(Debug, Clone, Copy)]
pub struct BoundRatios {
    pub tangential: f64,
    pub s_term: f64,
}

pub fn bound_ratios(omega: &UnitVector, p: &Momentum) -> BoundRatios {
    let p2 = p.norm_squared();
    let d = one_plus_v_dot_omega(p, omega);
    let kt = kernel(KernelKind::ET, omega, p).vector().unwrap_or_default();
    let ks = kernel(KernelKind::ES, omega, p).matrix().unwrap_or_default();
    BoundRatios {
        tangential: kt.norm() * (1.0 + p2) * d.powf(1.5),
        s_term: operator_norm(&ks) * (1.0 + p2).sqrt() * d,
    }
}

/// One deterministic `(ω, p)` draw; sample `index` always yields the same pair.
///
/// `|p|` is log-uniform on `[1e-3, 1e3]` with a uniform direction. Every
/// fourth sample places `ω` within `1e-6` radians of `−p/|p|`; the others
/// draw `ω` uniformly on the sphere.
pub fn kernel_sample(seed: u64, index: u64) -> (UnitVector, Momentum) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let dir = uniform_sphere(&mut rng);
    let mag = 10f64.powf(rng.gen_range(-3.0..=3.0));
    let p = Momentum(dir * mag);
    let omega = if index % 4 == 0 {
        let angle: f64 = rng.gen_range(0.0..1e-6);
        let axis = perpendicular(&dir, &uniform_sphere(&mut rng));
        -dir * angle.cos() + axis * angle.sin()
    } else {
        uniform_sphere(&mut rng)
    };
    (UnitVector::new_unchecked(omega / omega.norm()), p)
}

fn uniform_sphere<R: Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

fn perpendicular(axis: &Vec3, hint: &Vec3) -> Vec3 {
    let mut q = hint - axis * axis.dot(hint);
    if q.norm() < 1e-8 {
        let alt = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        q = alt - axis * axis.dot(&alt);
    }
    q.normalize()
}

/// Samples the kernel bounds and reports the observed suprema against the
/// constants [`E_T_BOUND`] and [`E_S_BOUND`].
pub fn verify_kernel_bounds(sample_count: u64, rng_seed: u64) -> Result<EstimateReport> {
    if sample_count == 0 {
        return Err(Error::usage("sample_count must be at least 1"));
    }
    use rayon::prelude::*;
    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<(f64, f64)> = (0..sample_count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let (mut st, mut ss) = (0.0_f64, 0.0_f64);
            for i in c * CHUNK..((c + 1) * CHUNK).min(sample_count) {
                let (w, p) = kernel_sample(rng_seed, i);
                let r = bound_ratios(&w, &p);
                st = st.max(r.tangential);
                ss = ss.max(r.s_term);
            }
            (st, ss)
        })
        .collect();
    let sup_t = chunks.iter().map(|c| c.0).fold(0.0, f64::max);
    let sup_s = chunks.iter().map(|c| c.1).fold(0.0, f64::max);
    let n = sample_count as f64;
    let cases = vec![
        Case::new(&[("samples", n)], sup_t, E_T_BOUND).labelled("E_T"),
        Case::new(&[("samples", n)], sup_s, E_S_BOUND).labelled("E_S"),
    ];
    let mut report = EstimateReport::with_constant("kernel_bounds", cases, 1.0).tolerance("ratio", 1e-12);
    report.require(sup_t.is_finite() && sup_s.is_finite(), "kernel ratios finite");
    Ok(report)
}
