//! Physical-space reconstruction of `u` on a periodic cube by inverse FFT of `û`.

use rustfft::FftPlanner;

use super::radial::FrozenTotal;
use super::SpectralRules;
use crate::density::PhaseDensity;
use crate::{Error, Result, Vec3, C64};

/// Box length `2.2 (R + t)`, enough to hold the support of `u` without wrap-around.
pub fn default_extent(f: &dyn PhaseDensity, t: f64) -> f64 {
    2.2 * (f.support_radius_x(t) + t)
}

/// Samples of a real field at `origin + spacing·(i, j, k)`, `0 ≤ i, j, k < size`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicField {
    pub origin: Vec3,
    pub spacing: f64,
    pub size: usize,
    /// Row-major, last index fastest.
    pub values: Vec<f64>,
}

impl CubicField {
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.size + j) * self.size + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// `(h³ Σ |u|^q)^{1/q}`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let cell = self.spacing.powi(3);
        let max = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let sum: f64 = self.values.iter().map(|v| (v.abs() / max).powf(q)).sum();
        max * (cell * sum).powf(1.0 / q)
    }
}

/// `u(t, ·)` on a `fft_size³` grid centered on the density, for
/// time-independent product densities. `extent` defaults to [`default_extent`].
pub fn reconstruct_u(t: f64, f: &dyn PhaseDensity, rules: &SpectralRules, extent: Option<f64>) -> Result<CubicField> {
    let size = rules.fft_size;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("reconstruct_u", format!("needs finite t ≥ 0, got {t}")));
    }
    if size < 8 || size % 2 != 0 {
        return Err(Error::usage(format!("reconstruction grid size must be even and at least 8, got {size}")));
    }
    let profile = match f.spectral() {
        Some(form) if !form.transported => form.profile,
        _ => {
            return Err(Error::usage(format!(
                "cubic reconstruction needs a time-independent product density, `{}` is not one",
                f.name()
            )))
        }
    };
    let length = extent.unwrap_or_else(|| default_extent(f, t));
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::usage(format!("reconstruction extent must be positive, got {length}")));
    }
    let n = size;
    let spacing = length / n as f64;
    let origin = f.center_x() - Vec3::repeat(0.5 * length);
    let total = FrozenTotal::new(profile, rules);
    let step = 2.0 * std::f64::consts::PI / length;
    let half = (n / 2) as i64;
    let radial: Vec<f64> = (0..=3 * half * half).map(|q| total.uhat_radial(t, step * (q as f64).sqrt())).collect();
    let wave = |i: usize| if (i as i64) < half { i as i64 } else { i as i64 - n as i64 };
    let scale = 1.0 / (length * length * length);
    let mut data = vec![C64::new(0.0, 0.0); n * n * n];
    for i in 0..n {
        let a = wave(i);
        for j in 0..n {
            let b = wave(j);
            for k in 0..n {
                let c = wave(k);
                let sign = if (a + b + c).rem_euclid(2) == 0 { scale } else { -scale };
                data[(i * n + j) * n + k] = C64::new(sign * radial[(a * a + b * b + c * c) as usize], 0.0);
            }
        }
    }
    inverse_fft3(&mut data, n);
    Ok(CubicField { origin, spacing, size: n, values: data.into_iter().map(|v| v.re).collect() })
}

fn inverse_fft3(data: &mut [C64], n: usize) {
    fft3(data, n, true)
}

/// Unnormalized DFT along all three axes of a row-major `n³` array; the
/// inverse direction uses `e^{+2πi k·x/n}`.
pub(crate) fn fft3(data: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(data);
    let mut line = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                line[j] = data[(i * n + j) * n + k];
            }
            fft.process(&mut line);
            for j in 0..n {
                data[(i * n + j) * n + k] = line[j];
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                line[i] = data[(i * n + j) * n + k];
            }
            fft.process(&mut line);
            for i in 0..n {
                data[(i * n + j) * n + k] = line[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::zero_density;

    #[test]
    fn zero_density_reconstructs_zero() {
        let u = reconstruct_u(1.0, &zero_density(), &SpectralRules { fft_size: 16, ..Default::default() }, None).unwrap();
        assert!(u.values.iter().all(|v| *v == 0.0));
        assert_eq!(u.lq_norm(2.5), 0.0);
    }

    #[test]
    fn inverse_fft_of_delta_is_constant() {
        let n = 8;
        let mut data = vec![C64::new(0.0, 0.0); n * n * n];
        data[0] = C64::new(1.0, 0.0);
        inverse_fft3(&mut data, n);
        assert!(data.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn lq_norm_of_constant() {
        let field = CubicField { origin: Vec3::zeros(), spacing: 0.5, size: 2, values: vec![2.0; 8] };
        assert!((field.lq_norm(3.0) - 2.0).abs() < 1e-15);
    }
}
