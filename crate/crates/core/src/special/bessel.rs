//! Bessel function of the first kind of order zero.
//!
//! Three regimes: the power series below `r = 12`, Miller's backward
//! recurrence on `[12, 25)` and the Hankel asymptotic expansion beyond.
//! Absolute accuracy is about `1e-13` everywhere.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `J₀(r)` for `r ≥ 0`.
pub fn bessel_j0(r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::domain("bessel_j0", format!("argument {r} is negative")));
    }
    Ok(j0(r))
}

/// Unchecked `J₀`; `J₀` is even so negative arguments are folded.
#[inline]
pub fn j0(r: f64) -> f64 {
    let r = r.abs();
    if r < SERIES_LIMIT {
        series(r)
    } else if r < ASYMPTOTIC_LIMIT {
        miller(r)
    } else {
        hankel(r)
    }
}

fn series(r: f64) -> f64 {
    let q = -0.25 * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-3) {
            return sum;
        }
        k += 1.0;
    }
}

fn miller(r: f64) -> f64 {
    let start = (r + 40.0 + 6.0 * r.cbrt()) as usize;
    let start = start + (start % 2);
    let (mut next, mut cur) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / r * cur - next;
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j0 *= 1e-250;
        }
    }
    j0 / (norm + j0)
}

fn hankel(r: f64) -> f64 {
    // b_k = ∏_{i=1}^{k} (2i−1)² / (k! 8^k);  P = Σ (−1)^k b_{2k} r^{−2k},
    // Q = −Σ (−1)^k b_{2k+1} r^{−(2k+1)}.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut b = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        b *= (2.0 * kf - 1.0).powi(2) / (8.0 * kf * r);
        if b > prev || b < 1e-18 {
            break;
        }
        prev = b;
        match k % 4 {
            0 => p += b,
            1 => q -= b,
            2 => p -= b,
            _ => q += b,
        }
    }
    let (s, c) = r.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * r)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Leading term `√(2/(πr)) cos(r − π/4)` of the large-argument expansion.
pub fn j0_leading_asymptotic(r: f64) -> f64 {
    let (s, c) = r.sin_cos();
    (2.0 / (PI * r)).sqrt() * (c + s) * FRAC_1_SQRT_2
}

/// `sup |J₀(r)|·max(1, √r)` over the grid `0, h, 2h, …, r_max`.
pub fn j0_envelope_constant(r_max: f64, grid_step: f64) -> Result<f64> {
    if !(r_max >= 10.0) {
        return Err(Error::usage("j0_envelope_constant needs r_max ≥ 10"));
    }
    if !(grid_step > 0.0) {
        return Err(Error::usage("grid_step must be positive"));
    }
    let n = (r_max / grid_step).floor() as u64;
    Ok((0..=n)
        .map(|i| {
            let r = i as f64 * grid_step;
            j0(r).abs() * r.sqrt().max(1.0)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Trapezoidal rule for (1/π)∫₀^π cos(r sinθ) dθ; exponentially
    /// convergent for this periodic integrand.
    fn j0_by_integral(r: f64) -> f64 {
        let n = (2.0 * r) as usize + 200;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + 1.0);
        for i in 1..n {
            s += (r * (i as f64 * h).sin()).cos();
        }
        s / n as f64
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(bessel_j0(-1.0).is_err());
    }

    #[test]
    fn reference_values() {
        assert_abs_diff_eq!(j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-15);
        assert_abs_diff_eq!(j0(10.0), -0.245_935_764_451_348_3, epsilon = 1e-13);
        assert_abs_diff_eq!(j0(20.0), 0.167_024_664_340_583, epsilon = 1e-13);
        assert_abs_diff_eq!(j0(100.0), 0.019_985_850_304_223_12, epsilon = 1e-14);
    }

    #[test]
    fn first_zero() {
        // bisection on the power series as an independent locator
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if series(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(lo, 2.404_825_557_695_773, epsilon = 1e-14);
        assert_abs_diff_eq!(j0(2.404_825_557_695_773), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn agrees_with_defining_integral() {
        let mut r = 0.0;
        while r <= 60.0 {
            assert_abs_diff_eq!(j0(r), j0_by_integral(r), epsilon = 1e-12);
            r += 0.0137;
        }
    }

    #[test]
    fn regimes_join_continuously() {
        for edge in [SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
            let below = j0(edge - 1e-12);
            let above = j0(edge);
            assert_abs_diff_eq!(below, above, epsilon = 1e-12);
            assert_abs_diff_eq!(series(edge.min(12.0)), miller(edge.min(12.0)), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(miller(25.0), hankel(25.0), epsilon = 1e-13);
    }

    #[test]
    fn bounded_by_one() {
        for i in 0..20_000 {
            assert!(j0(i as f64 * 0.05).abs() <= 1.0);
        }
    }

    #[test]
    fn asymptotic_remainder_at_fifty() {
        let r: f64 = 50.0;
        assert!((j0(r) - j0_leading_asymptotic(r)).abs() <= 0.8 * r.powf(-1.5));
    }

    #[test]
    fn envelope_constant() {
        let c = j0_envelope_constant(1e4, 1e-3).unwrap();
        // the r = 0 grid point contributes exactly |J₀(0)| = 1
        assert_eq!(c, 1.0);
        assert!(j0_envelope_constant(5.0, 0.1).is_err());
    }
}
