//! Littlewood-Paley multipliers `φ_j` and the dyadic partition `ψ_k` of `]0, 1]`.
//!
//! Both are built from the smooth transition `h(t) = g(t)/(g(t) + g(1−t))`
//! with `g(t) = e^{−1/t}` for `t > 0`; `h` is exactly `0` for `t ≤ 0` and
//! exactly `1` for `t ≥ 1`, so supports hold without rounding leakage.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// The radial profile `φ₀(r) = h(2 − r)`: one on `r ≤ 1`, zero on `r ≥ 2`.
#[inline]
pub fn phi0(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

/// Dyadic Littlewood-Paley bank `φ_j(ξ) = φ₀(2^{−j}ξ) − φ₀(2^{−j+1}ξ)`, `φ_0 = φ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicFilterBank {
    pub j_max: u32,
}

impl DyadicFilterBank {
    pub fn new(j_max: u32) -> Self {
        DyadicFilterBank { j_max }
    }

    /// `φ_j` as a function of `|ξ|`.
    #[inline]
    pub fn radial(&self, j: u32, r: f64) -> f64 {
        let scale = (-(j as f64)).exp2();
        if j == 0 {
            phi0(r)
        } else {
            phi0(r * scale) - phi0(2.0 * r * scale)
        }
    }

    /// Closed shell `[2^{j−1}, 2^{j+1}]` outside which `φ_j` vanishes (`[0, 2]` for `j = 0`).
    pub fn shell(&self, j: u32) -> (f64, f64) {
        if j == 0 {
            (0.0, 2.0)
        } else {
            ((j as f64 - 1.0).exp2(), (j as f64 + 1.0).exp2())
        }
    }
}

pub fn lp_filter(bank: &DyadicFilterBank, j: u32, xi: &Vec3) -> f64 {
    bank.radial(j, xi.norm())
}

/// Smooth partition `ψ_k` of `]0, 1]` with `supp ψ₀ ⊆ [1/3, 1]` and
/// `supp ψ_k ⊆ [2^{−(k+2)}, 2^{−k+1}]` for `k ≥ 1`, normalized so the family
/// sums to one at every point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitIntervalPartition;

impl UnitIntervalPartition {
    /// Closed interval containing the support of `ψ_k`.
    pub fn support(&self, k: u32) -> (f64, f64) {
        if k == 0 {
            (1.0 / 3.0, 1.0)
        } else {
            ((-(k as f64 + 2.0)).exp2(), (1.0 - k as f64).exp2().min(1.0))
        }
    }

    fn raw(&self, k: u32, sigma: f64) -> f64 {
        if k == 0 {
            return smooth_step(3.0 * (sigma - 1.0 / 3.0));
        }
        let x = sigma.log2();
        let a = -(k as f64 + 2.0);
        let b = 1.0 - k as f64;
        smooth_step(2.0 * (x - a) / 3.0) * smooth_step(2.0 * (b - x) / 3.0)
    }

    /// Indices whose raw bump can be nonzero at `sigma`.
    fn candidates(sigma: f64) -> std::ops::RangeInclusive<u32> {
        let x = sigma.log2();
        let lo = (-x - 2.0).floor().max(1.0) as u32;
        let hi = (1.0 - x).ceil().max(1.0) as u32;
        lo..=hi
    }

    /// Calls `visit(k, ψ_k(σ))` for every nonzero member at `σ ∈ ]0, 1]`.
    pub fn for_each_active(&self, sigma: f64, mut visit: impl FnMut(u32, f64)) {
        let mut raw = [(0u32, 0.0f64); 8];
        let mut len = 0;
        let r0 = self.raw(0, sigma);
        if r0 > 0.0 {
            raw[0] = (0, r0);
            len = 1;
        }
        for k in Self::candidates(sigma) {
            let r = self.raw(k, sigma);
            if r > 0.0 {
                raw[len] = (k, r);
                len += 1;
            }
        }
        let total: f64 = raw[..len].iter().map(|(_, r)| r).sum();
        for &(k, r) in &raw[..len] {
            visit(k, r / total);
        }
    }

    /// All nonzero `(k, ψ_k(σ))` at `σ ∈ ]0, 1]`.
    pub fn active(&self, sigma: f64) -> Result<Vec<(u32, f64)>> {
        check_sigma(sigma)?;
        let mut out = Vec::with_capacity(4);
        self.for_each_active(sigma, |k, v| out.push((k, v)));
        Ok(out)
    }

    /// Adds `ψ_k(x)` into `bins[min(k, cap+1)]`; the last bin collects every
    /// index above `cap`, and `x ≤ 0` counts entirely toward it.
    #[inline]
    pub fn accumulate_bins(&self, x: f64, cap: u32, bins: &mut [f64]) {
        if x <= 0.0 {
            bins[cap as usize + 1] += 1.0;
            return;
        }
        self.for_each_active(x.min(1.0), |k, v| bins[k.min(cap + 1) as usize] += v);
    }

    /// Ascending points of `[2^{−(cap+2)}, 1]` where some `ψ_k`, `k ≤ cap`,
    /// fails to be analytic. With `half_octaves` false the midpoints
    /// `2^{−i−1/2}` of the transition layers are left out.
    pub fn breakpoints(&self, cap: u32, half_octaves: bool) -> Vec<f64> {
        let mut out = vec![1.0 / 3.0, 2.0 / 3.0];
        let steps = 2 * (cap + 2);
        for i in 0..=steps {
            if half_octaves || i % 2 == 0 {
                out.push((-(i as f64) / 2.0).exp2());
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn value(&self, k: u32, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        let (lo, hi) = self.support(k);
        if sigma <= lo || sigma > hi || (k > 0 && sigma >= hi) {
            return Ok(0.0);
        }
        Ok(self.active(sigma)?.into_iter().find(|(i, _)| *i == k).map_or(0.0, |(_, v)| v))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::domain("unit_partition", format!("σ = {sigma} is outside ]0, 1]")));
    }
    Ok(())
}

pub fn unit_partition(part: &UnitIntervalPartition, k: u32, sigma: f64) -> Result<f64> {
    part.value(k, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn radial(r: f64) -> Vec3 {
        Vec3::new(r / 3f64.sqrt(), r / 3f64.sqrt(), r / 3f64.sqrt())
    }

    #[test]
    fn phi_vanishes_on_lower_edge() {
        let bank = DyadicFilterBank::new(10);
        assert_eq!(lp_filter(&bank, 1, &Vec3::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(lp_filter(&bank, 3, &Vec3::new(0.0, 32.0, 0.0)), 0.0);
    }

    #[test]
    fn phi_partition_at_ten() {
        let bank = DyadicFilterBank::new(6);
        let xi = Vec3::new(6.0, 8.0, 0.0);
        let s: f64 = (0..=6).map(|j| lp_filter(&bank, j, &xi)).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn psi_examples() {
        let part = UnitIntervalPartition;
        assert_eq!(unit_partition(&part, 0, 0.2).unwrap(), 0.0);
        assert_eq!(unit_partition(&part, 2, 0.6).unwrap(), 0.0);
        let s: f64 = (0..=4).map(|k| unit_partition(&part, k, 0.7).unwrap()).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
        assert_eq!(unit_partition(&part, 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn psi_domain() {
        let part = UnitIntervalPartition;
        assert!(unit_partition(&part, 0, 0.0).is_err());
        assert!(unit_partition(&part, 0, 1.5).is_err());
    }

    #[test]
    fn psi_partition_on_log_grid() {
        let part = UnitIntervalPartition;
        for i in 0..=6000 {
            let sigma = 10f64.powf(-6.0 * i as f64 / 6000.0);
            let act = part.active(sigma).unwrap();
            let s: f64 = act.iter().map(|(_, v)| v).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
            for (k, v) in act {
                let (lo, hi) = part.support(k);
                assert!(v > 0.0 && sigma > lo && sigma <= hi, "k={k} σ={sigma}");
                assert_eq!(part.value(k, sigma).unwrap(), v);
            }
        }
    }

    proptest! {
        #[test]
        fn phi_support_is_exact(j in 1u32..20, r in 0.0..4e6f64) {
            let bank = DyadicFilterBank::new(20);
            let v = bank.radial(j, r);
            let (lo, hi) = bank.shell(j);
            if r <= lo || r >= hi {
                prop_assert_eq!(v, 0.0);
            }
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn phi_partition_property(r in 0.0..1024.0f64) {
            let bank = DyadicFilterBank::new(10);
            let s: f64 = (0..=10).map(|j| lp_filter(&bank, j, &radial(r))).sum();
            prop_assert!((s - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn psi_support_is_exact(k in 0u32..30, sigma in 1e-9..=1.0f64) {
            let part = UnitIntervalPartition;
            let v = part.value(k, sigma).unwrap();
            let (lo, hi) = part.support(k);
            if sigma <= lo || sigma > hi {
                prop_assert_eq!(v, 0.0);
            }
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
