//! Bin layout for the triple partition and the quadrature panels aligned
//! with it.

use serde::{Deserialize, Serialize};

use crate::special::filters::UnitIntervalPartition;

/// Highest explicitly resolved index per partition role. Bin `cap + 1`
/// collects every higher index, so the bins of one role always sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinCaps {
    pub k: u32,
    pub m: u32,
    pub n: u32,
}

impl BinCaps {
    pub fn uniform(cap: u32) -> Self {
        BinCaps { k: cap, m: cap, n: cap }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.k as usize + 2, self.m as usize + 2, self.n as usize + 2)
    }

    pub fn len(&self) -> usize {
        let (a, b, c) = self.dims();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, k: usize, m: usize, n: usize) -> usize {
        let (_, b, c) = self.dims();
        (k * b + m) * c + n
    }
}

/// Which indices of one partition role a quadrature should cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Every bin up to the cap plus the remainder.
    Bins(u32),
    /// A single `ψ_i`.
    Single(u32),
    /// No window: the integrand is not localized in this variable.
    Whole,
}

impl Window {
    pub fn slots(&self) -> usize {
        match self {
            Window::Bins(cap) => *cap as usize + 2,
            Window::Single(_) | Window::Whole => 1,
        }
    }

    /// Window weights at `x ∈ [0, 1]` written into `out` (length [`Self::slots`]).
    #[inline]
    pub fn weights(&self, x: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let part = UnitIntervalPartition;
        match *self {
            Window::Bins(cap) => part.accumulate_bins(x, cap, out),
            Window::Whole => out[0] = 1.0,
            Window::Single(i) => {
                if x > 0.0 {
                    let (lo, hi) = part.support(i);
                    if x > lo && x <= hi {
                        part.for_each_active(x.min(1.0), |k, v| {
                            if k == i {
                                out[0] = v;
                            }
                        });
                    }
                }
            }
        }
    }

    /// Breakpoints in `x ∈ [0, 1]` of the window functions, including `0` and `1`.
    fn x_breaks(&self, half_octaves: bool) -> Vec<f64> {
        let part = UnitIntervalPartition;
        let mut out = vec![0.0];
        match *self {
            Window::Bins(cap) => out.extend(part.breakpoints(cap, half_octaves)),
            Window::Single(i) => out.extend(part.breakpoints(i, half_octaves)),
            Window::Whole => out.push(1.0),
        }
        out.dedup();
        out
    }

    /// Interval of `x` outside which the window vanishes.
    fn x_support(&self) -> (f64, f64) {
        match *self {
            Window::Single(i) => UnitIntervalPartition.support(i),
            _ => (0.0, 1.0),
        }
    }

    /// Panels of `[0, 1]` for a window applied to `u` itself (the `s/t` role).
    pub fn unit_panels(&self, half_octaves: bool) -> Vec<(f64, f64)> {
        let (lo, hi) = self.x_support();
        self.x_breaks(half_octaves)
            .windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|(a, b)| b > a && *a >= lo && *b <= hi)
            .collect()
    }

    /// Panels of `[−1, 1]` for a window applied to `√(1−σ²)`, refined
    /// geometrically toward `σ = −1` down to width `grade_to` when given.
    pub fn signed_panels(&self, half_octaves: bool, grade_to: Option<f64>) -> Vec<(f64, f64)> {
        let (lo, hi) = self.x_support();
        let mut breaks = vec![-1.0, 1.0];
        for x in self.x_breaks(half_octaves) {
            let c = cos_from_sin(x);
            breaks.push(c);
            breaks.push(-c);
        }
        if let Some(min) = grade_to {
            let mut d = 0.5;
            while d > min {
                d *= 0.5;
                breaks.push(-1.0 + d);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        breaks
            .windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|(a, b)| {
                let mid = 0.5 * (a + b);
                let x = sin_from_cos(mid);
                x > lo && x < hi
            })
            .collect()
    }
}

/// `√(1 − x²)` for `x ∈ [0, 1]`.
#[inline]
pub fn cos_from_sin(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// `√(1 − c²)` for `c ∈ [−1, 1]`, accurate near `|c| = 1`.
#[inline]
pub fn sin_from_cos(c: f64) -> f64 {
    ((1.0 - c) * (1.0 + c)).max(0.0).sqrt()
}

/// Gauss-Legendre nodes over panels with `n(a, b)` nodes each.
pub fn nodes_on(panels: &[(f64, f64)], n: impl Fn(f64, f64) -> usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in panels {
        let g = crate::special::gauss_legendre(n(a, b).max(1));
        out.extend(g.on(a, b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_sum_to_one() {
        let w = Window::Bins(4);
        let mut out = vec![0.0; w.slots()];
        for i in 0..=2000 {
            let x = i as f64 / 2000.0;
            w.weights(x, &mut out);
            let s: f64 = out.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn single_matches_bin() {
        let mut bins = vec![0.0; 6];
        let mut one = [0.0];
        for i in 1..=500 {
            let x = i as f64 / 500.0;
            Window::Bins(4).weights(x, &mut bins);
            for k in 0..=4 {
                Window::Single(k).weights(x, &mut one);
                assert_eq!(one[0], bins[k as usize]);
            }
        }
    }

    #[test]
    fn signed_panels_cover_support() {
        let panels = Window::Single(2).signed_panels(true, None);
        let total: f64 = panels.iter().map(|(a, b)| b - a).sum();
        // ψ₂ lives on x ∈ [1/16, 1/2]: |σ| ∈ [√(3/4), √(255/256)]
        let expect = 2.0 * ((255.0f64 / 256.0).sqrt() - 0.75f64.sqrt());
        assert!((total - expect).abs() < 1e-14);
        let all = Window::Bins(3).signed_panels(false, Some(1e-3));
        assert_eq!(all.first().unwrap().0, -1.0);
        assert_eq!(all.last().unwrap().1, 1.0);
        for w in all.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }
}
