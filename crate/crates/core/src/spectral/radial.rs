//! Closed form of `û` for time-independent product densities.
//!
//! For `f = X(x) P(|p|)` the momentum integral of the majorant kernel does
//! not depend on the direction, so `u = W ∫_{|y|≤t} X(x+y) |y|^{−2} dy` and
//! `û(t, ξ) = X̂(ξ) W 4π Si(t|ξ|)/|ξ|` with
//! `W = 2π ∫ ρ² P(ρ) (1+ρ²)⁻¹ ∫₋₁¹ (1+a(ρ)σ)^{−3/2} dσ dρ`.

use std::f64::consts::PI;

use super::direct::radial_momentum;
use super::oscillatory::focusing_integral;
use super::SpectralRules;
use crate::density::ProductProfile;
use crate::special::sine_integral;

pub struct FrozenTotal<'a> {
    profile: &'a dyn ProductProfile,
    /// `W`.
    pub weight: f64,
}

impl<'a> FrozenTotal<'a> {
    pub fn new(profile: &'a dyn ProductProfile, rules: &SpectralRules) -> Self {
        let weight = 2.0 * PI * radial_momentum(profile, rules).iter().map(|&(_, w, a, _)| w * focusing_integral(a)).sum::<f64>();
        FrozenTotal { profile, weight }
    }

    /// `4π Si(tr)/r`, the transform of the indicator of the ball of radius `t` weighted by `|y|^{−2}`.
    pub fn ball_transform(t: f64, r: f64) -> f64 {
        if t * r < 1e-8 {
            4.0 * PI * t
        } else {
            4.0 * PI * sine_integral(t * r) / r
        }
    }

    /// `û(t, ξ)` with the center phase removed, as a function of `r = |ξ|`.
    pub fn uhat_radial(&self, t: f64, r: f64) -> f64 {
        self.profile.spatial_transform_radial(r) * self.weight * Self::ball_transform(t, r)
    }
}
