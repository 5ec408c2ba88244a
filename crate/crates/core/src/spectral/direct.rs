//! Direct quadrature of `û` in the form
//! `2π ∫₀ᵗ ds ∫ dp (1+p²)⁻¹ f̂(t−s, ξ, p) ∫₋₁¹ dσ e^{isσ ξ·v̄} (1+|v|σ)^{−3/2} J₀(s|ξ| √(1−(ξ̄·v̄)²) √(1−σ²))`
//! with optional windows `ψ_k(s/t)`, `ψ_m(√(1−σ²))`, `ψ_n(√(1−(ξ̄·v̄)²))`.

use std::f64::consts::TAU;

use super::windows::{nodes_on, sin_from_cos, Window};
use super::SpectralRules;
use crate::density::{PhaseDensity, ProductProfile};
use crate::special::bessel::j0;
use crate::{Error, Result, Vec3, C64};

/// Windows applied in the three partition roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Windows {
    pub k: Window,
    pub m: Window,
    pub n: Window,
}

impl Windows {
    pub const WHOLE: Windows = Windows { k: Window::Whole, m: Window::Whole, n: Window::Whole };

    pub fn slots(&self) -> usize {
        self.k.slots() * self.m.slots() * self.n.slots()
    }

    #[inline]
    fn index(&self, k: usize, m: usize, n: usize) -> usize {
        (k * self.m.slots() + m) * self.n.slots() + n
    }
}

/// `(ρ, w ρ² P(ρ)/(1+ρ²), |v|, 1−|v|)` on the momentum radius of a product profile.
pub(crate) fn radial_momentum(profile: &dyn ProductProfile, rules: &SpectralRules) -> Vec<(f64, f64, f64, f64)> {
    let r = profile.radius_p();
    let panels = [(0.0, 0.5 * r), (0.5 * r, r)];
    nodes_on(&panels, |_, _| rules.momentum_nodes)
        .into_iter()
        .filter_map(|(rho, w)| {
            let weight = w * rho * rho * profile.momentum_radial(rho) / (1.0 + rho * rho);
            let e = (1.0 + rho * rho).sqrt();
            (weight != 0.0).then(|| (rho, weight, rho / e, 1.0 / (e * (e + rho))))
        })
        .collect()
}

/// `(1 + aσ)^{−3/2}` from `1 − a` without cancellation.
#[inline]
pub(crate) fn focusing(one_minus_a: f64, a: f64, sigma: f64) -> f64 {
    let d = one_minus_a + a * (1.0 + sigma);
    1.0 / (d * d.sqrt())
}

/// Smallest `1 − |v|` carried by the momentum nodes, used to grade the σ panels.
fn grading(min_one_minus_a: f64) -> Option<f64> {
    Some((0.25 * min_one_minus_a).min(0.25))
}

/// Block values `û` restricted by `win`, indexed by [`Windows`] slot order.
pub fn direct_blocks(f: &dyn PhaseDensity, t: f64, xi: &Vec3, rules: &SpectralRules, win: Windows) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); win.slots()];
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("uhat", format!("needs finite t ≥ 0, got {t}")));
    }
    if t == 0.0 {
        if f.fourier_x(0.0, xi, &Vec3::zeros()).is_none() {
            return Err(missing_transform(f));
        }
        return Ok(out);
    }
    match f.spectral() {
        Some(form) => {
            let xhat = form.profile.spatial_hat(xi);
            if xhat == C64::new(0.0, 0.0) {
                return Ok(out);
            }
            let inner = if form.transported {
                product_blocks(form.profile, true, t, xi.norm(), rules, win)
            } else {
                product_blocks(form.profile, false, t, xi.norm(), rules, win)
            };
            for (o, v) in out.iter_mut().zip(inner) {
                *o = v * xhat;
            }
            Ok(out)
        }
        None => generic_blocks(f, t, xi, rules, win),
    }
}

fn missing_transform(f: &dyn PhaseDensity) -> Error {
    Error::usage(format!("density `{}` provides no spatial Fourier transform", f.name()))
}

/// `s` nodes `(s, w, ψ-slot weights)` for the `k` window.
fn s_nodes(t: f64, r: f64, rules: &SpectralRules, win: Window) -> Vec<(f64, f64, Vec<f64>)> {
    let freq = 2.0 * r * t;
    let panels = win.unit_panels(true);
    nodes_on(&panels, |a, b| rules.nodes_for(freq * (b - a)))
        .into_iter()
        .map(|(u, w)| {
            let mut ww = vec![0.0; win.slots()];
            win.weights(u, &mut ww);
            (u * t, w * t, ww)
        })
        .filter(|(_, _, ww)| ww.iter().any(|v| *v != 0.0))
        .collect()
}

/// Nodes `(c, w, ψ-slot weights of √(1−c²))` on `[−1, 1]` for a window.
fn signed_nodes(freq: f64, rules: &SpectralRules, win: Window, grade: Option<f64>) -> Vec<(f64, f64, Vec<f64>)> {
    let panels = win.signed_panels(true, grade);
    nodes_on(&panels, |a, b| rules.nodes_for(freq * (b - a)))
        .into_iter()
        .map(|(c, w)| {
            let mut ww = vec![0.0; win.slots()];
            win.weights(sin_from_cos(c), &mut ww);
            (c, w, ww)
        })
        .filter(|(_, _, ww)| ww.iter().any(|v| *v != 0.0))
        .collect()
}

/// Product profiles: `(2π)² ∫ds ψ_k ∫dc ψ_n ∫dσ ψ_m e^{isσrc} J₀(·) Σ_ρ w_ρ (1+a_ρσ)^{−3/2} [e^{−i(t−s) r a_ρ c}]`.
fn product_blocks(profile: &dyn ProductProfile, transported: bool, t: f64, r: f64, rules: &SpectralRules, win: Windows) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); win.slots()];
    let rho = radial_momentum(profile, rules);
    if rho.is_empty() {
        return out;
    }
    let min_gap = rho.iter().map(|q| q.3).fold(1.0, f64::min);
    let ss = s_nodes(t, r, rules, win.k);
    let cs = signed_nodes(2.0 * t * r, rules, win.n, None);
    let sigmas = signed_nodes(2.0 * t * r, rules, win.m, grading(min_gap));
    // D[σ][ρ] = w_ρ (1 + a_ρ σ)^{−3/2}
    let table: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|(sigma, _, _)| rho.iter().map(|&(_, w, a, gap)| w * focusing(gap, a, *sigma)).collect())
        .collect();
    let frozen: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let (km, mm, nm) = (win.k.slots(), win.m.slots(), win.n.slots());
    let mut acc_m = vec![C64::new(0.0, 0.0); mm];
    let mut phases = vec![C64::new(0.0, 0.0); rho.len()];
    for (s, ws, wk) in &ss {
        for (c, wc, wn) in &cs {
            let xc = sin_from_cos(*c);
            if transported {
                let tau = t - s;
                for (ph, q) in phases.iter_mut().zip(&rho) {
                    *ph = C64::from_polar(1.0, -tau * r * q.2 * c);
                }
            }
            acc_m.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
            for (i, (sigma, wsig, wm)) in sigmas.iter().enumerate() {
                let xs = sin_from_cos(*sigma);
                let base = C64::from_polar(wsig * j0(s * r * xc * xs), s * sigma * r * c);
                let weight = if transported {
                    table[i].iter().zip(&phases).map(|(d, ph)| ph * *d).sum::<C64>()
                } else {
                    C64::new(frozen[i], 0.0)
                };
                let v = base * weight;
                for (a, m) in acc_m.iter_mut().zip(wm) {
                    if *m != 0.0 {
                        *a += v * *m;
                    }
                }
            }
            let scale = ws * wc * TAU * TAU;
            for k in 0..km {
                if wk[k] == 0.0 {
                    continue;
                }
                for n in 0..nm {
                    if wn[n] == 0.0 {
                        continue;
                    }
                    let w = scale * wk[k] * wn[n];
                    for m in 0..mm {
                        out[win.index(k, m, n)] += acc_m[m] * w;
                    }
                }
            }
        }
    }
    out
}

/// Arbitrary densities: momentum nodes from the configured rule, one
/// `f̂(t−s, ξ, p)` call per `(s, p)`.
fn generic_blocks(f: &dyn PhaseDensity, t: f64, xi: &Vec3, rules: &SpectralRules, win: Windows) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); win.slots()];
    if f.fourier_x(t, xi, &Vec3::zeros()).is_none() {
        return Err(missing_transform(f));
    }
    let r = xi.norm();
    let xi_dir = if r > 0.0 { xi / r } else { Vec3::new(0.0, 0.0, 1.0) };
    let nodes = rules.momentum.nodes()?;
    let min_gap = nodes
        .iter()
        .map(|(p, _)| {
            let e = (1.0 + p.norm_squared()).sqrt();
            1.0 / (e * (e + p.norm()))
        })
        .fold(1.0, f64::min);
    let ss = s_nodes(t, r, rules, win.k);
    let sigmas = signed_nodes(2.0 * t * r, rules, win.m, grading(min_gap));
    let (km, mm, nm) = (win.k.slots(), win.m.slots(), win.n.slots());
    let mut wn = vec![0.0; nm];
    let mut acc_m = vec![C64::new(0.0, 0.0); mm];
    for (p, wp) in &nodes {
        let pn = p.norm();
        let e = (1.0 + pn * pn).sqrt();
        let (a, gap) = (pn / e, 1.0 / (e * (e + pn)));
        let c = if pn > 0.0 { xi_dir.dot(p) / pn } else { 0.0 };
        let c = c.clamp(-1.0, 1.0);
        let xc = sin_from_cos(c);
        win.n.weights(xc, &mut wn);
        if wn.iter().all(|v| *v == 0.0) {
            continue;
        }
        let base_w = wp / (1.0 + pn * pn);
        for (s, ws, wk) in &ss {
            let fhat = f.fourier_x(t - s, xi, p).ok_or_else(|| missing_transform(f))?;
            if fhat == C64::new(0.0, 0.0) {
                continue;
            }
            acc_m.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            for (sigma, wsig, wm) in &sigmas {
                let xs = sin_from_cos(*sigma);
                let v = C64::from_polar(wsig * focusing(gap, a, *sigma) * j0(s * r * xc * xs), s * sigma * r * c);
                for (x, m) in acc_m.iter_mut().zip(wm) {
                    if *m != 0.0 {
                        *x += v * *m;
                    }
                }
            }
            let scale = fhat * (TAU * ws * base_w);
            for k in 0..km {
                if wk[k] == 0.0 {
                    continue;
                }
                for n in 0..nm {
                    if wn[n] == 0.0 {
                        continue;
                    }
                    for m in 0..mm {
                        out[win.index(k, m, n)] += acc_m[m] * scale * (wk[k] * wn[n]);
                    }
                }
            }
        }
    }
    Ok(out)
}
