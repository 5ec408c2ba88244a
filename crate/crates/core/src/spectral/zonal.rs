//! Fast evaluation of the triple blocks for time-independent product
//! densities `f = X(x) P(|p|)`.
//!
//! Rotating the momentum and direction integrals about `ξ̂` gives
//! `û_{kmn}(t, ξ) = X̂(ξ) R_{kmn}(t, |ξ|)` with
//!
//! `R_{kmn}(t, r) = 2π ∫₋₁¹ dμ T_k(trμ) H_{mn}(μ)`,
//! `T_k(Y) = t ∫₀¹ ψ_k(u) e^{iuY} du`,
//! `H_{mn}(μ) = ∫₋₁¹ dσ G(σ) ψ_m(√(1−σ²)) Φ_n(σ, μ)`,
//! `Φ_n(σ, μ) = ∫₀^{2π} ψ_n(√(1−c²)) dφ`, `c = σμ + √(1−σ²)√(1−μ²) cos φ`,
//! `G(σ) = ∫ ρ² P(ρ) (1+ρ²)⁻¹ (1+a(ρ)σ)^{−3/2} dρ`.
//!
//! `Φ` depends on neither the density nor `t`, `H` only on the density,
//! and `T` is a function of one variable, so all three are tabulated once.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::direct::{focusing, radial_momentum};
use super::windows::{nodes_on, sin_from_cos, BinCaps, Window};
use super::SpectralRules;
use crate::density::ProductProfile;
use crate::special::chebyshev::ChebyshevTable;
use crate::special::gauss_legendre;
use crate::C64;

/// Smallest σ-panel width next to `±1` is `2^{−GRADE_DEPTH}` unless the
/// momentum support asks for finer.
const GRADE_DEPTH: i32 = 12;

/// Length of the Chebyshev panels of the `T_k` table.
const TRANSFORM_PANEL: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct AzimuthKey {
    m_cap: u32,
    n_cap: u32,
    depth: i32,
    panel_nodes: usize,
    angle_nodes: usize,
    zonal_nodes: usize,
}

/// `Φ_n(σ, μ_p)` at the μ interpolation points `μ_p ≥ 0`. As a function of
/// `σ`, `Φ_n` has square-root kinks at `σ = cos(θ_μ ± θ_b)` for every
/// window breakpoint `cos θ_b`, so each point carries its own σ nodes.
#[derive(Debug)]
struct AzimuthTable {
    mu_breaks: Vec<f64>,
    mu_points: usize,
    n_slots: usize,
    /// Rows for points `mu_points/2 ..`; the rest follow from `Φ(σ, −μ) = Φ(−σ, μ)`.
    rows: Vec<AzimuthRow>,
}

#[derive(Debug)]
struct AzimuthRow {
    sigma: Vec<(f64, f64)>,
    /// `[σ node][n]`.
    values: Vec<f64>,
}

impl AzimuthTable {
    /// Row for point `p` and the sign to apply to its σ nodes.
    fn row(&self, p: usize) -> (&AzimuthRow, f64) {
        let half = self.mu_points / 2;
        if p >= half {
            (&self.rows[p - half], 1.0)
        } else {
            (&self.rows[self.mu_points - 1 - p - half], -1.0)
        }
    }
}

fn mirrored(panels: Vec<(f64, f64)>) -> Vec<f64> {
    let mut breaks: Vec<f64> = panels.iter().flat_map(|(a, b)| [*a, *b, -*a, -*b]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    breaks
}

fn azimuth_table(key: AzimuthKey) -> Arc<AzimuthTable> {
    static CACHE: OnceLock<Mutex<HashMap<AzimuthKey, Arc<AzimuthTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("azimuth cache").get(&key) {
        return t.clone();
    }
    let table = Arc::new(build_azimuth(key));
    cache.lock().expect("azimuth cache").entry(key).or_insert(table).clone()
}

fn build_azimuth(key: AzimuthKey) -> AzimuthTable {
    let grade = (-(key.depth as f64)).exp2();
    let base = mirrored(Window::Bins(key.m_cap).signed_panels(true, Some(grade)));
    let mu_breaks = mirrored(Window::Bins(key.m_cap.max(key.n_cap)).signed_panels(false, None));
    let mu = ChebyshevTable::layout(mu_breaks.clone(), key.zonal_nodes, 1).points();
    let all_c = mirrored(Window::Bins(key.n_cap).signed_panels(true, None));
    let angles: Vec<f64> = all_c.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect();
    let c_breaks = all_c[1..all_c.len() - 1].to_vec();
    let n_win = Window::Bins(key.n_cap);
    let n_slots = n_win.slots();
    let rule = gauss_legendre(key.angle_nodes);
    let rows = mu[mu.len() / 2..]
        .par_iter()
        .map(|&m| {
            let theta = m.clamp(-1.0, 1.0).acos();
            let mut breaks = base.clone();
            for a in &angles {
                breaks.push((theta + a).cos());
                breaks.push((theta - a).cos());
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
            let panels: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
            let sigma = nodes_on(&panels, |_, _| key.panel_nodes);
            let mut values = vec![0.0; sigma.len() * n_slots];
            let mut scratch = vec![0.0; n_slots];
            let x_mu = sin_from_cos(m);
            for ((s, _), out) in sigma.iter().zip(values.chunks_mut(n_slots)) {
                azimuth_bins(*s, sin_from_cos(*s), m, x_mu, &c_breaks, n_win, &rule, &mut scratch, out);
            }
            AzimuthRow { sigma, values }
        })
        .collect();
    AzimuthTable { mu_breaks, mu_points: mu.len(), n_slots, rows }
}

/// `∫₀^{2π} ψ_n(√(1−c(φ)²)) dφ` into `out`, splitting `φ ∈ [0, π]` where
/// `c(φ)` crosses a window breakpoint.
#[allow(clippy::too_many_arguments)]
fn azimuth_bins(sigma: f64, x_sigma: f64, mu: f64, x_mu: f64, c_breaks: &[f64], win: Window, rule: &crate::special::GaussRule, scratch: &mut [f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let a = sigma * mu;
    let b = x_sigma * x_mu;
    if b <= 1e-15 {
        win.weights(sin_from_cos(a.clamp(-1.0, 1.0)), scratch);
        for (o, w) in out.iter_mut().zip(scratch.iter()) {
            *o = TAU * w;
        }
        return;
    }
    let lo = c_breaks.partition_point(|c| *c <= a - b);
    let hi = c_breaks.partition_point(|c| *c < a + b);
    let mut cuts = [0.0f64; 64];
    let mut len = 0;
    cuts[len] = 0.0;
    len += 1;
    for c in c_breaks[lo..hi].iter().rev() {
        cuts[len] = ((c - a) / b).clamp(-1.0, 1.0).acos();
        len += 1;
    }
    cuts[len] = PI;
    len += 1;
    for w in cuts[..len].windows(2) {
        let (p0, p1) = (w[0], w[1]);
        if p1 <= p0 {
            continue;
        }
        for (phi, wt) in rule.on(p0, p1) {
            let c = (a + b * phi.cos()).clamp(-1.0, 1.0);
            win.weights(sin_from_cos(c), scratch);
            for (o, v) in out.iter_mut().zip(scratch.iter()) {
                *o += 2.0 * wt * v;
            }
        }
    }
}

/// `H_{mn}(μ)` for one product profile, stored as a Chebyshev table in `μ`.
#[derive(Debug)]
pub struct AngularTable {
    pub caps: BinCaps,
    table: ChebyshevTable,
    /// `Σ_{mn} H_{mn}`, constant in `μ`: `∫ dp P(|p|)(1+p²)⁻¹(1+v·ω)^{−3/2}`.
    pub total: f64,
}

impl AngularTable {
    pub fn new(profile: &dyn ProductProfile, caps: BinCaps, rules: &SpectralRules) -> Self {
        let rho = radial_momentum(profile, rules);
        let min_gap = rho.iter().map(|q| q.3).fold(1.0, f64::min);
        let need = (-(0.25 * min_gap).log2()).ceil() as i32;
        let key = AzimuthKey {
            m_cap: caps.m,
            n_cap: caps.n,
            depth: need.max(GRADE_DEPTH),
            panel_nodes: rules.panel_nodes,
            angle_nodes: rules.angle_nodes,
            zonal_nodes: rules.zonal_nodes,
        };
        let az = azimuth_table(key);
        let m_win = Window::Bins(caps.m);
        let (ms, ns) = (m_win.slots(), az.n_slots);
        let width = ms * ns;
        let mut values = vec![0.0; az.mu_points * width];
        let mut wm = vec![0.0; ms];
        let mut total = 0.0;
        for (p, out) in values.chunks_mut(width).enumerate() {
            let (row, sign) = az.row(p);
            let mut row_total = 0.0;
            for (&(s, w), phi) in row.sigma.iter().zip(row.values.chunks(ns)) {
                let s = sign * s;
                let g: f64 = w * rho.iter().map(|&(_, wr, a, gap)| wr * focusing(gap, a, s)).sum::<f64>();
                m_win.weights(sin_from_cos(s), &mut wm);
                for (m, v) in wm.iter().enumerate() {
                    if *v == 0.0 {
                        continue;
                    }
                    let gv = g * v;
                    for (n, f) in phi.iter().enumerate() {
                        out[m * ns + n] += gv * f;
                    }
                }
                row_total += g * phi.iter().sum::<f64>();
            }
            total += row_total;
        }
        let total = total / az.mu_points as f64;
        let mut table = ChebyshevTable::layout(az.mu_breaks.clone(), rules.zonal_nodes, width);
        table.set_values(values);
        AngularTable { caps, table, total }
    }

    pub fn width(&self) -> usize {
        self.table.width()
    }

    pub fn eval_into(&self, mu: f64, out: &mut [f64]) {
        self.table.eval_into(mu, out)
    }

    pub fn breaks(&self) -> &[f64] {
        self.table.breaks()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TransformKey {
    k_cap: u32,
    y_max_log2: i32,
    panel_nodes: usize,
    oscillation_bits: u64,
    zonal_nodes: usize,
}

/// `T_k(Y)/t = ∫₀¹ ψ_k(u) e^{iuY} du` on `Y ∈ [0, Y_max]`, bins interleaved as `(re, im)`.
#[derive(Debug)]
pub struct WindowTransform {
    pub k_cap: u32,
    y_max: f64,
    table: ChebyshevTable,
}

impl WindowTransform {
    pub fn get(k_cap: u32, y_max: f64, rules: &SpectralRules) -> Arc<WindowTransform> {
        static CACHE: OnceLock<Mutex<HashMap<TransformKey, Arc<WindowTransform>>>> = OnceLock::new();
        let y_max_log2 = y_max.max(TRANSFORM_PANEL).log2().ceil() as i32;
        let key = TransformKey {
            k_cap,
            y_max_log2,
            panel_nodes: rules.panel_nodes,
            oscillation_bits: rules.oscillation_factor.to_bits(),
            zonal_nodes: rules.zonal_nodes,
        };
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("transform cache").get(&key) {
            return t.clone();
        }
        let built = Arc::new(Self::build(k_cap, (y_max_log2 as f64).exp2(), rules));
        cache.lock().expect("transform cache").entry(key).or_insert(built).clone()
    }

    fn build(k_cap: u32, y_max: f64, rules: &SpectralRules) -> Self {
        let win = Window::Bins(k_cap);
        let slots = win.slots();
        let panels = win.unit_panels(true);
        let mut wk = vec![0.0; slots];
        let nodes: Vec<(f64, Vec<f64>)> = nodes_on(&panels, |a, b| rules.nodes_for(y_max * (b - a)))
            .into_iter()
            .map(|(u, w)| {
                win.weights(u, &mut wk);
                (u, wk.iter().map(|v| w * v).collect())
            })
            .collect();
        let count = (y_max / TRANSFORM_PANEL).ceil() as usize;
        let breaks: Vec<f64> = (0..=count).map(|i| i as f64 * TRANSFORM_PANEL).collect();
        let table = ChebyshevTable::build(breaks, rules.zonal_nodes, 2 * slots, |y, out| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for (u, w) in &nodes {
                let (s, c) = (u * y).sin_cos();
                for (k, wv) in w.iter().enumerate() {
                    out[2 * k] += wv * c;
                    out[2 * k + 1] += wv * s;
                }
            }
        });
        WindowTransform { k_cap, y_max, table }
    }

    pub fn slots(&self) -> usize {
        self.k_cap as usize + 2
    }

    /// `T_k(Y)/t` for all bins; `Y` may be negative.
    #[inline]
    pub fn eval_into(&self, y: f64, scratch: &mut [f64], out: &mut [C64]) {
        let ay = y.abs().min(self.y_max);
        let panel = ((ay / TRANSFORM_PANEL) as usize).min(self.table.breaks().len() - 2);
        self.table.eval_in_panel(panel, ay, scratch);
        let sign = if y < 0.0 { -1.0 } else { 1.0 };
        for (k, o) in out.iter_mut().enumerate() {
            *o = C64::new(scratch[2 * k], sign * scratch[2 * k + 1]);
        }
    }
}

/// `R_{kmn}(t, r)` for every `r` in `radii`, each as a `caps.len()` vector
/// in [`BinCaps::index`] order.
pub fn radial_blocks(angular: &AngularTable, t: f64, radii: &[f64], rules: &SpectralRules) -> Vec<Vec<C64>> {
    let caps = angular.caps;
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let lambda = t * r_max;
    let transform = WindowTransform::get(caps.k, lambda, rules);
    let ks = transform.slots();
    let width = angular.width();
    let panels: Vec<(f64, f64)> = angular.breaks().windows(2).map(|w| (w[0], w[1])).collect();
    let mu = nodes_on(&panels, |a, b| rules.nodes_for(lambda * (b - a)));
    let mut hq = vec![0.0; mu.len() * width];
    for (i, (m, w)) in mu.iter().enumerate() {
        let row = &mut hq[i * width..(i + 1) * width];
        angular.eval_into(*m, row);
        row.iter_mut().for_each(|v| *v *= w);
    }
    let mut scratch = vec![0.0; 2 * ks];
    let mut tk = vec![C64::new(0.0, 0.0); ks];
    let mut acc = vec![0.0; 2 * ks * width];
    radii
        .iter()
        .map(|&r| {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (i, (m, _)) in mu.iter().enumerate() {
                transform.eval_into(t * r * m, &mut scratch, &mut tk);
                let h = &hq[i * width..(i + 1) * width];
                for (k, tv) in tk.iter().enumerate() {
                    let (re, im) = acc[2 * k * width..2 * (k + 1) * width].split_at_mut(width);
                    for ((ar, ai), hv) in re.iter_mut().zip(im.iter_mut()).zip(h) {
                        *ar += tv.re * hv;
                        *ai += tv.im * hv;
                    }
                }
            }
            let scale = TAU * t;
            (0..ks)
                .flat_map(|k| {
                    let base = 2 * k * width;
                    (0..width).map(move |x| (base, x))
                })
                .map(|(base, x)| C64::new(acc[base + x], acc[base + width + x]) * scale)
                .collect()
        })
        .collect()
}
