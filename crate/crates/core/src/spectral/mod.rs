//! The Fourier transform of the majorant `u`, its Littlewood-Paley blocks
//! `û_j = φ_j û`, the triple blocks `û_{jkmn}` and their norms.
//!
//! Convention: `û(ξ) = ∫ e^{−iξ·x} u(x) dx` with no prefactor, so
//! `∫ |û|² dξ = (2π)³ ∫ |u|² dx`.
//!
//! Three evaluation routes share one set of [`SpectralRules`]:
//!
//! - [`direct`]: the triple quadrature in `(s, p, σ)` at one `ξ`, for any
//!   density with a spatial transform;
//! - [`zonal`]: all `(k, m, n)` blocks of a time-independent product
//!   density at many `|ξ|` at once;
//! - [`radial`]: closed forms of the unwindowed `û` for the same densities.

pub mod direct;
pub mod oscillatory;
pub mod radial;
pub mod reconstruct;
pub mod windows;
pub mod zonal;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{MomentumRule, PhaseDensity};
use crate::report::fmt_num;
use crate::special::filters::DyadicFilterBank;
use crate::special::sphere_rule;
use crate::{Error, Result, Vec3, C64};

pub use direct::{direct_blocks, Windows};
pub use oscillatory::{focusing_integral, sphere_oscillatory, OscillatoryMethod};
pub use reconstruct::{reconstruct_u, CubicField};
pub use windows::{BinCaps, Window};

/// Quadrature resolutions of the spectral routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralRules {
    /// Gauss nodes per panel before oscillation is accounted for.
    pub panel_nodes: usize,
    /// Extra nodes per radian of phase across a panel.
    pub oscillation_factor: f64,
    /// Gauss nodes on each half of the momentum radius.
    pub momentum_nodes: usize,
    /// Gauss nodes per panel of the azimuthal window integral.
    pub angle_nodes: usize,
    /// Chebyshev points per panel of the tabulated angular functions.
    pub zonal_nodes: usize,
    /// Cubic reconstruction grid size per axis.
    pub fft_size: usize,
    /// Relative size below which `φ_j |X̂|` is treated as zero.
    pub negligible: f64,
    /// Momentum quadrature for densities without product structure.
    pub momentum: MomentumRule,
}

impl Default for SpectralRules {
    fn default() -> Self {
        SpectralRules {
            panel_nodes: 16,
            oscillation_factor: 0.6,
            momentum_nodes: 32,
            angle_nodes: 8,
            zonal_nodes: 16,
            fft_size: 128,
            negligible: 1e-12,
            momentum: MomentumRule::Spherical { radius: 8.0, radial_nodes: 32, degree: 17 },
        }
    }
}

impl SpectralRules {
    /// Nodes for a panel across which the integrand phase advances by `phase`.
    #[inline]
    pub fn nodes_for(&self, phase: f64) -> usize {
        self.panel_nodes + (self.oscillation_factor * phase.abs()).ceil() as usize
    }

    /// Every quadrature resolution doubled. The reconstruction grid is kept.
    pub fn refined(&self) -> Self {
        let momentum = match self.momentum {
            MomentumRule::Cartesian { radius, nodes_per_axis } => MomentumRule::Cartesian { radius, nodes_per_axis: 2 * nodes_per_axis },
            MomentumRule::Spherical { radius, radial_nodes, degree } => {
                MomentumRule::Spherical { radius, radial_nodes: 2 * radial_nodes, degree: 2 * degree + 1 }
            }
        };
        SpectralRules {
            panel_nodes: 2 * self.panel_nodes,
            oscillation_factor: 2.0 * self.oscillation_factor,
            momentum_nodes: 2 * self.momentum_nodes,
            angle_nodes: 2 * self.angle_nodes,
            zonal_nodes: 2 * self.zonal_nodes,
            momentum,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        let counts = [
            ("panel_nodes", self.panel_nodes),
            ("momentum_nodes", self.momentum_nodes),
            ("angle_nodes", self.angle_nodes),
            ("zonal_nodes", self.zonal_nodes),
        ];
        for (name, v) in counts {
            if v < 2 {
                return Err(Error::usage(format!("spectral rule `{name}` must be at least 2, got {v}")));
            }
        }
        if !(self.oscillation_factor >= 0.0 && self.oscillation_factor.is_finite()) {
            return Err(Error::usage("spectral rule `oscillation_factor` must be finite and nonnegative"));
        }
        if self.fft_size < 8 || self.fft_size % 2 != 0 {
            return Err(Error::usage(format!("spectral rule `fft_size` must be even and at least 8, got {}", self.fft_size)));
        }
        Ok(())
    }
}

/// Frequency-space quadrature for shell integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum XiGrid {
    /// Gauss panels in `|ξ|` split at `2^j`, times a sphere rule when the
    /// integrand is not radial.
    Shell { radial_nodes: usize, sphere_degree: usize },
    /// The lattice `2π ℤ³ / L` with `size` points per axis; `extent` is `L`,
    /// chosen from the density support when absent.
    Cubic { size: usize, extent: Option<f64> },
}

impl Default for XiGrid {
    fn default() -> Self {
        XiGrid::Shell { radial_nodes: 32, sphere_degree: 29 }
    }
}

impl XiGrid {
    pub fn refined(&self) -> Self {
        match *self {
            XiGrid::Shell { radial_nodes, sphere_degree } => XiGrid::Shell { radial_nodes: 2 * radial_nodes, sphere_degree: 2 * sphere_degree + 1 },
            XiGrid::Cubic { size, extent } => XiGrid::Cubic { size: 2 * size, extent },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockIndex {
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub n: u32,
}

impl BlockIndex {
    pub fn new(j: u32, k: u32, m: u32, n: u32) -> Self {
        BlockIndex { j, k, m, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub index: BlockIndex,
    pub t: f64,
    /// `‖û_{jkmn}(t, ·)‖_{L²_ξ}`.
    pub measured: f64,
    /// [`block_bound`] at this index and time.
    pub bound: f64,
}

impl BlockNorm {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.measured / self.bound
        } else if self.measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Which term attains the inner minimum of the block bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `2^{−2m} 2^{3j/2}`.
    MBranch,
    /// `(√n + √j) 2^{−n}`.
    NBranch,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::MBranch => "m-branch",
            Branch::NBranch => "n-branch",
        }
    }
}

fn branch_terms(idx: &BlockIndex) -> (f64, f64) {
    let (j, m, n) = (idx.j as f64, idx.m as f64, idx.n as f64);
    ((1.5 * j - 2.0 * m).exp2(), (n.sqrt() + j.sqrt()) * (-n).exp2())
}

pub fn active_branch(idx: &BlockIndex) -> Branch {
    let (m_term, n_term) = branch_terms(idx);
    if m_term <= n_term {
        Branch::MBranch
    } else {
        Branch::NBranch
    }
}

/// `t min{1, 2^{(k+m+n−j)/2} t^{−1/2}} 2^{−k} min{2^{−2m} 2^{3j/2}, (√n+√j) 2^{−n}}`.
pub fn block_bound(idx: &BlockIndex, t: f64) -> f64 {
    let (m_term, n_term) = branch_terms(idx);
    let e = (idx.k + idx.m + idx.n) as f64 - idx.j as f64;
    let time = if t > 0.0 { (0.5 * e).exp2() / t.sqrt() } else { 0.0 };
    t * time.min(1.0) * (-(idx.k as f64)).exp2() * m_term.min(n_term)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("spectral", format!("needs finite t ≥ 0, got {t}")));
    }
    Ok(())
}

/// `û(t, ξ)`.
pub fn uhat(t: f64, xi: &Vec3, f: &dyn PhaseDensity, rules: &SpectralRules) -> Result<C64> {
    rules.validate()?;
    Ok(direct_blocks(f, t, xi, rules, Windows::WHOLE)?[0])
}

/// `û_{jkmn}(t, ξ)`, zero outside the shell of `φ_j`.
pub fn uhat_block(idx: &BlockIndex, t: f64, xi: &Vec3, f: &dyn PhaseDensity, bank: &DyadicFilterBank, rules: &SpectralRules) -> Result<C64> {
    rules.validate()?;
    let phi = bank.radial(idx.j, xi.norm());
    let win = Windows { k: Window::Single(idx.k), m: Window::Single(idx.m), n: Window::Single(idx.n) };
    if phi == 0.0 {
        check_time(t)?;
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(direct_blocks(f, t, xi, rules, win)?[0] * phi)
}

/// `φ_j û_{jkmn}(t, ξ)` for every bin of `caps`, in [`BinCaps::index`] order.
/// The last bin of each role collects the remainder, so the bins sum to `φ_j û`.
pub fn uhat_bins(j: u32, caps: BinCaps, t: f64, xi: &Vec3, f: &dyn PhaseDensity, bank: &DyadicFilterBank, rules: &SpectralRules) -> Result<Vec<C64>> {
    rules.validate()?;
    let win = Windows { k: Window::Bins(caps.k), m: Window::Bins(caps.m), n: Window::Bins(caps.n) };
    let phi = bank.radial(j, xi.norm());
    if phi == 0.0 {
        check_time(t)?;
        return Ok(vec![C64::new(0.0, 0.0); caps.len()]);
    }
    let mut out = direct_blocks(f, t, xi, rules, win)?;
    out.iter_mut().for_each(|v| *v *= phi);
    Ok(out)
}

/// Nodes of a shell integral `∫ φ_j(ξ)² g(ξ) dξ`.
enum ShellNodes {
    /// `(|ξ|, weight)` with the angular measure and `φ_j²` folded in; for integrands depending on `|ξ|` only.
    Radial(Vec<(f64, f64)>),
    /// `(ξ, weight)` with `φ_j²` folded in.
    Full(Vec<(Vec3, f64)>),
}

/// Interval of `[lo, hi]` outside which `amp` is negligible relative to its maximum, or `None` if `amp` vanishes.
pub(crate) fn effective_interval(lo: f64, hi: f64, negligible: f64, amp: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    const SAMPLES: usize = 256;
    let h = (hi - lo) / SAMPLES as f64;
    let values: Vec<f64> = (0..=SAMPLES).map(|i| amp(lo + h * i as f64).abs()).collect();
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let keep = |v: &f64| *v >= negligible * max;
    let first = values.iter().position(keep)?;
    let last = values.iter().rposition(keep)?;
    Some((lo + h * first.saturating_sub(1) as f64, (lo + h * (last + 1) as f64).min(hi)))
}

fn lattice_extent(f: &dyn PhaseDensity, t: f64, extent: Option<f64>) -> f64 {
    extent.unwrap_or_else(|| reconstruct::default_extent(f, t))
}

fn shell_nodes(f: &dyn PhaseDensity, t: f64, j: u32, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<ShellNodes> {
    let (lo, hi) = bank.shell(j);
    let radial = f.spectral().is_some();
    let phi2 = |r: f64| {
        let p = bank.radial(j, r);
        p * p
    };
    match *grid {
        XiGrid::Shell { radial_nodes, sphere_degree } => {
            if radial_nodes == 0 {
                return Err(Error::usage("shell grid needs radial nodes"));
            }
            let (a, b) = match f.spectral() {
                Some(form) => {
                    let amp = |r: f64| bank.radial(j, r) * form.profile.spatial_transform_radial(r);
                    match effective_interval(lo, hi, rules.negligible, amp) {
                        Some(ab) => ab,
                        None => return Ok(ShellNodes::Radial(Vec::new())),
                    }
                }
                None => (lo, hi),
            };
            let mid = (j as f64).exp2();
            let mut breaks = vec![a];
            if mid > a && mid < b {
                breaks.push(mid);
            }
            breaks.push(b);
            let rate = 2.0 * t + 2.0 * f.support_radius_x(t);
            let mut nodes = Vec::new();
            for w in breaks.windows(2) {
                let n = radial_nodes + (rules.oscillation_factor * rate * (w[1] - w[0])).ceil() as usize;
                for (r, wr) in crate::special::gauss_legendre(n).on(w[0], w[1]) {
                    nodes.push((r, wr * r * r * phi2(r)));
                }
            }
            if radial {
                Ok(ShellNodes::Radial(nodes.into_iter().map(|(r, w)| (r, 4.0 * PI * w)).collect()))
            } else {
                let sphere = sphere_rule(sphere_degree)?;
                let mut full = Vec::with_capacity(nodes.len() * sphere.len());
                for (r, w) in nodes {
                    for (omega, wo) in &sphere.nodes {
                        full.push((omega.as_vec() * r, w * wo));
                    }
                }
                Ok(ShellNodes::Full(full))
            }
        }
        XiGrid::Cubic { size, extent } => {
            if size < 2 {
                return Err(Error::usage("cubic grid needs at least two points per axis"));
            }
            let step = 2.0 * PI / lattice_extent(f, t, extent);
            let cell = step * step * step;
            let half = (size / 2) as i64;
            let reach = ((hi / step).ceil() as i64).min(half);
            if radial {
                let mut counts = std::collections::BTreeMap::new();
                for a in -reach..reach.min(half - 1) + 1 {
                    for b in -reach..reach.min(half - 1) + 1 {
                        for c in -reach..reach.min(half - 1) + 1 {
                            *counts.entry(a * a + b * b + c * c).or_insert(0u64) += 1;
                        }
                    }
                }
                Ok(ShellNodes::Radial(
                    counts
                        .into_iter()
                        .map(|(q, n)| {
                            let r = step * (q as f64).sqrt();
                            (r, n as f64 * cell * phi2(r))
                        })
                        .filter(|(_, w)| *w > 0.0)
                        .collect(),
                ))
            } else {
                let mut full = Vec::new();
                for a in -reach..reach.min(half - 1) + 1 {
                    for b in -reach..reach.min(half - 1) + 1 {
                        for c in -reach..reach.min(half - 1) + 1 {
                            let xi = Vec3::new(a as f64, b as f64, c as f64) * step;
                            let w = cell * phi2(xi.norm());
                            if w > 0.0 {
                                full.push((xi, w));
                            }
                        }
                    }
                }
                Ok(ShellNodes::Full(full))
            }
        }
    }
}

/// `Σ w |v|²` per slot over per-node slot vectors, summed in node order.
fn accumulate_squares(rows: impl Iterator<Item = (f64, Vec<C64>)>, slots: usize) -> Vec<f64> {
    let mut acc = vec![0.0; slots];
    for (w, row) in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += w * v.norm_sqr();
        }
    }
    acc
}

/// Squared `L²_ξ` norms of all bins of `φ_j û` for `caps`, in [`BinCaps::index`] order.
fn bin_energies(f: &dyn PhaseDensity, t: f64, j: u32, caps: BinCaps, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<Vec<f64>> {
    rules.validate()?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(vec![0.0; caps.len()]);
    }
    let nodes = shell_nodes(f, t, j, bank, rules, grid)?;
    let win = Windows { k: Window::Bins(caps.k), m: Window::Bins(caps.m), n: Window::Bins(caps.n) };
    match (nodes, f.spectral()) {
        (ShellNodes::Radial(nodes), Some(form)) if !form.transported => {
            if nodes.is_empty() {
                return Ok(vec![0.0; caps.len()]);
            }
            let angular = zonal::AngularTable::new(form.profile, caps, rules);
            let radii: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let blocks: Vec<Vec<C64>> = radii
                .par_chunks(32)
                .flat_map_iter(|chunk| zonal::radial_blocks(&angular, t, chunk, rules))
                .collect();
            Ok(accumulate_squares(
                nodes.iter().zip(blocks).map(|((r, w), row)| {
                    let x = form.profile.spatial_transform_radial(*r);
                    (w * x * x, row)
                }),
                caps.len(),
            ))
        }
        (ShellNodes::Radial(nodes), _) => {
            let rows: Vec<Result<Vec<C64>>> = nodes
                .par_iter()
                .map(|(r, _)| direct_blocks(f, t, &Vec3::new(0.0, 0.0, *r), rules, win))
                .collect();
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            Ok(accumulate_squares(nodes.iter().map(|n| n.1).zip(rows), caps.len()))
        }
        (ShellNodes::Full(nodes), _) => {
            let rows: Vec<Result<Vec<C64>>> = nodes.par_iter().map(|(xi, _)| direct_blocks(f, t, xi, rules, win)).collect();
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            Ok(accumulate_squares(nodes.iter().map(|n| n.1).zip(rows), caps.len()))
        }
    }
}

/// Block norms for every `k ≤ caps.k`, `m ≤ caps.m`, `n ≤ caps.n` at one `(t, j)`.
pub fn block_norms(f: &dyn PhaseDensity, t: f64, j: u32, caps: BinCaps, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<Vec<BlockNorm>> {
    let energies = bin_energies(f, t, j, caps, bank, rules, grid)?;
    let mut out = Vec::with_capacity(((caps.k + 1) * (caps.m + 1) * (caps.n + 1)) as usize);
    for k in 0..=caps.k {
        for m in 0..=caps.m {
            for n in 0..=caps.n {
                let index = BlockIndex { j, k, m, n };
                let e = energies[caps.index(k as usize, m as usize, n as usize)];
                out.push(BlockNorm { index, t, measured: e.max(0.0).sqrt(), bound: block_bound(&index, t) });
            }
        }
    }
    Ok(out)
}

pub fn block_l2_norm(idx: &BlockIndex, t: f64, f: &dyn PhaseDensity, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<BlockNorm> {
    let caps = BinCaps { k: idx.k, m: idx.m, n: idx.n };
    let norms = block_norms(f, t, idx.j, caps, bank, rules, grid)?;
    Ok(*norms.last().expect("nonempty sweep"))
}

/// `‖u_j(t, ·)‖_{L²_x} = (2π)^{−3/2} ‖φ_j û(t, ·)‖_{L²_ξ}`.
pub fn uj_l2_norm(t: f64, j: u32, f: &dyn PhaseDensity, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<f64> {
    rules.validate()?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let energy = match (shell_nodes(f, t, j, bank, rules, grid)?, f.spectral()) {
        (ShellNodes::Radial(nodes), Some(form)) if !form.transported => {
            let total = radial::FrozenTotal::new(form.profile, rules);
            nodes.iter().map(|(r, w)| w * total.uhat_radial(t, *r).powi(2)).sum::<f64>()
        }
        (ShellNodes::Radial(nodes), _) => {
            let rows: Vec<Result<C64>> = nodes.par_iter().map(|(r, _)| uhat(t, &Vec3::new(0.0, 0.0, *r), f, rules)).collect();
            let mut acc = 0.0;
            for ((_, w), v) in nodes.iter().zip(rows) {
                acc += w * v?.norm_sqr();
            }
            acc
        }
        (ShellNodes::Full(nodes), _) => {
            let rows: Vec<Result<C64>> = nodes.par_iter().map(|(xi, _)| uhat(t, xi, f, rules)).collect();
            let mut acc = 0.0;
            for ((_, w), v) in nodes.iter().zip(rows) {
                acc += w * v?.norm_sqr();
            }
            acc
        }
    };
    Ok(energy.max(0.0).sqrt() * (2.0 * PI).powf(-1.5))
}

/// `(‖u‖_{H^s}, ‖u‖_{L^q})` at time `t`. The Sobolev norm sums
/// `2^{2sj} ‖u_j‖²` over the bank; the Lebesgue norm integrates the
/// cubic reconstruction.
#[allow(clippy::too_many_arguments)]
pub fn sobolev_lq_norms(t: f64, f: &dyn PhaseDensity, s: f64, q: f64, bank: &DyadicFilterBank, rules: &SpectralRules, grid: &XiGrid) -> Result<(f64, f64)> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::usage(format!("L^q norm needs 2 < q < ∞, got q = {q}")));
    }
    if !(s > 0.0 && s < 1.5) {
        return Err(Error::usage(format!("H^s norm needs 0 < s < 3/2, got s = {s}")));
    }
    let mut hs2 = 0.0;
    for j in 0..=bank.j_max {
        let uj = uj_l2_norm(t, j, f, bank, rules, grid)?;
        hs2 += (2.0 * s * j as f64).exp2() * uj * uj;
    }
    let field = reconstruct_u(t, f, rules, None)?;
    Ok((hs2.sqrt(), field.lq_norm(q)))
}

/// Norm table with columns `t, j, k, m, n, measured, bound, ratio`.
pub fn write_norm_csv<W: Write>(mut w: W, norms: &[BlockNorm]) -> std::io::Result<()> {
    writeln!(w, "t,j,k,m,n,measured,bound,ratio")?;
    for b in norms {
        let i = b.index;
        writeln!(w, "{},{},{},{},{},{},{},{}", fmt_num(b.t), i.j, i.k, i.m, i.n, fmt_num(b.measured), fmt_num(b.bound), fmt_num(b.ratio()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert_eq!(block_bound(&BlockIndex::new(4, 0, 0, 0), 1.0), 0.5);
        assert!(block_bound(&BlockIndex::new(1, 0, 0, 0), 2.0) > 0.0);
    }

    #[test]
    fn branch_switch() {
        for m in 0..8 {
            let b = active_branch(&BlockIndex::new(6, 0, m, 0));
            assert_eq!(b == Branch::MBranch, m >= 4, "m = {m}");
        }
    }

    #[test]
    fn effective_interval_trims_tails() {
        let (a, b) = effective_interval(0.0, 10.0, 1e-12, |r| (-r * r / 2.0).exp()).unwrap();
        assert_eq!(a, 0.0);
        assert!(b > 7.4 && b < 7.6);
        assert!(effective_interval(0.0, 1.0, 1e-12, |_| 0.0).is_none());
    }
}
