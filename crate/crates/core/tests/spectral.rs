use std::f64::consts::PI;

use gsrep::density::builtin::{builtin_density, BuiltinKind, DensityParams};
use gsrep::density::PhaseDensity;
use gsrep::fieldrep::{ConeEvaluator, ConeRule};
use gsrep::special::filters::DyadicFilterBank;
use gsrep::special::quadrature::gauss_legendre;
use gsrep::spectral::{uhat, uhat_bins, uhat_block, BinCaps, BlockIndex, SpectralRules};
use gsrep::{Vec3, C64};

fn h(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    a / (a + (-1.0 / (1.0 - t)).exp())
}

// normalized ψ₀ on ]0, 1]
fn psi0(x: f64) -> f64 {
    let raw0 = h(3.0 * (x - 1.0 / 3.0));
    if raw0 == 0.0 {
        return 0.0;
    }
    let l = x.log2();
    let rest: f64 = (1..6)
        .map(|k| {
            let k = k as f64;
            h(2.0 * (l + k + 2.0) / 3.0) * h(2.0 * (1.0 - k - l) / 3.0)
        })
        .sum();
    raw0 / (raw0 + rest)
}

fn rule(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let g = gauss_legendre(n);
    breaks.windows(2).flat_map(|w| g.on(w[0], w[1]).collect::<Vec<_>>()).collect()
}

/// Block (k, m, n) = (0, 0, 0) of the Gaussian at t with |ξ| = r, by direct
/// integration of ω over the sphere in the frame of v̄.
fn block_000_oracle(t: f64, r: f64, n: usize, n_phi: usize) -> C64 {
    let xs = [1.0 / 3.0, 0.5f64.powf(1.5), 0.5, 2.0 / 3.0, 1.0];
    let mut signed: Vec<f64> = xs.iter().map(|x| (1.0 - x * x).sqrt()).collect();
    signed.extend(xs.iter().map(|x| -(1.0 - x * x).sqrt()));
    signed.sort_by(f64::total_cmp);
    signed.dedup();
    let cos_rule = rule(&signed, n);
    let s_rule: Vec<(f64, f64)> = rule(&xs, n).into_iter().map(|(u, w)| (u * t, w * t * psi0(u))).collect();
    let rho_rule: Vec<(f64, f64, f64)> = rule(&[0.0, 4.0, 8.0], n)
        .into_iter()
        .map(|(p, w)| (p / (1.0 + p * p).sqrt(), 2.0 * PI * w * p * p * (-0.5 * p * p).exp() / (1.0 + p * p), p))
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for &(c, wc) in &cos_rule {
        let xc = (1.0 - c * c).sqrt();
        let wn = wc * psi0(xc);
        for &(sigma, ws) in &cos_rule {
            let xsig = (1.0 - sigma * sigma).sqrt();
            let wm = ws * psi0(xsig);
            let focus: f64 = rho_rule.iter().map(|&(a, w, _)| w * (1.0 + a * sigma).powf(-1.5)).sum();
            for q in 0..n_phi {
                let phi = 2.0 * PI * q as f64 / n_phi as f64;
                let y = r * (c * sigma + xc * xsig * phi.cos());
                let time: C64 = s_rule.iter().map(|&(s, w)| C64::from_polar(w, s * y)).sum();
                total += time * (wn * wm * focus * 2.0 * PI / n_phi as f64);
            }
        }
    }
    let xhat = (2.0 * PI).powf(1.5) * (-0.5 * r * r).exp();
    total * xhat
}

fn gaussian() -> Box<dyn PhaseDensity> {
    builtin_density(BuiltinKind::Gaussian, &DensityParams::default()).unwrap()
}

#[test]
fn block_matches_sphere_oracle() {
    let xi = Vec3::new(0.0, 0.0, 8.0);
    let f = gaussian();
    let got = uhat_block(&BlockIndex::new(3, 0, 0, 0), 1.0, &xi, f.as_ref(), &DyadicFilterBank::new(12), &SpectralRules::default().refined()).unwrap();
    let want = block_000_oracle(1.0, 8.0, 20, 48);
    assert!((got - want).norm() <= 1e-8 * want.norm(), "{got} vs {want}");
}

fn offset_gaussian() -> Box<dyn PhaseDensity> {
    let params = DensityParams { center: [0.7, -0.3, 0.2], ..DensityParams::default() };
    builtin_density(BuiltinKind::Gaussian, &params).unwrap()
}

#[test]
fn bins_reassemble_filtered_transform() {
    let f = offset_gaussian();
    let bank = DyadicFilterBank::new(12);
    let rules = SpectralRules::default();
    let xi = Vec3::new(3.0, -4.0, 2.5);
    let whole = uhat(1.5, &xi, f.as_ref(), &rules).unwrap() * bank.radial(3, xi.norm());
    let bins = uhat_bins(3, BinCaps::uniform(4), 1.5, &xi, f.as_ref(), &bank, &rules).unwrap();
    let sum: C64 = bins.iter().sum();
    assert!((sum - whole).norm() <= 1e-6 * whole.norm(), "{sum} vs {whole}");
    let outside = uhat_bins(6, BinCaps::uniform(2), 1.5, &xi, f.as_ref(), &bank, &rules).unwrap();
    assert!(outside.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn transform_of_real_field_is_hermitian() {
    let rules = SpectralRules::default();
    let streaming = builtin_density(BuiltinKind::FreeStreaming, &DensityParams { center: [0.5, 0.0, -1.0], ..DensityParams::default() }).unwrap();
    for f in [offset_gaussian(), streaming] {
        for xi in [Vec3::new(1.0, 2.0, -0.5), Vec3::new(0.0, 0.3, 5.0)] {
            let a = uhat(1.0, &xi, f.as_ref(), &rules).unwrap();
            let b = uhat(1.0, &-xi, f.as_ref(), &rules).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1e-300), "{} {a} {b}", f.name());
        }
    }
}

#[test]
fn direct_route_matches_ball_closed_form() {
    let f = gaussian();
    let rules = SpectralRules::default();
    let w = 2.0 * PI * rule(&[0.0, 4.0, 8.0], 32)
        .into_iter()
        .map(|(p, wp)| {
            let a = p / (1.0 + p * p).sqrt();
            // ∫₋₁¹ (1+aσ)^{−3/2} dσ
            let focus = if a == 0.0 { 2.0 } else { 2.0 / a * ((1.0 - a).powf(-0.5) - (1.0 + a).powf(-0.5)) };
            wp * p * p * (-0.5 * p * p).exp() / (1.0 + p * p) * focus
        })
        .sum::<f64>();
    for (t, r) in [(0.5, 0.7), (1.0, 3.0), (2.0, 1.5)] {
        let ball: f64 = rule(&[0.0, t], 40).into_iter().map(|(y, wy)| wy * 4.0 * PI * (r * y).sin() / (r * y)).sum();
        let want = (2.0 * PI).powf(1.5) * (-0.5 * r * r).exp() * w * ball;
        let got = uhat(t, &Vec3::new(r, 0.0, 0.0), f.as_ref(), &rules).unwrap();
        assert!((got.re - want).abs() <= 1e-9 * want && got.im.abs() <= 1e-12 * want, "t {t} r {r}: {got} vs {want}");
    }
}

#[test]
fn plancherel_against_cone_quadrature() {
    let f = gaussian();
    let rules = SpectralRules::default();
    let t = 1.0;
    let breaks = [0.0, 2.0, 4.0, 6.0, 8.0];
    let spectral: f64 = rule(&breaks, 24)
        .into_iter()
        .map(|(r, w)| w * 4.0 * PI * r * r * uhat(t, &Vec3::new(0.0, r, 0.0), f.as_ref(), &rules).unwrap().norm_sqr())
        .sum::<f64>()
        / (2.0 * PI).powi(3);
    let eval = ConeEvaluator::new(f.as_ref(), ConeRule::default()).unwrap();
    let physical: f64 = rule(&[0.0, 2.0, 4.0, 6.0, 9.0], 24)
        .into_iter()
        .map(|(r, w)| w * 4.0 * PI * r * r * eval.majorant_u(t, &Vec3::new(r, 0.0, 0.0)).unwrap().powi(2))
        .sum();
    assert!((spectral - physical).abs() <= 1e-6 * physical, "{spectral} vs {physical}");
}

#[test]
fn zero_time_and_zero_density_vanish() {
    let rules = SpectralRules::default();
    let bank = DyadicFilterBank::new(12);
    let xi = Vec3::new(1.0, 1.0, 1.0);
    assert_eq!(uhat(0.0, &xi, gaussian().as_ref(), &rules).unwrap(), C64::new(0.0, 0.0));
    let zero = builtin_density(BuiltinKind::Zero, &DensityParams::default()).unwrap();
    assert_eq!(uhat(2.0, &xi, zero.as_ref(), &rules).unwrap(), C64::new(0.0, 0.0));
    let b = uhat_block(&BlockIndex::new(1, 0, 1, 2), 2.0, &xi, zero.as_ref(), &bank, &rules).unwrap();
    assert_eq!(b, C64::new(0.0, 0.0));
    assert!(uhat(-1.0, &xi, gaussian().as_ref(), &rules).is_err());
}
